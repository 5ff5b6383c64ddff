from __future__ import annotations

import random

import numpy as np
import pytest

from caprag.embedding import EmbeddingVector
from caprag.errors import ContractError, TransportError
from caprag.vector_store import (
    HttpReranker,
    LexicalReranker,
    RetrievalHit,
    VectorIndex,
    rerank,
)

from oracles import brute_force_search


def vec(*values) -> EmbeddingVector:
    return EmbeddingVector(values=np.array(values, dtype=np.float64))


def random_vec(rng: random.Random, dim: int) -> EmbeddingVector:
    return EmbeddingVector(values=np.array([rng.gauss(0, 1) for _ in range(dim)]))


def test_add_and_len():
    index = VectorIndex(2)
    index.add("c1", "text", vec(1.0, 0.0))
    assert len(index) == 1


def test_duplicate_id_rejected():
    index = VectorIndex(2)
    index.add("c1", "text", vec(1.0, 0.0))
    with pytest.raises(ContractError):
        index.add("c1", "other", vec(0.0, 1.0))


def test_add_n_distinct():
    index = VectorIndex(2)
    for i in range(17):
        index.add(f"c{i}", "t", vec(float(i), 1.0))
    assert len(index) == 17


def test_dim_mismatch_rejected():
    index = VectorIndex(2)
    with pytest.raises(ContractError):
        index.add("c1", "t", vec(1.0, 2.0, 3.0))
    index.add("c2", "t", vec(1.0, 0.0))
    with pytest.raises(ContractError):
        index.search(vec(1.0, 0.0, 0.0), 1)


def test_exact_match_ranks_first():
    index = VectorIndex(2)
    index.add("a", "t", vec(1.0, 0.0))
    index.add("b", "t", vec(0.0, 1.0))
    hits = index.search(vec(1.0, 0.0), 2)
    assert hits[0].chunk_id == "a"
    assert hits[0].retrieval_score == pytest.approx(1.0)


def test_k_larger_than_index():
    index = VectorIndex(2)
    index.add("a", "t", vec(1.0, 0.0))
    assert len(index.search(vec(1.0, 0.0), 10)) == 1


def test_tie_break_by_chunk_id():
    index = VectorIndex(2)
    index.add("z", "t", vec(1.0, 0.0))
    index.add("a", "t", vec(2.0, 0.0))  # same direction, same cosine
    hits = index.search(vec(1.0, 0.0), 2)
    assert [h.chunk_id for h in hits] == ["a", "z"]


def test_search_matches_brute_force_oracle():
    rng = random.Random(13)
    index = VectorIndex(16)
    entries = []
    for i in range(300):
        v = random_vec(rng, 16)
        index.add(f"c{i:03d}", "t", v)
        entries.append((f"c{i:03d}", v.values))
    for _ in range(20):
        q = random_vec(rng, 16)
        got = [h.chunk_id for h in index.search(q, 10)]
        assert got == brute_force_search(entries, q.values, 10)


def test_scores_non_increasing():
    rng = random.Random(29)
    index = VectorIndex(8)
    for i in range(100):
        index.add(f"c{i}", "t", random_vec(rng, 8))
    hits = index.search(random_vec(rng, 8), 25)
    scores = [h.retrieval_score for h in hits]
    assert scores == sorted(scores, reverse=True)


def test_jsonl_roundtrip(tmp_path):
    rng = random.Random(5)
    index = VectorIndex(4)
    for i in range(9):
        index.add(f"c{i}", f"text {i}", random_vec(rng, 4))
    path = tmp_path / "index.jsonl"
    index.save_jsonl(path)
    loaded = VectorIndex.load_jsonl(path)
    assert loaded.dim == 4
    assert len(loaded) == len(index)
    q = random_vec(rng, 4)
    assert [h.chunk_id for h in loaded.search(q, 5)] == [h.chunk_id for h in index.search(q, 5)]


# --- rerank -------------------------------------------------------------------


def hits_from(texts: dict[str, str]) -> list[RetrievalHit]:
    return [
        RetrievalHit(chunk_id=cid, retrieval_score=1.0 - 0.01 * i, text=text)
        for i, (cid, text) in enumerate(texts.items())
    ]


def test_lexical_full_overlap_beats_none():
    hits = hits_from({"low": "completely unrelated words", "high": "atm withdrawal fee schedule"})
    reranked = rerank("atm withdrawal fee", hits, LexicalReranker())
    assert reranked[0].chunk_id == "high"
    assert reranked[0].rerank_score == pytest.approx(1.0)
    assert reranked[1].rerank_score == pytest.approx(0.0)


def test_lexical_term_overlap_values():
    hits = hits_from(
        {"h1": "fee schedule for atm withdrawal", "h2": "branch opening hours"}
    )
    reranked = rerank("atm withdrawal fee", hits, LexicalReranker())
    assert [h.chunk_id for h in reranked] == ["h1", "h2"]
    assert reranked[0].rerank_score == pytest.approx(1.0)
    assert reranked[1].rerank_score == pytest.approx(0.0)


def test_equal_scores_preserve_retrieval_order():
    hits = hits_from({"a": "same text", "b": "same text", "c": "same text"})
    reranked = rerank("different query terms", hits, LexicalReranker())
    assert [h.chunk_id for h in reranked] == ["a", "b", "c"]


def test_rerank_is_permutation():
    rng = random.Random(3)
    words = ["fee", "atm", "card", "branch", "loan", "wire"]
    hits = hits_from(
        {f"c{i}": " ".join(rng.sample(words, 3)) for i in range(12)}
    )
    reranked = rerank("atm fee", hits, LexicalReranker())
    assert sorted(h.chunk_id for h in reranked) == sorted(h.chunk_id for h in hits)


def test_rerank_requires_hits():
    with pytest.raises(ContractError):
        rerank("q", [], LexicalReranker())


def test_http_reranker_fallback_flags_hits(monkeypatch):
    def failing_post(*args, **kwargs):
        raise TransportError("boom", status=500)

    monkeypatch.setattr("caprag.vector_store.post_json", failing_post)
    hits = hits_from({"a": "one", "b": "two"})
    reranked = rerank("q", hits, HttpReranker("http://rerank.local"))
    assert [h.chunk_id for h in reranked] == ["a", "b"]  # retrieval order kept
    assert all(h.rerank_failed for h in reranked)
    assert all(h.rerank_score is None for h in reranked)


def test_http_reranker_scores_applied(monkeypatch):
    monkeypatch.setattr(
        "caprag.vector_store.post_json", lambda *a, **k: {"scores": [0.1, 0.9]}
    )
    hits = hits_from({"a": "one", "b": "two"})
    reranked = rerank("q", hits, HttpReranker("http://rerank.local"))
    assert [h.chunk_id for h in reranked] == ["b", "a"]
