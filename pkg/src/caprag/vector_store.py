"""Exact top-k vector store with a pluggable post-retrieval re-ranking stage.

Search is exact brute force over every entry: the corpus scale this engine
targets does not justify approximate indexes, and exactness makes the store
testable against a full-sort oracle. Ties are broken by ascending chunk id so
results form a total order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .embedding import EmbeddingVector, cosine
from .errors import ContractError, TransportError
from .httputil import post_json
from .textutil import term_set


@dataclass
class RetrievalHit:
    chunk_id: str
    retrieval_score: float
    text: str
    rerank_score: float | None = None
    rerank_failed: bool = False


@dataclass
class _Entry:
    chunk_id: str
    vector: EmbeddingVector
    text: str


class VectorIndex:
    def __init__(self, dim: int):
        if dim <= 0:
            raise ContractError("index dim must be positive")
        self.dim = dim
        self._entries: list[_Entry] = []
        self._ids: set[str] = set()

    def __len__(self) -> int:
        return len(self._entries)

    def add(self, chunk_id: str, text: str, vector: EmbeddingVector) -> None:
        if chunk_id in self._ids:
            raise ContractError(f"duplicate chunk_id {chunk_id!r}")
        if vector.dim != self.dim:
            raise ContractError(f"vector dim {vector.dim} != index dim {self.dim}")
        self._entries.append(_Entry(chunk_id=chunk_id, vector=vector, text=text))
        self._ids.add(chunk_id)

    def search(self, query: EmbeddingVector, k: int) -> list[RetrievalHit]:
        """Top-k entries by cosine, descending; exactly min(k, len) hits."""
        if k < 1:
            raise ContractError("k must be >= 1")
        if query.dim != self.dim:
            raise ContractError(f"query dim {query.dim} != index dim {self.dim}")
        scored = [
            (-cosine(entry.vector, query), entry.chunk_id, entry) for entry in self._entries
        ]
        scored.sort(key=lambda item: (item[0], item[1]))
        return [
            RetrievalHit(chunk_id=entry.chunk_id, retrieval_score=-neg, text=entry.text)
            for neg, _, entry in scored[:k]
        ]

    def save_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self._entries:
                fh.write(
                    json.dumps(
                        {
                            "id": entry.chunk_id,
                            "vector": entry.vector.tolist(),
                            "text": entry.text,
                        },
                        sort_keys=True,
                        ensure_ascii=False,
                    )
                    + "\n"
                )

    @classmethod
    def load_jsonl(cls, path: str | Path, dim: int | None = None) -> "VectorIndex":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(json.loads(line))
        if dim is None:
            if not entries:
                raise ContractError(f"cannot infer dim from empty index file {path}")
            dim = len(entries[0]["vector"])
        index = cls(dim)
        for entry in entries:
            values = np.asarray(entry["vector"], dtype=np.float64)
            empty = not np.any(values)
            index.add(entry["id"], entry["text"], EmbeddingVector(values=values, empty=empty))
        return index


class LexicalReranker:
    """Default offline reranker: fraction of query terms present in the hit."""

    name = "lexical"

    def score(self, query_text: str, hits: list[RetrievalHit]) -> list[float]:
        query_terms = term_set(query_text)
        if not query_terms:
            return [0.0 for _ in hits]
        return [
            len(query_terms & term_set(hit.text)) / len(query_terms) for hit in hits
        ]


class HttpReranker:
    """Adapter for an out-of-process reranker service.

    POSTs ``{"query": ..., "documents": [{"id", "text"}, ...]}`` and expects
    ``{"scores": [floats]}`` aligned with the documents.
    """

    name = "http"

    def __init__(self, url: str, auth_env: str | None = None):
        self.url = url
        self.auth_env = auth_env

    def score(self, query_text: str, hits: list[RetrievalHit]) -> list[float]:
        reply = post_json(
            self.url,
            {
                "query": query_text,
                "documents": [{"id": h.chunk_id, "text": h.text} for h in hits],
            },
            auth_env=self.auth_env,
        )
        scores = reply.get("scores")
        if not isinstance(scores, list) or len(scores) != len(hits):
            raise TransportError("reranker returned misaligned scores")
        return [float(s) for s in scores]


def rerank(query_text: str, hits: list[RetrievalHit], reranker) -> list[RetrievalHit]:
    """Reorder hits by rerank score (desc), ties by retrieval score then id.

    The result is always a permutation of the input. If a remote reranker
    fails in transport, hits come back in retrieval order flagged
    ``rerank_failed``.
    """
    if not hits:
        raise ContractError("rerank requires at least one hit")
    try:
        scores = reranker.score(query_text, hits)
    except TransportError:
        return [replace(hit, rerank_score=None, rerank_failed=True) for hit in hits]
    rescored = [replace(hit, rerank_score=float(score)) for hit, score in zip(hits, scores)]
    rescored.sort(key=lambda h: (-h.rerank_score, -h.retrieval_score, h.chunk_id))
    return rescored
