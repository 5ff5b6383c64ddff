"""Chunking of raw section blocks into retrieval chunks.

Two modes. Fixed chunking slides a token window of ``fixed_size`` advancing by
``fixed_size - fixed_overlap``. Semantic chunking embeds sentences, computes
the cosine distance of each adjacent pair, and places a breakpoint exactly
where a distance strictly exceeds the configured percentile of all distances
in the text (linear-interpolation percentile); runs between breakpoints are
joined, and any run longer than ``max_chunk_tokens`` is re-split with a
zero-overlap fixed window. Ties never split, so a text of identical sentences
stays one chunk.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .corpus import ChunkRecord, Corpus
from .embedding import EmbeddingVector, cosine
from .errors import ContractError
from .textutil import split_sentences

EmbedFn = Callable[[str], EmbeddingVector]

MODE_FIXED = "fixed"
MODE_SEMANTIC = "semantic"


@dataclass(frozen=True)
class ChunkingConfig:
    mode: str = MODE_SEMANTIC
    fixed_size: int = 200
    fixed_overlap: int = 40
    semantic_breakpoint_percentile: float = 95.0
    max_chunk_tokens: int = 400

    def __post_init__(self):
        if self.mode not in (MODE_FIXED, MODE_SEMANTIC):
            raise ContractError(f"unknown chunking mode {self.mode!r}")
        if self.fixed_size <= 0:
            raise ContractError("fixed_size must be positive")
        if not (0 <= self.fixed_overlap < self.fixed_size):
            raise ContractError("fixed_overlap must be in [0, fixed_size)")
        if not (0.0 < self.semantic_breakpoint_percentile < 100.0):
            raise ContractError("semantic_breakpoint_percentile must be in (0, 100)")
        if self.max_chunk_tokens <= 0:
            raise ContractError("max_chunk_tokens must be positive")


def _windows(tokens: list[str], size: int, overlap: int) -> list[list[str]]:
    if not tokens:
        return []
    stride = size - overlap
    out = []
    start = 0
    while True:
        out.append(tokens[start : start + size])
        if start + size >= len(tokens):
            break
        start += stride
    return out


def chunk_fixed(text: str, cfg: ChunkingConfig) -> list[str]:
    """Fixed-size token windows. Empty text yields no chunks."""
    if cfg.mode != MODE_FIXED:
        raise ContractError("chunk_fixed requires mode 'fixed'")
    return [" ".join(w) for w in _windows(text.split(), cfg.fixed_size, cfg.fixed_overlap)]


def semantic_breakpoints(distances: list[float], percentile: float) -> set[int]:
    """Indices i whose adjacent-pair distance strictly exceeds the percentile threshold."""
    if not distances:
        return set()
    threshold = float(np.percentile(np.asarray(distances, dtype=np.float64), percentile))
    return {i for i, d in enumerate(distances) if d > threshold}


def chunk_semantic(text: str, cfg: ChunkingConfig, embed: EmbedFn) -> list[str]:
    """Percentile-breakpoint semantic chunking.

    Sentences are the unit; the concatenation of the returned chunks equals the
    sentence-normalized text (single spaces between sentences).
    """
    if cfg.mode != MODE_SEMANTIC:
        raise ContractError("chunk_semantic requires mode 'semantic'")
    sentences = split_sentences(text)
    if not sentences:
        return []
    if len(sentences) == 1:
        runs = [sentences]
    else:
        vectors = [embed(s) for s in sentences]
        distances = [1.0 - cosine(vectors[i], vectors[i + 1]) for i in range(len(vectors) - 1)]
        breaks = semantic_breakpoints(distances, cfg.semantic_breakpoint_percentile)
        runs = []
        current = [sentences[0]]
        for i in range(1, len(sentences)):
            if (i - 1) in breaks:
                runs.append(current)
                current = []
            current.append(sentences[i])
        runs.append(current)

    chunks: list[str] = []
    for run in runs:
        joined = " ".join(run)
        toks = joined.split()
        if len(toks) > cfg.max_chunk_tokens:
            chunks.extend(" ".join(w) for w in _windows(toks, cfg.max_chunk_tokens, 0))
        else:
            chunks.append(joined)
    return chunks


def chunk_text(text: str, cfg: ChunkingConfig, embed: EmbedFn) -> list[str]:
    if cfg.mode == MODE_FIXED:
        return chunk_fixed(text, cfg)
    return chunk_semantic(text, cfg, embed)


def rechunk_corpus(corpus: Corpus, cfg: ChunkingConfig, embed: EmbedFn) -> Corpus:
    """Derive the retrieval corpus: split every raw block, renumber the shared
    seq space gaplessly, and keep tables at their relative positions.

    Entity annotations of a block are attached to the first derived chunk whose
    text contains the entity name, falling back to the block's first chunk, so
    graph entity linkage survives re-chunking deterministically.
    """
    new_chunks: list[ChunkRecord] = []
    new_tables = []
    for doc in corpus.documents:
        items = corpus.items_in_order(doc.doc_id)
        seq = 0
        for item in items:
            if isinstance(item, ChunkRecord):
                pieces = chunk_text(item.text, cfg, embed) or [item.text]
                derived = []
                for piece in pieces:
                    derived.append(
                        ChunkRecord(
                            chunk_id=f"{doc.doc_id}:chunk:{seq}",
                            section_id=item.section_id,
                            doc_id=doc.doc_id,
                            text=piece,
                            seq=seq,
                            persons=[],
                            products=[],
                            locations=[],
                        )
                    )
                    seq += 1
                _attach(derived, "persons", item.persons)
                _attach(derived, "products", item.products)
                _attach(derived, "locations", item.locations, key=lambda loc: loc.name)
                new_chunks.extend(derived)
            else:
                new_tables.append(
                    replace(item, table_id=f"{doc.doc_id}:table:{seq}", seq=seq)
                )
                seq += 1
    return Corpus(
        documents=list(corpus.documents),
        sections=list(corpus.sections),
        chunks=new_chunks,
        tables=new_tables,
    )


def _attach(derived: list[ChunkRecord], field: str, entities, key=lambda e: e) -> None:
    for entity in entities:
        target = derived[0]
        for chunk in derived:
            if key(entity) in chunk.text:
                target = chunk
                break
        getattr(target, field).append(entity)
