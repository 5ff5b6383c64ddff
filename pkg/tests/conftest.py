from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
REPO_ROOT = TESTS_DIR.parent
FIXTURES = REPO_ROOT / "fixtures"

sys.path.insert(0, str(TESTS_DIR))

from caprag.corpus import (  # noqa: E402
    ChunkRecord,
    Corpus,
    CorpusDocument,
    Section,
    TableRecord,
    ingest_directory,
)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    return ingest_directory(FIXTURES / "corpus_src")


def three_chunk_corpus() -> Corpus:
    """1 document, 2 depth-1 sections, 3 chunks with seqs 0,1,2."""
    return Corpus(
        documents=[CorpusDocument(doc_id="d", title="Doc", source_path="d.txt")],
        sections=[
            Section("d:sec:0", "d", None, "Alpha", 1, 0),
            Section("d:sec:1", "d", None, "Beta", 1, 1),
        ],
        chunks=[
            ChunkRecord("d:chunk:0", "d:sec:0", "d", "first chunk text", 0),
            ChunkRecord("d:chunk:1", "d:sec:0", "d", "second chunk text", 1),
            ChunkRecord("d:chunk:2", "d:sec:1", "d", "third chunk text", 2),
        ],
    )


def chunk_table_chunk_corpus() -> Corpus:
    """1 section, chunk-table-chunk at seqs 0,1,2."""
    return Corpus(
        documents=[CorpusDocument(doc_id="d", title="Doc", source_path="d.txt")],
        sections=[Section("d:sec:0", "d", None, "Alpha", 1, 0)],
        chunks=[
            ChunkRecord("d:chunk:0", "d:sec:0", "d", "before the table", 0),
            ChunkRecord("d:chunk:2", "d:sec:0", "d", "after the table", 2),
        ],
        tables=[
            TableRecord(
                "d:table:1", "d:sec:0", "d", 1, header=["a", "b"], rows=[["1", "2"]]
            )
        ],
    )
