"""Build the vector store over the fixture corpus, search it, re-rank the hits.

Run from the repo root:  python demos/03_vector_search_and_rerank.py
"""

from pathlib import Path

from caprag import ChunkingConfig, VectorIndex, ingest_directory
from caprag.chunking import rechunk_corpus
from caprag.embedding import EmbedderSpec, make_embedder
from caprag.vector_store import LexicalReranker, rerank

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

embed = make_embedder(EmbedderSpec())
corpus = rechunk_corpus(
    ingest_directory(FIXTURES / "corpus_src"),
    ChunkingConfig(mode="semantic", max_chunk_tokens=120),
    embed,
)

index = VectorIndex(256)
for chunk in corpus.chunks:
    index.add(chunk.chunk_id, chunk.text, embed(chunk.text))
print(f"indexed {len(index)} chunks")

query = "What is the fee for ATM withdrawal on other networks?"
hits = index.search(embed(query), 4)
print(f"\ntop-4 by cosine for {query!r}:")
for hit in hits:
    print(f"  {hit.retrieval_score:.4f}  {hit.chunk_id:28s} {hit.text[:55]!r}")

print("\nafter lexical re-ranking (query-term coverage):")
for hit in rerank(query, hits, LexicalReranker()):
    print(f"  {hit.rerank_score:.2f}  {hit.chunk_id:28s} {hit.text[:55]!r}")
