"""Walk through corpus ingestion: sources -> section tree -> blocks -> JSON.

Run from the repo root:  python demos/01_ingest_and_validate.py
"""

from pathlib import Path

from caprag import ingest_directory, save_corpus, validate_corpus
from caprag.corpus import ChunkRecord

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

corpus = ingest_directory(FIXTURES / "corpus_src")

print(f"documents: {len(corpus.documents)}")
for doc in corpus.documents:
    print(f"  {doc.doc_id:22s} {doc.title!r}  metadata={doc.metadata}")

print("\nsection tree:")
for section in corpus.sections:
    indent = "  " * section.depth
    print(f"{indent}{section.heading}  (depth {section.depth}, id {section.section_id})")

print("\nreading order of the branch directory, with entity annotations:")
for item in corpus.items_in_order("branch-network"):
    if isinstance(item, ChunkRecord):
        entities = [l.name for l in item.locations] + item.persons + item.products
        tag = f"  entities={entities}" if entities else ""
        print(f"  seq {item.seq}: chunk  {item.text[:60]!r}{tag}")
    else:
        print(f"  seq {item.seq}: table  {len(item.rows)} rows, caption={item.caption!r}")

violations = validate_corpus(corpus)
print(f"\nvalidation violations: {violations or 'none'}")

out = Path(__file__).resolve().parent.parent / "out"
out.mkdir(exist_ok=True)
save_corpus(corpus, out / "demo_corpus.json")
print(f"canonical corpus written to {out / 'demo_corpus.json'}")
