"""The whole engine end to end: expand -> route -> retrieve/query -> generate.

Everything runs offline: hashed bag-of-words embeddings, the heuristic
router, and the mock gateway that echoes retrieved context.

Run from the repo root:  python demos/05_full_pipeline.py
"""

import json
from pathlib import Path

from caprag import Engine, PipelineSettings, ingest_directory, load_templates
from caprag.gateway import GenerationConfig

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

engine = Engine.from_corpus(
    ingest_directory(FIXTURES / "corpus_src"),
    PipelineSettings(generation=GenerationConfig(retry_backoff_s=0.0), search_k=4),
    load_templates(FIXTURES / "templates.json"),
    expansion_dict=json.loads((FIXTURES / "expansion.json").read_text()),
)

for question in (
    "I am in Ariana and I am wondering what's the nearest bank ATM branch to me?",
    "Who is Maria R. and what is her background at the bank?",
    "What documents do I need to open a savings account?",
    "Who is Jason Q. and what does the report say about net income?",
):
    record = engine.answer(question)
    print(f"\nQ: {question}")
    print(f"   route={record.route.route}  ({record.route.rationale})")
    print(f"   expansions: {record.expansions}")
    if record.graph_template_id:
        print(f"   graph template: {record.graph_template_id} bindings={record.graph_bindings}")
    print(f"   provenance: {record.provenance}")
    print(f"   answer: {record.answer[:140]!r}")
    if record.flags:
        print(f"   flags: {record.flags}")
