"""Score answers with the mock judge and reproduce the cumulative ablation.

Run from the repo root:  python demos/06_evaluation_ablation.py
"""

import json
from pathlib import Path

from caprag import PipelineSettings, ingest_directory, load_templates
from caprag.gateway import GenerationConfig
from caprag.judging import (
    AblationConfig,
    MockJudge,
    judge,
    load_dataset,
    render_report_table,
    run_ablation,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

print("judging one hand-made triple with the mock judge:")
verdict = judge(
    "What is the withdrawal fee?",
    ["ATM withdrawal costs 0.300 on the bank network."],
    "The withdrawal fee is 0.300 on the bank network. Gold prices may vary.",
    MockJudge(),
)
for metric, value in verdict.scores.as_dict().items():
    print(f"  {metric}: {value:.3f}")

print("\nrunning the cumulative ablation over the fixture dataset:")
report = run_ablation(
    load_dataset(FIXTURES / "eval_dataset.jsonl"),
    AblationConfig.canonical(),
    ingest_directory(FIXTURES / "corpus_src"),
    PipelineSettings(generation=GenerationConfig(retry_backoff_s=0.0), search_k=4),
    load_templates(FIXTURES / "templates.json"),
    MockJudge(),
    expansion_dict=json.loads((FIXTURES / "expansion.json").read_text()),
)
print()
print(render_report_table(report))
