from __future__ import annotations

import json
import random

import pytest

from caprag.errors import ContractError
from caprag.gateway import GenerationConfig, MockBackend
from caprag.judging import (
    ABLATION_ROW_LABELS,
    AblationConfig,
    AblationRow,
    JudgeScores,
    LlmJudge,
    MockJudge,
    judge,
    load_dataset,
    render_report_table,
    run_ablation,
    settings_for_row,
)
from caprag.pipeline import PipelineSettings, load_templates

from generators import random_text


def test_scores_range_validated():
    with pytest.raises(ContractError):
        JudgeScores(answer_relevance=1.2, context_relevance=0.0, groundedness=0.0)


def test_mock_answer_equals_context_grounded():
    block = "the fee is 0.300 per withdrawal on the bank network."
    verdict = judge("what is the fee?", [block], block, MockJudge())
    assert verdict.valid
    assert verdict.scores.groundedness == pytest.approx(1.0)


def test_mock_zero_term_answer_relevance():
    verdict = judge("alpha bravo charlie", "some context words", "delta echo foxtrot", MockJudge())
    assert verdict.scores.answer_relevance == 0.0


def test_mock_half_grounded_sentences():
    blocks = ["the fee is three hundred millimes per withdrawal"]
    answer = "The fee is three hundred millimes per withdrawal. Unicorns invented compound interest."
    verdict = judge("fee?", blocks, answer, MockJudge())
    assert verdict.scores.groundedness == pytest.approx(0.5)


def test_mock_judge_pure_function():
    rng = random.Random(4)
    backend = MockJudge()
    for _ in range(25):
        q, c, a = random_text(rng, 1), random_text(rng, 2), random_text(rng, 2)
        first = judge(q, c, a, backend)
        second = judge(q, [c], a, MockJudge())
        assert first.scores.as_dict() == second.scores.as_dict()
        for value in first.scores.as_dict().values():
            assert 0.0 <= value <= 1.0


def test_judge_requires_non_empty_inputs():
    with pytest.raises(ContractError):
        judge("", "ctx", "ans", MockJudge())
    with pytest.raises(ContractError):
        judge("q", ["   "], "ans", MockJudge())


def test_llm_judge_parses_scripted_scores():
    class FixedScore(MockBackend):
        def complete(self, system, user, cfg):
            return '{"score": 0.75}'

    backend = LlmJudge(GenerationConfig(retry_backoff_s=0.0))
    import caprag.gateway as gwmod

    original = gwmod.build_backend
    gwmod.build_backend = lambda cfg: FixedScore()
    try:
        verdict = backend.score("q", ["ctx"], "ans")
    finally:
        gwmod.build_backend = original
    assert verdict.valid
    assert verdict.scores.as_dict() == {
        "answer_relevance": 0.75,
        "context_relevance": 0.75,
        "groundedness": 0.75,
    }


def test_llm_judge_marks_invalid_after_unparseable_replies():
    class Gibberish(MockBackend):
        def complete(self, system, user, cfg):
            return "I refuse to emit JSON"

    backend = LlmJudge(GenerationConfig(retry_backoff_s=0.0))
    import caprag.gateway as gwmod

    original = gwmod.build_backend
    gwmod.build_backend = lambda cfg: Gibberish()
    try:
        verdict = backend.score("q", ["ctx"], "ans")
    finally:
        gwmod.build_backend = original
    assert not verdict.valid
    assert "no parseable" in verdict.invalid_reason


def test_llm_judge_clamps_out_of_range():
    assert LlmJudge._parse_score('{"score": 1.7}') == 1.0
    assert LlmJudge._parse_score('{"score": -2}') == 0.0
    assert LlmJudge._parse_score('noise {"score": 0.5} noise') == 0.5
    assert LlmJudge._parse_score("nothing here") is None


# --- dataset --------------------------------------------------------------------


def test_load_dataset_fixture(fixtures_dir):
    items = load_dataset(fixtures_dir / "eval_dataset.jsonl")
    assert len(items) == 20
    assert len({i.question for i in items}) == 20


def test_load_dataset_rejects_duplicates(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"question": "q"}\n{"question": "q"}\n')
    with pytest.raises(ContractError):
        load_dataset(path)


def test_load_dataset_rejects_empty_question(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"question": "  "}\n')
    with pytest.raises(ContractError):
        load_dataset(path)


# --- ablation --------------------------------------------------------------------


def test_canonical_rows_cumulative():
    config = AblationConfig.canonical()
    assert [row.label for row in config.rows] == list(ABLATION_ROW_LABELS)
    for earlier, later in zip(config.rows, config.rows[1:]):
        assert later.features >= earlier.features


def test_non_cumulative_rows_rejected():
    with pytest.raises(ContractError):
        AblationConfig(
            rows=[
                AblationRow("a", frozenset({"rerank"})),
                AblationRow("b", frozenset()),
            ]
        )


def test_settings_for_row_feature_mapping():
    base = PipelineSettings()
    rows = AblationConfig.canonical().rows
    baseline = settings_for_row(base, rows[0])
    assert baseline.chunking.mode == "fixed"
    assert not baseline.rerank_enabled and not baseline.expansion_enabled
    full = settings_for_row(base, rows[3])
    assert full.chunking.mode == "semantic"
    assert full.rerank_enabled and full.expansion_enabled


@pytest.fixture(scope="module")
def ablation_inputs(fixture_corpus, fixtures_dir):
    templates = load_templates(fixtures_dir / "templates.json")
    expansion = json.loads((fixtures_dir / "expansion.json").read_text())
    settings = PipelineSettings(generation=GenerationConfig(retry_backoff_s=0.0), search_k=4)
    return fixture_corpus, settings, templates, expansion


def test_run_ablation_singleton_deterministic(ablation_inputs):
    corpus, settings, templates, expansion = ablation_inputs
    from caprag.judging import EvalItem

    items = [EvalItem(question="What does the GoldSecure card offer?")]
    reports = [
        run_ablation(items, AblationConfig.canonical(), corpus, settings, templates, MockJudge(), expansion)
        for _ in range(2)
    ]
    assert json.dumps(reports[0], sort_keys=True) == json.dumps(reports[1], sort_keys=True)
    assert len(reports[0]["rows"]) == 4
    for row in reports[0]["rows"]:
        assert set(row["means"]) == {"answer_relevance", "context_relevance", "groundedness"}


def test_graph_routed_rows_unaffected_by_chunking(ablation_inputs):
    """Spatial-only dataset: the chunking row equals the baseline row, because
    chunking cannot change template-answered graph queries."""
    corpus, settings, templates, expansion = ablation_inputs
    from caprag.judging import EvalItem

    items = [
        EvalItem(question="I am in Ariana and I am wondering what's the nearest bank ATM branch to me?"),
        EvalItem(question="Which ATM is closest to the La Marsa ATM?"),
    ]
    report = run_ablation(
        items, AblationConfig.canonical(), corpus, settings, templates, MockJudge(), expansion
    )
    baseline, chunking = report["rows"][0], report["rows"][1]
    for item in report["rows"][0]["items"]:
        assert item["route"] == "GRAPH"
    assert baseline["means"] == chunking["means"]
    assert [i["answer"] for i in baseline["items"]] == [i["answer"] for i in chunking["items"]]


def test_empty_dataset_report(ablation_inputs):
    corpus, settings, templates, expansion = ablation_inputs
    report = run_ablation(
        [], AblationConfig.canonical(), corpus, settings, templates, MockJudge(), expansion
    )
    assert report["n_items"] == 0
    for row in report["rows"]:
        assert row["means"] is None
        assert row["n_valid"] == 0


def test_means_within_item_score_range(ablation_inputs, fixtures_dir):
    corpus, settings, templates, expansion = ablation_inputs
    dataset = load_dataset(fixtures_dir / "eval_dataset.jsonl")[:6]
    report = run_ablation(
        dataset, AblationConfig.canonical(), corpus, settings, templates, MockJudge(), expansion
    )
    for row in report["rows"]:
        for metric, mean in row["means"].items():
            values = [i["scores"][metric] for i in row["items"] if "scores" in i]
            assert min(values) <= mean <= max(values)
            assert 0.0 <= mean <= 1.0


def test_render_report_table_layout(ablation_inputs):
    corpus, settings, templates, expansion = ablation_inputs
    from caprag.judging import EvalItem

    report = run_ablation(
        [EvalItem(question="What does the GoldSecure card offer?")],
        AblationConfig.canonical(),
        corpus,
        settings,
        templates,
        MockJudge(),
        expansion,
    )
    table = render_report_table(report)
    lines = table.splitlines()
    assert lines[0].startswith("Technique")
    for label in ABLATION_ROW_LABELS:
        assert any(line.startswith(label) for line in lines)
    assert "non-reproducible" in table
    assert "~0.75" in table and "~0.55" in table and ">0.8" in table
