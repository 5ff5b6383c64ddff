"""Operator surface: ingest a corpus, build the knowledge bases, ask
questions one-shot or in a REPL, and run the ablation evaluation.

Every command takes ``--config`` pointing at a pipeline configuration file
(see docs/file_formats.md). Flags override config values; config values
override built-in defaults. Exit codes: 0 success, 1 operational error
(missing files, corpus violations), 2 empty evaluation dataset, 3 evaluation
with more than half the items invalid.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import judging
from .config import PipelineConfig, load_config
from .corpus import ingest_directory, load_corpus, save_corpus, validate_corpus
from .errors import CapragError, ConfigError, GatewayError, IngestionError
from .graph_store import export_graph, import_graph
from .judging import AblationConfig, LlmJudge, MockJudge, load_dataset, run_ablation
from .pipeline import (
    Engine,
    HeuristicRouter,
    LlmRouter,
    load_templates,
)
from .vector_store import HttpReranker, LexicalReranker, VectorIndex

ROUTES = ("VECTOR", "GRAPH", "HYBRID")


def _echo(message: str) -> None:
    print(message)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _router_for(config: PipelineConfig):
    if config.router_kind == "llm":
        return LlmRouter(config.settings.generation)
    return HeuristicRouter()


def _reranker_for(config: PipelineConfig):
    if config.reranker_kind == "http":
        return HttpReranker(config.reranker_url, config.reranker_auth_env)
    return LexicalReranker()


def _judge_for(config: PipelineConfig):
    if config.judge_kind == "llm":
        return LlmJudge(config.settings.generation)
    return MockJudge()


def _dump_record(record) -> str:
    return json.dumps(record.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)


def cmd_ingest(config: PipelineConfig) -> int:
    try:
        corpus = ingest_directory(config.source_dir)
    except FileNotFoundError as exc:
        return _fail(f"unreadable source: {exc}")
    except IngestionError as exc:
        return _fail(str(exc))
    violations = validate_corpus(corpus)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    config.corpus_file.parent.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, config.corpus_file)
    _echo(f"corpus written to {config.corpus_file}")
    _echo(
        f"documents={len(corpus.documents)} sections={len(corpus.sections)} "
        f"blocks={len(corpus.chunks)} tables={len(corpus.tables)}"
    )
    if violations:
        for violation in violations:
            _echo(f"violation: {violation}")
        return 1
    _echo("validation: ok")
    return 0


def cmd_build(config: PipelineConfig) -> int:
    if not config.corpus_file.exists():
        return _fail(f"corpus file missing: {config.corpus_file} (run `caprag ingest` first)")
    corpus = load_corpus(config.corpus_file)
    violations = validate_corpus(corpus)
    if violations:
        return _fail(f"corpus invalid: {violations[0]} (+{len(violations) - 1} more)")

    if config.index_path.exists():
        try:
            existing = VectorIndex.load_jsonl(config.index_path)
            if existing.dim != config.settings.embedder.dim:
                return _fail(
                    f"existing index dim {existing.dim} != configured dim "
                    f"{config.settings.embedder.dim}; remove {config.index_path} to rebuild"
                )
        except CapragError:
            pass  # empty or unreadable index is overwritten

    templates = load_templates(config.templates_path)
    engine = Engine.from_corpus(
        corpus, config.settings, templates, expansion_dict=config.load_expansion_dict()
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    engine.index.save_jsonl(config.index_path)
    export_graph(engine.graph, config.graph_path)

    retrieval = engine.retrieval_corpus
    manifest = {
        "config_hash": config.config_hash(),
        "counts": {
            "documents": len(retrieval.documents),
            "sections": len(retrieval.sections),
            "chunks": len(retrieval.chunks),
            "tables": len(retrieval.tables),
            "persons": len(engine.gazetteer.persons),
            "products": len(engine.gazetteer.products),
            "locations": len(engine.gazetteer.locations),
            "index_entries": len(engine.index),
            "graph_nodes": len(engine.graph.nodes),
            "graph_edges": len(engine.graph.edges),
        },
    }
    config.manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _echo(f"vector index: {config.index_path} ({len(engine.index)} entries)")
    _echo(f"graph export: {config.graph_path} ({len(engine.graph.nodes)} nodes)")
    _echo(f"manifest: {config.manifest_path}")
    if len(engine.index) == 0:
        _echo("warning: corpus produced an empty index")
    return 0


def _load_engine(config: PipelineConfig) -> Engine:
    missing = [p for p in (config.index_path, config.graph_path) if not p.exists()]
    if missing:
        raise ConfigError(
            f"knowledge base artifacts missing: {', '.join(str(p) for p in missing)} "
            "(run `caprag build` first)"
        )
    index = VectorIndex.load_jsonl(config.index_path, dim=config.settings.embedder.dim)
    graph = import_graph(config.graph_path)
    templates = load_templates(config.templates_path)
    return Engine(
        index=index,
        graph=graph,
        templates=templates,
        settings=config.settings,
        expansion_dict=config.load_expansion_dict(),
        router=_router_for(config),
        reranker=_reranker_for(config),
    )


def cmd_query(config: PipelineConfig, question: str, route_override: str | None, as_json: bool) -> int:
    try:
        engine = _load_engine(config)
    except ConfigError as exc:
        return _fail(str(exc))
    record = engine.answer(question, route_override=route_override)
    if as_json:
        _echo(_dump_record(record))
    else:
        _echo(record.answer)
        _echo(f"[route: {record.route.route}; provenance: {', '.join(record.provenance) or '-'}]")
    return 0


def cmd_chat(config: PipelineConfig, transcript_path: str | None) -> int:
    try:
        engine = _load_engine(config)
    except ConfigError as exc:
        return _fail(str(exc))
    config.output_dir.mkdir(parents=True, exist_ok=True)
    transcript = Path(transcript_path) if transcript_path else config.output_dir / "chat_transcript.jsonl"
    _echo("caprag chat - :quit exits, :route and :provenance inspect the last answer")
    _echo("(each turn is answered independently; there is no cross-turn memory)")
    last = None
    with open(transcript, "a", encoding="utf-8") as log:
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            if line == ":quit":
                break
            if line == ":route":
                _echo(last.route.route if last else "no answer yet")
                continue
            if line == ":provenance":
                _echo(", ".join(last.provenance) if last and last.provenance else "no answer yet")
                continue
            try:
                last = engine.answer(line)
            except (GatewayError, CapragError) as exc:
                _echo(f"error: {exc}")
                continue
            _echo(last.answer)
            log.write(json.dumps(last.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
    _echo(f"transcript: {transcript}")
    return 0


def cmd_eval(config: PipelineConfig, dataset_path: str) -> int:
    path = Path(dataset_path)
    if not path.exists():
        return _fail(f"dataset not found: {path}")
    if not config.corpus_file.exists():
        return _fail(f"corpus file missing: {config.corpus_file} (run `caprag ingest` first)")
    dataset = load_dataset(path)
    corpus = load_corpus(config.corpus_file)
    templates = load_templates(config.templates_path)
    report = run_ablation(
        dataset,
        AblationConfig.canonical(),
        corpus,
        config.settings,
        templates,
        _judge_for(config),
        expansion_dict=config.load_expansion_dict(),
    )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    json_path = config.output_dir / "ablation_report.json"
    text_path = config.output_dir / "ablation_report.txt"
    json_path.write_text(
        json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    table = judging.render_report_table(report)
    text_path.write_text(table, encoding="utf-8")
    _echo(table)
    _echo(f"reports: {json_path}, {text_path}")
    if not dataset:
        return 2
    total_valid = sum(row["n_valid"] for row in report["rows"])
    total_invalid = sum(row["n_invalid"] for row in report["rows"])
    if total_invalid + total_valid > 0 and total_invalid / (total_invalid + total_valid) > 0.5:
        return 3
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caprag",
        description="Hybrid vector + graph retrieval engine over a document corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", required=True, help="pipeline configuration file (JSON)")

    p_ingest = sub.add_parser("ingest", help="parse corpus sources into the canonical corpus file")
    add_config(p_ingest)

    p_build = sub.add_parser("build", help="build the vector index and graph export")
    add_config(p_build)

    p_query = sub.add_parser("query", help="answer one question")
    add_config(p_query)
    p_query.add_argument("question")
    p_query.add_argument("--route-override", choices=ROUTES, default=None)
    p_query.add_argument("--json", action="store_true", help="emit the full answer record as JSON")

    p_chat = sub.add_parser("chat", help="interactive question loop on stdin")
    add_config(p_chat)
    p_chat.add_argument("--transcript", default=None, help="transcript file (JSON lines)")

    p_eval = sub.add_parser("eval", help="run the ablation evaluation over a dataset")
    add_config(p_eval)
    p_eval.add_argument("--dataset", required=True, help="JSON-lines evaluation dataset")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc))
    try:
        if args.command == "ingest":
            return cmd_ingest(config)
        if args.command == "build":
            return cmd_build(config)
        if args.command == "query":
            return cmd_query(config, args.question, args.route_override, args.json)
        if args.command == "chat":
            return cmd_chat(config, args.transcript)
        if args.command == "eval":
            return cmd_eval(config, args.dataset)
    except CapragError as exc:
        return _fail(str(exc))
    return _fail(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
