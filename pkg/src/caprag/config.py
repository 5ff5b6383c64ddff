"""Pipeline configuration file: JSON, strictly validated.

Unknown keys are rejected so typos fail loudly; relative paths resolve against
the directory containing the config file. Input paths (source directory,
template repository, expansion dictionary, mock script) must exist at load
time; build artifacts are checked by the commands that need them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .chunking import ChunkingConfig
from .embedding import spec_from_dict
from .errors import ConfigError
from .gateway import GenerationConfig
from .pipeline import PipelineSettings

_TOP_KEYS = {
    "corpus",
    "chunking",
    "embedder",
    "reranker",
    "router",
    "templates_path",
    "expansion_path",
    "generation",
    "judge",
    "search_k",
    "template_threshold",
    "context_budget_tokens",
    "expansion_max_variants",
    "record_timings",
    "output_dir",
}
_SECTION_KEYS = {
    "corpus": {"source_dir", "corpus_file"},
    "chunking": {
        "mode",
        "fixed_size",
        "fixed_overlap",
        "semantic_breakpoint_percentile",
        "max_chunk_tokens",
    },
    "embedder": {"kind", "dim", "endpoint_url", "auth_env"},
    "reranker": {"kind", "url", "auth_env"},
    "router": {"kind"},
    "generation": {
        "kind",
        "max_tokens",
        "temperature",
        "url",
        "auth_env",
        "retry_count",
        "retry_backoff_s",
        "mock_script",
        "mock_fallback",
    },
    "judge": {"kind"},
}


@dataclass
class PipelineConfig:
    config_dir: Path
    source_dir: Path
    corpus_file: Path
    output_dir: Path
    templates_path: Path
    expansion_path: Path | None
    reranker_kind: str
    reranker_url: str | None
    reranker_auth_env: str | None
    router_kind: str
    judge_kind: str
    settings: PipelineSettings
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def index_path(self) -> Path:
        return self.output_dir / "vector_index.jsonl"

    @property
    def graph_path(self) -> Path:
        return self.output_dir / "graph.json"

    @property
    def manifest_path(self) -> Path:
        return self.output_dir / "build_manifest.json"

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def load_expansion_dict(self) -> dict[str, str]:
        if self.expansion_path is None:
            return {}
        return json.loads(self.expansion_path.read_text(encoding="utf-8"))


def _reject_unknown(raw: dict, allowed: set[str], where: str) -> None:
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    _reject_unknown(raw, _TOP_KEYS, "config")
    for section, keys in _SECTION_KEYS.items():
        if section in raw:
            if not isinstance(raw[section], dict):
                raise ConfigError(f"config section {section!r} must be an object")
            _reject_unknown(raw[section], keys, section)

    base = path.parent

    def resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else (base / p)

    corpus_section = raw.get("corpus", {})
    if "source_dir" not in corpus_section:
        raise ConfigError("config requires corpus.source_dir")
    source_dir = resolve(corpus_section["source_dir"])
    if not source_dir.exists():
        raise ConfigError(f"corpus.source_dir does not exist: {source_dir}")

    output_dir = resolve(raw.get("output_dir", "out"))
    corpus_file = (
        resolve(corpus_section["corpus_file"])
        if "corpus_file" in corpus_section
        else output_dir / "corpus.json"
    )

    if "templates_path" not in raw:
        raise ConfigError("config requires templates_path")
    templates_path = resolve(raw["templates_path"])
    if not templates_path.exists():
        raise ConfigError(f"templates_path does not exist: {templates_path}")

    expansion_path = None
    if raw.get("expansion_path"):
        expansion_path = resolve(raw["expansion_path"])
        if not expansion_path.exists():
            raise ConfigError(f"expansion_path does not exist: {expansion_path}")

    chunking = ChunkingConfig(**raw.get("chunking", {}))
    embedder = spec_from_dict(raw.get("embedder", {}))

    generation_raw = dict(raw.get("generation", {}))
    mock_script = generation_raw.pop("mock_script", None)
    if mock_script:
        mock_script_path = resolve(mock_script)
        if not mock_script_path.exists():
            raise ConfigError(f"generation.mock_script does not exist: {mock_script_path}")
        generation_raw["mock_script_path"] = str(mock_script_path)
    generation = GenerationConfig(**generation_raw)

    reranker = raw.get("reranker", {"kind": "lexical"})
    reranker_kind = reranker.get("kind", "lexical")
    if reranker_kind not in ("lexical", "http", "none"):
        raise ConfigError(f"unknown reranker kind {reranker_kind!r}")
    if reranker_kind == "http" and not reranker.get("url"):
        raise ConfigError("http reranker requires url")

    router_kind = raw.get("router", {}).get("kind", "heuristic")
    if router_kind not in ("heuristic", "llm"):
        raise ConfigError(f"unknown router kind {router_kind!r}")
    judge_kind = raw.get("judge", {}).get("kind", "mock")
    if judge_kind not in ("mock", "llm"):
        raise ConfigError(f"unknown judge kind {judge_kind!r}")

    settings = PipelineSettings(
        chunking=chunking,
        embedder=embedder,
        generation=generation,
        search_k=int(raw.get("search_k", 5)),
        template_threshold=float(raw.get("template_threshold", 0.35)),
        context_budget_tokens=int(raw.get("context_budget_tokens", 1500)),
        expansion_enabled=True,
        expansion_max_variants=int(raw.get("expansion_max_variants", 3)),
        rerank_enabled=reranker_kind != "none",
        record_timings=bool(raw.get("record_timings", False)),
    )

    return PipelineConfig(
        config_dir=base,
        source_dir=source_dir,
        corpus_file=corpus_file,
        output_dir=output_dir,
        templates_path=templates_path,
        expansion_path=expansion_path,
        reranker_kind=reranker_kind,
        reranker_url=reranker.get("url"),
        reranker_auth_env=reranker.get("auth_env"),
        router_kind=router_kind,
        judge_kind=judge_kind,
        settings=settings,
        raw=raw,
    )
