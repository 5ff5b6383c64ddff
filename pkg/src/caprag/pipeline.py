"""The engine front end: query expansion, routing, Cypher-template selection,
hybrid context assembly, and answer generation.

A query is expanded, routed to the vector store and/or the graph, and the
retrieved material is assembled into a token-budgeted context (graph rows
first: they are exact facts). The graph leg never free-forms Cypher by
default; it picks the best-matching template from a curated repository by
embedding similarity of the template descriptions and fills its slots from a
corpus gazetteer, mirroring the curated-over-generated design of the rest of
the pipeline.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import gateway as gw
from .chunking import ChunkingConfig, rechunk_corpus
from .corpus import Corpus, validate_corpus
from .cypher import CypherQuery, ResultTable, execute, parse_cypher
from .cypher.ast import FuncCall, Param
from .embedding import EmbedderSpec, cosine, make_embedder
from .errors import CapragError, ContractError, GatewayError
from .graph_store import PropertyGraph, build_graph
from .textutil import count_tokens
from .vector_store import LexicalReranker, RetrievalHit, VectorIndex, rerank

ROUTE_VECTOR = "VECTOR"
ROUTE_GRAPH = "GRAPH"
ROUTE_HYBRID = "HYBRID"

NO_INFORMATION_ANSWER = "no information found"
GENERATION_FAILED_ANSWER = "generation failed"

SYSTEM_PROMPT_VERSION = "v1"
SYSTEM_PROMPT = (
    "You are a careful banking assistant. Answer the customer's question "
    "using only the provided context. If the context does not contain the "
    "answer, say that you do not have that information."
)

# Cue lexicon for the deterministic router. Relational cues send a query to
# the graph; a query that also carries content cues needs both stores.
RELATIONAL_CUES = ("nearest", "closest", "where is", "who is", "career", "background of")
CONTENT_CUES = ("explain", "report", "service", "fee")

SLOT_KINDS = ("PERSON", "PRODUCT", "LOCATION_NAME", "COORD_LON", "COORD_LAT", "FREE_TEXT")

# Decimal coordinate pairs in queries read as "<latitude>, <longitude>" (GPS order).
_COORD_PAIR_RE = re.compile(r"(-?\d{1,3}\.\d+)\s*,\s*(-?\d{1,3}\.\d+)")


@dataclass
class RoutePlan:
    route: str
    vector_subquery: str | None = None
    graph_subquery: str | None = None
    rationale: str = ""

    def __post_init__(self):
        if self.route not in (ROUTE_VECTOR, ROUTE_GRAPH, ROUTE_HYBRID):
            raise ContractError(f"unknown route {self.route!r}")
        if self.route in (ROUTE_VECTOR, ROUTE_HYBRID) and not self.vector_subquery:
            raise ContractError(f"{self.route} route requires vector_subquery")
        if self.route in (ROUTE_GRAPH, ROUTE_HYBRID) and not self.graph_subquery:
            raise ContractError(f"{self.route} route requires graph_subquery")


@dataclass
class ExpansionResult:
    queries: list[str]
    fallback: bool = False


class CuratedExpander:
    """Synonym/phrase substitutions from a dictionary; deterministic.

    The original query always comes first and is always retained; each
    applicable dictionary entry contributes one variant (all occurrences
    substituted), longest key first, up to ``max_variants`` total.
    """

    def __init__(self, synonyms: dict[str, str] | None = None, max_variants: int = 3):
        if max_variants < 1:
            raise ContractError("max_variants must be >= 1")
        self.synonyms = dict(synonyms or {})
        self.max_variants = max_variants

    def expand(self, query: str) -> ExpansionResult:
        variants = [query]
        for key in sorted(self.synonyms, key=lambda k: (-len(k), k)):
            if len(variants) >= self.max_variants:
                break
            pattern = re.compile(r"\b" + re.escape(key) + r"\b", re.IGNORECASE)
            if pattern.search(query):
                variant = pattern.sub(self.synonyms[key], query)
                if variant != query and variant not in variants:
                    variants.append(variant)
        return ExpansionResult(queries=variants)


class LlmExpander:
    """Paraphrase expansion through the chat gateway, curated fallback on failure."""

    def __init__(self, generation: gw.GenerationConfig, curated: CuratedExpander, max_variants: int = 3):
        self.generation = generation
        self.curated = curated
        self.max_variants = max_variants

    def expand(self, query: str) -> ExpansionResult:
        prompt = (
            f"Rewrite the following question {self.max_variants - 1} different ways, "
            f"one per line, preserving its meaning exactly.\n\nQuestion: {query}"
        )
        try:
            exchange = gw.complete("You paraphrase questions.", prompt, self.generation)
        except (GatewayError, CapragError):
            result = self.curated.expand(query)
            return ExpansionResult(queries=result.queries, fallback=True)
        variants = [query]
        for line in exchange.response.splitlines():
            line = line.strip()
            if line and line not in variants and len(variants) < self.max_variants:
                variants.append(line)
        return ExpansionResult(queries=variants)


def expand_query(query: str, expander) -> list[str]:
    if not query.strip():
        raise ContractError("query must be non-empty")
    return expander.expand(query).queries


@dataclass
class RouteResult:
    plan: RoutePlan
    fallback: bool = False


class HeuristicRouter:
    """Pure function of the query string over a word-boundary cue lexicon."""

    def __init__(self, relational_cues=RELATIONAL_CUES, content_cues=CONTENT_CUES):
        self.relational = tuple(relational_cues)
        self.content = tuple(content_cues)

    def _matches(self, cues, query: str) -> list[str]:
        found = []
        for cue in cues:
            if re.search(r"\b" + re.escape(cue) + r"\b", query, re.IGNORECASE):
                found.append(cue)
        return found

    def route(self, query: str) -> RouteResult:
        relational = self._matches(self.relational, query)
        content = self._matches(self.content, query)
        if relational and content:
            plan = RoutePlan(
                route=ROUTE_HYBRID,
                vector_subquery=query,
                graph_subquery=query,
                rationale=f"relational cues {relational} and content cues {content}",
            )
        elif relational:
            plan = RoutePlan(
                route=ROUTE_GRAPH,
                graph_subquery=query,
                rationale=f"relational cues {relational}",
            )
        else:
            plan = RoutePlan(
                route=ROUTE_VECTOR,
                vector_subquery=query,
                rationale="no relational cue matched",
            )
        return RouteResult(plan=plan)


class LlmRouter:
    """Asks the gateway for a strict-JSON route verdict; falls back to the
    heuristic router when the reply does not parse."""

    def __init__(self, generation: gw.GenerationConfig, heuristic: HeuristicRouter | None = None):
        self.generation = generation
        self.heuristic = heuristic or HeuristicRouter()

    def route(self, query: str) -> RouteResult:
        prompt = (
            "Decide how to answer the question: with semantic document search "
            "(VECTOR), with a knowledge-graph query (GRAPH), or both (HYBRID). "
            'Reply with strict JSON only: {"route": "VECTOR|GRAPH|HYBRID", '
            '"vector_subquery": "...", "graph_subquery": "..."}\n\n'
            f"Question: {query}"
        )
        try:
            exchange = gw.complete("You are a query router.", prompt, self.generation)
            verdict = json.loads(exchange.response)
            route = verdict["route"]
            plan = RoutePlan(
                route=route,
                vector_subquery=verdict.get("vector_subquery")
                or (query if route in (ROUTE_VECTOR, ROUTE_HYBRID) else None),
                graph_subquery=verdict.get("graph_subquery")
                or (query if route in (ROUTE_GRAPH, ROUTE_HYBRID) else None),
                rationale="llm router verdict",
            )
            return RouteResult(plan=plan)
        except (CapragError, json.JSONDecodeError, KeyError, TypeError):
            result = self.heuristic.route(query)
            return RouteResult(plan=result.plan, fallback=True)


def route(query: str, router) -> RoutePlan:
    if not query.strip():
        raise ContractError("query must be non-empty")
    return router.route(query).plan


# --- Cypher template repository ---------------------------------------------


@dataclass
class CypherTemplate:
    template_id: str
    description: str
    cypher_text: str
    slots: dict[str, str]
    ast: CypherQuery | None = None

    def __post_init__(self):
        for name, kind in self.slots.items():
            if kind not in SLOT_KINDS:
                raise ContractError(f"template {self.template_id}: unknown slot kind {kind!r}")


def _ast_params(query: CypherQuery) -> set[str]:
    params: set[str] = set()

    def walk_value(expr):
        if isinstance(expr, Param):
            params.add(expr.name)
        elif isinstance(expr, FuncCall):
            for arg in expr.args:
                walk_value(arg)

    def walk_bool(expr):
        from .cypher.ast import BoolOp, Comparison, NotExpr

        if isinstance(expr, Comparison):
            walk_value(expr.left)
            walk_value(expr.right)
        elif isinstance(expr, BoolOp):
            walk_bool(expr.left)
            walk_bool(expr.right)
        elif isinstance(expr, NotExpr):
            walk_bool(expr.operand)

    for pattern in query.patterns:
        for node in pattern.nodes:
            for _, value in node.props:
                walk_value(value)
    if query.where is not None:
        walk_bool(query.where)
    for item in query.return_items:
        walk_value(item.expr)
    if query.order_by is not None:
        walk_value(query.order_by.expr)
    return params


def validate_template(template: CypherTemplate) -> CypherTemplate:
    """Fail fast: the template must parse and its slots must exactly cover its
    parameters."""
    ast = parse_cypher(template.cypher_text)
    params = _ast_params(ast)
    declared = set(template.slots)
    missing = params - declared
    if missing:
        raise ContractError(
            f"template {template.template_id}: parameters without slot specs: {sorted(missing)}"
        )
    unused = declared - params
    if unused:
        raise ContractError(
            f"template {template.template_id}: slot specs never used: {sorted(unused)}"
        )
    template.ast = ast
    return template


def load_templates(path: str | Path) -> list[CypherTemplate]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    templates = []
    seen = set()
    for entry in raw:
        template = CypherTemplate(
            template_id=entry["template_id"],
            description=entry["description"],
            cypher_text=entry["cypher"],
            slots=dict(entry.get("slots", {})),
        )
        if template.template_id in seen:
            raise ContractError(f"duplicate template_id {template.template_id!r}")
        seen.add(template.template_id)
        templates.append(validate_template(template))
    return templates


# --- gazetteer ---------------------------------------------------------------


@dataclass
class Gazetteer:
    persons: list[str] = field(default_factory=list)
    products: list[str] = field(default_factory=list)
    locations: list[tuple[str, float, float, str]] = field(default_factory=list)

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "Gazetteer":
        items = list(corpus.chunks) + list(corpus.tables)
        return cls(
            persons=sorted({p for item in items for p in item.persons}),
            products=sorted({p for item in items for p in item.products}),
            locations=sorted(
                {(l.name, l.longitude, l.latitude, l.kind) for item in items for l in item.locations}
            ),
        )

    @classmethod
    def from_graph(cls, graph: PropertyGraph) -> "Gazetteer":
        def names(label: str) -> list[str]:
            return sorted(
                str(graph.nodes[nid].properties.get("name", "")) for nid in graph.nodes_with_label(label)
            )

        locations = sorted(
            (
                str(node.properties["name"]),
                float(node.properties["longitude"]),
                float(node.properties["latitude"]),
                str(node.properties.get("kind", "OTHER")),
            )
            for node in (graph.nodes[nid] for nid in graph.nodes_with_label("Location"))
        )
        return cls(persons=names("Person"), products=names("Product"), locations=locations)

    @staticmethod
    def _longest_match(names, query: str) -> str | None:
        lowered = query.lower()
        found = [n for n in names if n.lower() in lowered]
        if not found:
            return None
        return min(found, key=lambda n: (-len(n), n))

    def find_person(self, query: str) -> str | None:
        return self._longest_match(self.persons, query)

    def find_product(self, query: str) -> str | None:
        return self._longest_match(self.products, query)

    def find_location(self, query: str) -> tuple[str, float, float, str] | None:
        name = self._longest_match([l[0] for l in self.locations], query)
        if name is None:
            return None
        for entry in self.locations:
            if entry[0] == name:
                return entry
        return None


@dataclass
class TemplateChoice:
    template: CypherTemplate
    bindings: dict
    score: float


def _query_coords(query: str, gazetteer: Gazetteer) -> tuple[float, float] | None:
    """(longitude, latitude) from a decimal pair in the query, else from a
    named location's stored coordinates."""
    pair = _COORD_PAIR_RE.search(query)
    if pair:
        lat, lon = float(pair.group(1)), float(pair.group(2))
        return lon, lat
    location = gazetteer.find_location(query)
    if location:
        return location[1], location[2]
    return None


def select_template(
    query: str,
    repo: list[CypherTemplate],
    embed_fn,
    gazetteer: Gazetteer,
    threshold: float = 0.35,
) -> tuple[TemplateChoice | None, str]:
    """Best description match at or above the similarity threshold, slots filled.

    Returns (choice, reason); the reason explains a None choice.
    """
    if not repo:
        raise ContractError("template repository is empty")
    query_vec = embed_fn(query)
    scored = sorted(
        ((cosine(query_vec, embed_fn(t.description)), t) for t in repo),
        key=lambda pair: (-pair[0], pair[1].template_id),
    )
    best_score, best = scored[0]
    if best_score < threshold:
        return None, (
            f"below threshold: best template {best.template_id!r} scored "
            f"{best_score:.4f} < {threshold}"
        )
    bindings: dict = {}
    coords: tuple[float, float] | None = None
    for slot, kind in sorted(best.slots.items()):
        if kind == "PERSON":
            value = gazetteer.find_person(query)
            if value is None:
                return None, f"slot {slot} (PERSON) unfillable: no known person in query"
            bindings[slot] = value
        elif kind == "PRODUCT":
            value = gazetteer.find_product(query)
            if value is None:
                return None, f"slot {slot} (PRODUCT) unfillable: no known product in query"
            bindings[slot] = value
        elif kind == "LOCATION_NAME":
            location = gazetteer.find_location(query)
            if location is None:
                return None, f"slot {slot} (LOCATION_NAME) unfillable: no known location in query"
            bindings[slot] = location[0]
        elif kind in ("COORD_LON", "COORD_LAT"):
            if coords is None:
                coords = _query_coords(query, gazetteer)
            if coords is None:
                return None, (
                    f"slot {slot} ({kind}) unfillable: no coordinates or known location in query"
                )
            bindings[slot] = coords[0] if kind == "COORD_LON" else coords[1]
        else:  # FREE_TEXT
            bindings[slot] = query
    return TemplateChoice(template=best, bindings=bindings, score=best_score), ""


# --- context assembly --------------------------------------------------------


@dataclass
class ContextBlock:
    provenance: str
    text: str
    tokens: int


@dataclass
class AssembledContext:
    blocks: list[ContextBlock]
    total_tokens: int
    overflow: bool = False


def _format_cell(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        text = f"{value:.6f}".rstrip("0").rstrip(".")
        return text or "0"
    return str(value)


def render_graph_rows(template_id: str, table: ResultTable) -> list[ContextBlock]:
    blocks = []
    for idx, row in enumerate(table.rows):
        text = "; ".join(
            f"{col}={_format_cell(cell)}" for col, cell in zip(table.columns, row)
        )
        blocks.append(
            ContextBlock(provenance=f"{template_id}#{idx}", text=text, tokens=count_tokens(text))
        )
    return blocks


def assemble_context(
    vector_hits: list[RetrievalHit],
    graph_blocks: list[ContextBlock],
    budget_tokens: int,
) -> AssembledContext:
    """Graph rows first, then vector hits in rerank order; whole blocks only.

    Assembly stops at the first block that would exceed the budget and flags
    the overflow. Blocks with an already-seen provenance tag are dropped.
    """
    candidates = list(graph_blocks)
    candidates.extend(
        ContextBlock(provenance=hit.chunk_id, text=hit.text, tokens=count_tokens(hit.text))
        for hit in vector_hits
    )
    seen: set[str] = set()
    blocks: list[ContextBlock] = []
    total = 0
    overflow = False
    for block in candidates:
        if block.provenance in seen:
            continue
        if total + block.tokens > budget_tokens:
            overflow = True
            break
        seen.add(block.provenance)
        blocks.append(block)
        total += block.tokens
    return AssembledContext(blocks=blocks, total_tokens=total, overflow=overflow)


# --- engine -------------------------------------------------------------------


@dataclass
class PipelineSettings:
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    embedder: EmbedderSpec = field(default_factory=EmbedderSpec)
    generation: gw.GenerationConfig = field(default_factory=gw.GenerationConfig)
    search_k: int = 5
    template_threshold: float = 0.35
    context_budget_tokens: int = 1500
    expansion_enabled: bool = True
    expansion_max_variants: int = 3
    rerank_enabled: bool = True
    record_timings: bool = False


@dataclass
class AnswerRecord:
    question: str
    answer: str
    route: RoutePlan
    expansions: list[str]
    vector_hits: list[RetrievalHit]
    graph_template_id: str | None
    graph_bindings: dict
    graph_columns: list[str]
    graph_rows: list[tuple]
    context: AssembledContext
    prompt_system: str | None
    prompt_user: str | None
    generation_backend: str | None
    flags: list[str]
    timings: dict[str, float]
    answered_from_context: bool

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "answer": self.answer,
            "route": {
                "route": self.route.route,
                "vector_subquery": self.route.vector_subquery,
                "graph_subquery": self.route.graph_subquery,
                "rationale": self.route.rationale,
            },
            "expansions": list(self.expansions),
            "vector_hits": [
                {
                    "chunk_id": h.chunk_id,
                    "retrieval_score": h.retrieval_score,
                    "rerank_score": h.rerank_score,
                    "rerank_failed": h.rerank_failed,
                    "text": h.text,
                }
                for h in self.vector_hits
            ],
            "graph": {
                "template_id": self.graph_template_id,
                "bindings": self.graph_bindings,
                "columns": list(self.graph_columns),
                "rows": [list(row) for row in self.graph_rows],
            },
            "context": {
                "blocks": [
                    {"provenance": b.provenance, "text": b.text, "tokens": b.tokens}
                    for b in self.context.blocks
                ],
                "total_tokens": self.context.total_tokens,
                "overflow": self.context.overflow,
            },
            "prompt": (
                {"system": self.prompt_system, "user": self.prompt_user}
                if self.prompt_user is not None
                else None
            ),
            "generation_backend": self.generation_backend,
            "flags": list(self.flags),
            "timings": dict(self.timings),
            "answered_from_context": self.answered_from_context,
        }

    @property
    def provenance(self) -> list[str]:
        return [block.provenance for block in self.context.blocks]


def build_prompt(question: str, context: AssembledContext) -> str:
    body = "\n\n".join(block.text for block in context.blocks)
    return (
        f"{gw.CONTEXT_OPEN}\n{body}\n{gw.CONTEXT_CLOSE}\n\n"
        f"Question: {question}\n\n"
        "Answer strictly from the context above."
    )


class Engine:
    """A ready-to-answer pipeline over built knowledge bases."""

    def __init__(
        self,
        index: VectorIndex,
        graph: PropertyGraph,
        templates: list[CypherTemplate],
        settings: PipelineSettings,
        retrieval_corpus: Corpus | None = None,
        gazetteer: Gazetteer | None = None,
        expansion_dict: dict[str, str] | None = None,
        router=None,
        reranker=None,
        gateway_backend=None,
    ):
        self.retrieval_corpus = retrieval_corpus
        self.index = index
        self.graph = graph
        self.templates = templates
        self.settings = settings
        self.embed_fn = make_embedder(settings.embedder)
        if gazetteer is not None:
            self.gazetteer = gazetteer
        elif retrieval_corpus is not None:
            self.gazetteer = Gazetteer.from_corpus(retrieval_corpus)
        else:
            self.gazetteer = Gazetteer.from_graph(graph)
        self.expander = CuratedExpander(
            expansion_dict or {}, max_variants=settings.expansion_max_variants
        )
        self.router = router or HeuristicRouter()
        self.reranker = reranker or LexicalReranker()
        self.gateway_backend = gateway_backend or gw.build_backend(settings.generation)

    @classmethod
    def from_corpus(
        cls,
        corpus: Corpus,
        settings: PipelineSettings,
        templates: list[CypherTemplate],
        expansion_dict: dict[str, str] | None = None,
        **kwargs,
    ) -> "Engine":
        violations = validate_corpus(corpus)
        if violations:
            raise ContractError(f"corpus invalid: {violations[:3]}")
        embed_fn = make_embedder(settings.embedder)
        retrieval_corpus = rechunk_corpus(corpus, settings.chunking, embed_fn)
        index = VectorIndex(settings.embedder.dim)
        for chunk in retrieval_corpus.chunks:
            index.add(chunk.chunk_id, chunk.text, embed_fn(chunk.text))
        graph = build_graph(retrieval_corpus)
        return cls(
            index=index,
            graph=graph,
            templates=templates,
            settings=settings,
            retrieval_corpus=retrieval_corpus,
            expansion_dict=expansion_dict,
            **kwargs,
        )

    def _clock(self) -> float:
        return time.monotonic() if self.settings.record_timings else 0.0

    def _search_expanded(self, queries: list[str]) -> list[RetrievalHit]:
        best: dict[str, RetrievalHit] = {}
        for query in queries:
            vec = self.embed_fn(query)
            if vec.empty:
                continue
            for hit in self.index.search(vec, self.settings.search_k):
                kept = best.get(hit.chunk_id)
                if kept is None or hit.retrieval_score > kept.retrieval_score:
                    best[hit.chunk_id] = hit
        merged = sorted(best.values(), key=lambda h: (-h.retrieval_score, h.chunk_id))
        return merged[: self.settings.search_k]

    def answer(self, question: str, route_override: str | None = None) -> AnswerRecord:
        if not question.strip():
            raise ContractError("question must be non-empty")
        flags: list[str] = []
        timings: dict[str, float] = {}
        total_start = self._clock()

        step = self._clock()
        if self.settings.expansion_enabled:
            expansion = self.expander.expand(question)
            if expansion.fallback:
                flags.append("expansion: llm expander failed, curated fallback used")
            expansions = expansion.queries
        else:
            expansions = [question]
        timings["expand_s"] = self._clock() - step

        step = self._clock()
        if route_override is not None:
            plan = RoutePlan(
                route=route_override,
                vector_subquery=question if route_override in (ROUTE_VECTOR, ROUTE_HYBRID) else None,
                graph_subquery=question if route_override in (ROUTE_GRAPH, ROUTE_HYBRID) else None,
                rationale="route override",
            )
        else:
            result = self.router.route(question)
            plan = result.plan
            if result.fallback:
                flags.append("router: llm verdict unparseable, heuristic fallback used")
        timings["route_s"] = self._clock() - step

        step = self._clock()
        vector_hits: list[RetrievalHit] = []
        if plan.route in (ROUTE_VECTOR, ROUTE_HYBRID) and len(self.index) > 0:
            vector_hits = self._search_expanded(expansions)
            if vector_hits and self.settings.rerank_enabled:
                vector_hits = rerank(plan.vector_subquery or question, vector_hits, self.reranker)
                if any(h.rerank_failed for h in vector_hits):
                    flags.append("rerank: transport failure, retrieval order kept")
        timings["vector_s"] = self._clock() - step

        step = self._clock()
        graph_template_id = None
        graph_bindings: dict = {}
        graph_table = ResultTable(columns=[], rows=[])
        if plan.route in (ROUTE_GRAPH, ROUTE_HYBRID) and self.templates:
            choice, reason = select_template(
                plan.graph_subquery or question,
                self.templates,
                self.embed_fn,
                self.gazetteer,
                self.settings.template_threshold,
            )
            if choice is None:
                flags.append(f"graph: {reason}")
            else:
                graph_template_id = choice.template.template_id
                graph_bindings = choice.bindings
                graph_table = execute(choice.template.ast, self.graph, choice.bindings)
        timings["graph_s"] = self._clock() - step

        graph_blocks = (
            render_graph_rows(graph_template_id, graph_table) if graph_template_id else []
        )
        context = assemble_context(
            vector_hits, graph_blocks, self.settings.context_budget_tokens
        )
        if context.overflow:
            flags.append("context: budget overflow, blocks dropped")

        step = self._clock()
        if not context.blocks:
            answer_text = NO_INFORMATION_ANSWER
            prompt_user = None
            backend_name = None
            answered = False
        else:
            prompt_user = build_prompt(question, context)
            try:
                exchange = gw.complete(
                    SYSTEM_PROMPT, prompt_user, self.settings.generation, backend=self.gateway_backend
                )
            except GatewayError as exc:
                # The retrieved provenance is still worth reporting.
                answer_text = GENERATION_FAILED_ANSWER
                backend_name = None
                answered = False
                flags.append(f"gateway: {exc}")
            else:
                answer_text = exchange.response
                backend_name = exchange.backend
                answered = True
        timings["generate_s"] = self._clock() - step
        timings["total_s"] = self._clock() - total_start

        return AnswerRecord(
            question=question,
            answer=answer_text,
            route=plan,
            expansions=expansions,
            vector_hits=vector_hits,
            graph_template_id=graph_template_id,
            graph_bindings=graph_bindings,
            graph_columns=graph_table.columns,
            graph_rows=graph_table.rows,
            context=context,
            prompt_system=SYSTEM_PROMPT if context.blocks else None,
            prompt_user=prompt_user,
            generation_backend=backend_name,
            flags=flags,
            timings=timings,
            answered_from_context=answered,
        )
