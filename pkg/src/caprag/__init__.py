"""caprag: hybrid vector + property-graph retrieval engine.

A corpus is ingested into a section/chunk/table hierarchy, chunked, and
loaded into both an exact-search vector index and a typed property graph.
Queries are expanded, routed, answered from one or both stores through a
read-only Cypher subset and a chat gateway, and scored by an LLM-as-judge
harness.
"""

from .chunking import ChunkingConfig, chunk_fixed, chunk_semantic, rechunk_corpus
from .corpus import (
    ChunkRecord,
    Corpus,
    CorpusDocument,
    LocationRef,
    Section,
    TableRecord,
    ingest_directory,
    ingest_document,
    load_corpus,
    save_corpus,
    validate_corpus,
)
from .cypher import ResultTable, execute, geodist_km, parse_cypher, print_query
from .embedding import EmbedderSpec, EmbeddingVector, cosine, embed, make_embedder
from .gateway import ChatExchange, GenerationConfig, MockBackend, complete
from .graph_store import (
    GraphEdge,
    GraphNode,
    PropertyGraph,
    build_graph,
    export_graph,
    import_graph,
    neighbors,
)
from .judging import AblationConfig, JudgeScores, MockJudge, judge, run_ablation
from .pipeline import (
    AnswerRecord,
    CypherTemplate,
    Engine,
    HeuristicRouter,
    PipelineSettings,
    RoutePlan,
    assemble_context,
    expand_query,
    load_templates,
    route,
    select_template,
)
from .vector_store import LexicalReranker, RetrievalHit, VectorIndex, rerank

__version__ = "0.1.0"
