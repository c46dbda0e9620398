"""Knowledge-graph-grounded conversational exploration.

Answers from a chat model are parsed for inline entity/relation markers,
every extracted triple is verified against a curated knowledge graph with
literature evidence, and the graph neighborhood drives next-question
recommendations and an explored-ratio progress metric.
"""

from .embeddings import FixtureProvider, GraphEmbeddingIndex, RemoteProvider, cosine, embed
from .grounding import (
    EntityMatch,
    GroundedTriple,
    MatcherConfig,
    Verdict,
    classify,
    ground_response,
    match_entity,
)
from .kg import Evidence, KgEdge, KgNode, KnowledgeGraph, TwoHopPath, load_graph
from .markers import AnnotatedResponse, AnnotationParser, Triple, begin, finalize, parse, parse_chunk
from .recommend import (
    Context,
    Query,
    Recommendation,
    RecommendationPool,
    Target,
    dismiss,
    expand,
    generate,
    init_pool,
    progress,
    record_explored,
    to_question,
)
from .session import (
    FileSessionStore,
    SessionEvent,
    SessionState,
    Step,
    StepView,
    apply_event,
    new_session,
    replay,
    view_at_step,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedResponse",
    "AnnotationParser",
    "Context",
    "EntityMatch",
    "Evidence",
    "FileSessionStore",
    "FixtureProvider",
    "GraphEmbeddingIndex",
    "GroundedTriple",
    "KgEdge",
    "KgNode",
    "KnowledgeGraph",
    "MatcherConfig",
    "Query",
    "Recommendation",
    "RecommendationPool",
    "RemoteProvider",
    "SessionEvent",
    "SessionState",
    "Step",
    "StepView",
    "Target",
    "Triple",
    "TwoHopPath",
    "Verdict",
    "apply_event",
    "begin",
    "classify",
    "cosine",
    "dismiss",
    "embed",
    "expand",
    "finalize",
    "generate",
    "ground_response",
    "init_pool",
    "load_graph",
    "match_entity",
    "new_session",
    "parse",
    "parse_chunk",
    "progress",
    "record_explored",
    "replay",
    "to_question",
    "view_at_step",
]
