"""Next-question recommendation over the knowledge-graph neighborhood.

The exploration goal is fixed by the first structured query: the one-hop
neighborhood of its entities, expressed as (source, target) items where a
target is either a concrete node or a node type. The user's context is the
ordered list of structured queries asked so far. Candidate recommendations
pair a context entity with a goal target reachable from it; dismissed and
already-explored items never come back. The explored fraction of the
remaining goal is the progress ratio shown to the user.

Pool operations are pure: each returns a new pool, leaving the input
untouched, which keeps event replay deterministic.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace

from .errors import AlreadyExplored, UnknownNode, UnknownRecommendation
from .kg import KnowledgeGraph

NODE = "node"
TYPE = "type"


@dataclass(frozen=True)
class Target:
    """What a query asks toward: a specific node or a whole node type."""

    kind: str  # node | type
    value: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}

    @classmethod
    def from_dict(cls, obj: dict) -> "Target":
        return cls(obj["kind"], obj["value"])


@dataclass(frozen=True)
class Query:
    """Structured form of a user question: focus entities and a target."""

    focus: tuple[str, ...]
    target: Target

    def __post_init__(self):
        if not self.focus:
            raise ValueError("query focus must be non-empty")

    def to_dict(self) -> dict:
        return {"focus": list(self.focus), "target": self.target.to_dict()}

    @classmethod
    def from_dict(cls, obj: dict) -> "Query":
        return cls(tuple(obj["focus"]), Target.from_dict(obj["target"]))

    def entities(self) -> tuple[str, ...]:
        """Focus entities plus the target node for node-form queries."""
        if self.target.kind == NODE and self.target.value not in self.focus:
            return self.focus + (self.target.value,)
        return self.focus


@dataclass(frozen=True)
class Context:
    """Append-only history of structured queries, oldest first."""

    queries: tuple[Query, ...] = ()

    def append(self, query: Query) -> "Context":
        return Context(self.queries + (query,))

    def focus_nodes(self) -> list[str]:
        """Distinct focus entities across the history, in first-seen order."""
        seen: list[str] = []
        for query in self.queries:
            for node_id in query.focus:
                if node_id not in seen:
                    seen.append(node_id)
        return seen

    def to_dict(self) -> dict:
        return {"queries": [q.to_dict() for q in self.queries]}

    @classmethod
    def from_dict(cls, obj: dict) -> "Context":
        return cls(tuple(Query.from_dict(q) for q in obj["queries"]))


@dataclass(frozen=True)
class PoolItem:
    """One explorable direction: a source entity paired with a target.

    target_type carries the target node's type for node items so that
    type-shaped queries can claim them without graph access.
    """

    source: str
    kind: str  # node | type
    target: str
    target_type: str | None = None

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "kind": self.kind,
            "target": self.target,
            "target_type": self.target_type,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PoolItem":
        return cls(obj["source"], obj["kind"], obj["target"], obj.get("target_type"))


def item_id(item: PoolItem) -> str:
    """Content hash of (source, target); stable across runs and serialization."""
    digest = hashlib.sha1(f"{item.source}|{item.kind}|{item.target}".encode("utf-8"))
    return digest.hexdigest()[:16]


@dataclass(frozen=True)
class Recommendation:
    id: str
    source: str
    target: Target
    question: str
    score: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "target": self.target.to_dict(),
            "question": self.question,
            "score": self.score,
        }


@dataclass(frozen=True)
class RecommendationPool:
    goal: frozenset[PoolItem]
    dismissed: frozenset[PoolItem]
    explored: frozenset[PoolItem]
    frontier: frozenset[str]

    def to_dict(self) -> dict:
        def items(values: frozenset[PoolItem]) -> list[dict]:
            ordered = sorted(values, key=lambda i: (i.source, i.kind, i.target))
            return [i.to_dict() for i in ordered]

        return {
            "goal": items(self.goal),
            "dismissed": items(self.dismissed),
            "explored": items(self.explored),
            "frontier": sorted(self.frontier),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RecommendationPool":
        return cls(
            frozenset(PoolItem.from_dict(i) for i in obj["goal"]),
            frozenset(PoolItem.from_dict(i) for i in obj["dismissed"]),
            frozenset(PoolItem.from_dict(i) for i in obj["explored"]),
            frozenset(obj["frontier"]),
        )


def _one_hop_items(graph: KnowledgeGraph, entity: str) -> set[PoolItem]:
    items: set[PoolItem] = set()
    for _, neighbor in graph.neighbors(entity, "both"):
        neighbor_type = graph.nodes[neighbor].node_type
        items.add(PoolItem(entity, NODE, neighbor, neighbor_type))
        items.add(PoolItem(entity, TYPE, neighbor_type))
    return items


def init_pool(initial_entities: list[str], graph: KnowledgeGraph) -> RecommendationPool:
    """Seed the goal with the one-hop neighborhoods of the initial entities."""
    goal: set[PoolItem] = set()
    for entity in initial_entities:
        if entity not in graph.nodes:
            raise UnknownNode(entity)
        goal |= _one_hop_items(graph, entity)
    return RecommendationPool(
        goal=frozenset(goal),
        dismissed=frozenset(),
        explored=frozenset(),
        frontier=frozenset(initial_entities),
    )


def expand(
    pool: RecommendationPool, new_entities: list[str], graph: KnowledgeGraph
) -> RecommendationPool:
    """Grow the goal with neighborhoods of entities not yet on the frontier."""
    fresh = [e for e in new_entities if e not in pool.frontier]
    if not fresh:
        return pool
    goal = set(pool.goal)
    for entity in fresh:
        if entity not in graph.nodes:
            raise UnknownNode(entity)
        goal |= _one_hop_items(graph, entity)
    return replace(
        pool, goal=frozenset(goal), frontier=pool.frontier | frozenset(fresh)
    )


def dismiss(pool: RecommendationPool, rec_id: str) -> RecommendationPool:
    """Permanently drop one goal item from future recommendations."""
    matches = [item for item in pool.goal if item_id(item) == rec_id]
    if not matches:
        raise UnknownRecommendation(rec_id)
    item = matches[0]
    if item in pool.explored:
        raise AlreadyExplored(rec_id)
    return replace(pool, dismissed=pool.dismissed | {item})


def record_explored(pool: RecommendationPool, query: Query) -> RecommendationPool:
    """Mark every goal item the query answers as explored.

    A node-target query claims the matching (source, node) item; a
    type-target query claims the (source, type) item and every node item
    of that type, since the answer covers that slice of the neighborhood.
    Dismissed items stay dismissed.
    """
    claimed: set[PoolItem] = set()
    for item in pool.goal:
        if item.source not in query.focus or item in pool.dismissed:
            continue
        if query.target.kind == NODE:
            if item.kind == NODE and item.target == query.target.value:
                claimed.add(item)
        else:
            if item.kind == TYPE and item.target == query.target.value:
                claimed.add(item)
            elif item.kind == NODE and item.target_type == query.target.value:
                claimed.add(item)
    if not claimed:
        return pool
    return replace(pool, explored=pool.explored | claimed)


def progress(pool: RecommendationPool) -> float:
    """Explored fraction of the non-dismissed goal; 1.0 when nothing remains."""
    denominator = len(pool.goal - pool.dismissed)
    if denominator == 0:
        return 1.0
    return len(pool.explored) / denominator


def _candidate_score(graph: KnowledgeGraph, source: str, target: Target) -> int:
    """Total literature count on the edges a recommendation would traverse."""
    score = 0
    for edge_id, neighbor in graph.neighbors(source, "both"):
        edge = graph.edges_by_id[edge_id]
        if target.kind == NODE:
            if neighbor == target.value:
                score += edge.evidence_count
        else:
            if graph.nodes[neighbor].node_type == target.value:
                score += edge.evidence_count
    return score


def generate(
    ctx: Context, pool: RecommendationPool, graph: KnowledgeGraph, k: int = 3
) -> list[Recommendation]:
    """Rank candidate next questions for the current context.

    Candidates pair each context focus entity with every goal target
    reachable from it in one hop, minus dismissed and explored items.
    Ordered by connecting-edge evidence count descending, then id.
    """
    goal_targets = {(item.kind, item.target) for item in pool.goal}
    excluded = pool.dismissed | pool.explored
    candidates: list[Recommendation] = []
    for source in ctx.focus_nodes():
        if source not in graph.nodes:
            continue
        reachable_nodes: set[str] = set()
        reachable_types: set[str] = set()
        for _, neighbor in graph.neighbors(source, "both"):
            reachable_nodes.add(neighbor)
            reachable_types.add(graph.nodes[neighbor].node_type)
        for kind, target_value in goal_targets:
            if kind == NODE:
                if target_value not in reachable_nodes:
                    continue
                item = PoolItem(source, NODE, target_value, graph.nodes[target_value].node_type)
            else:
                if target_value not in reachable_types:
                    continue
                item = PoolItem(source, TYPE, target_value)
            if item in excluded:
                continue
            target = Target(kind, target_value)
            rec = Recommendation(
                id=item_id(item),
                source=source,
                target=target,
                question="",
                score=float(_candidate_score(graph, source, target)),
            )
            candidates.append(rec)
    candidates.sort(key=lambda r: (-r.score, r.id))
    top = candidates[:k]
    return [replace(rec, question=to_question(rec, graph)) for rec in top]


def to_question(rec: Recommendation, graph: KnowledgeGraph) -> str:
    """Deterministic natural-language form of a recommendation."""
    source_name = graph.nodes[rec.source].name if rec.source in graph.nodes else rec.source
    if rec.target.kind == NODE and rec.target.value in graph.nodes:
        target_name = graph.nodes[rec.target.value].name
    else:
        target_name = rec.target.value
    return f"Can you tell me more about {source_name} and {target_name}?"


# --- free-text question parsing -------------------------------------------


def _mention_spans(text: str, terms: list[tuple[str, str]]) -> list[tuple[int, int, str]]:
    """Non-overlapping (start, end, key) matches, longest term first."""
    lowered = text.lower()
    raw: list[tuple[int, int, str]] = []
    for term, key in terms:
        pattern = r"(?<!\w)" + re.escape(term.lower()) + r"(?!\w)"
        for match in re.finditer(pattern, lowered):
            raw.append((match.start(), match.end(), key))
    raw.sort(key=lambda span: (span[0], -(span[1] - span[0])))
    chosen: list[tuple[int, int, str]] = []
    taken_until = -1
    for start, end, key in raw:
        if start >= taken_until:
            chosen.append((start, end, key))
            taken_until = end
    return chosen


def parse_question(text: str, graph: KnowledgeGraph) -> Query | None:
    """Best-effort structured reading of a free-text question.

    Finds node names/aliases and node-type names mentioned in the text.
    The last node mention (or the first type mention) becomes the target;
    the remaining nodes become the focus. Returns None when no structured
    (focus, target) pair is recognizable.
    """
    node_terms: list[tuple[str, str]] = []
    for node in graph.nodes.values():
        node_terms.append((node.name, node.id))
        for alias in node.aliases:
            node_terms.append((alias, node.id))
    node_spans = _mention_spans(text, node_terms)
    mentioned_nodes: list[str] = []
    for _, _, node_id in node_spans:
        if node_id not in mentioned_nodes:
            mentioned_nodes.append(node_id)

    type_terms: list[tuple[str, str]] = []
    for type_name in graph.node_types:
        type_terms.append((type_name, type_name))
        if type_name.lower().endswith("s"):
            type_terms.append((type_name[:-1], type_name))
    covered = [(s, e) for s, e, _ in node_spans]

    def overlaps_node(start: int, end: int) -> bool:
        return any(start < e and s < end for s, e in covered)

    mentioned_types: list[str] = []
    for start, end, type_name in _mention_spans(text, type_terms):
        if not overlaps_node(start, end) and type_name not in mentioned_types:
            mentioned_types.append(type_name)

    if mentioned_nodes and mentioned_types:
        return Query(focus=tuple(mentioned_nodes), target=Target(TYPE, mentioned_types[0]))
    if len(mentioned_nodes) >= 2:
        return Query(
            focus=tuple(mentioned_nodes[:-1]), target=Target(NODE, mentioned_nodes[-1])
        )
    return None
