"""Event-sourced conversation state.

A session is a strictly ordered event log plus the state folded from it:
steps with their grounded triples, a cumulative display graph in which
every node and edge remembers the step that introduced it, the
recommendation pool, and the query context. Replaying a log always
reproduces the same serialized state, which is what makes sessions
testable and crash-safe.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import markers, recommend
from .errors import (
    CorruptRecord,
    KgChatError,
    SequenceGap,
    StepOutOfRange,
    StoreUnavailable,
    UnknownRecommendation,
    UnknownSession,
)
from .grounding import GroundedTriple
from .kg import KnowledgeGraph
from .markers import AnnotatedResponse
from .recommend import Context, Query, RecommendationPool

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

USER_QUERY = "user_query"
LLM_SCOPE = "llm_scope"
LLM_RESPONSE = "llm_response"
GROUNDING_RESULT = "grounding_result"
RECOMMENDATION_SHOWN = "recommendation_shown"
DISMISSAL = "dismissal"
NAVIGATION = "navigation"

_EVENT_KINDS = {
    USER_QUERY,
    LLM_SCOPE,
    LLM_RESPONSE,
    GROUNDING_RESULT,
    RECOMMENDATION_SHOWN,
    DISMISSAL,
    NAVIGATION,
}


@dataclass(frozen=True)
class SessionEvent:
    sequence: int
    timestamp: str
    kind: str
    payload: dict

    def __post_init__(self):
        if self.kind not in _EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SessionEvent":
        return cls(obj["sequence"], obj["timestamp"], obj["kind"], obj["payload"])


@dataclass(frozen=True)
class DisplayEdge:
    """One labeled edge of the conversation graph (a grounded claim)."""

    id: str
    source: str
    target: str
    relation: str
    label: str
    evidence_count: int
    step: int
    direct_edge_ids: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "target": self.target,
            "relation": self.relation,
            "label": self.label,
            "evidence_count": self.evidence_count,
            "step": self.step,
            "direct_edge_ids": list(self.direct_edge_ids),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "DisplayEdge":
        return cls(
            obj["id"],
            obj["source"],
            obj["target"],
            obj["relation"],
            obj["label"],
            obj["evidence_count"],
            obj["step"],
            tuple(obj["direct_edge_ids"]),
        )


def display_edge_id(source: str, relation: str, target: str) -> str:
    import hashlib

    digest = hashlib.sha1(f"{source}|{relation}|{target}".encode("utf-8"))
    return "de-" + digest.hexdigest()[:16]


@dataclass
class Step:
    """One answered query with what it newly contributed to the graph."""

    index: int
    query_text: str
    in_scope: bool
    response: AnnotatedResponse
    grounded: tuple[GroundedTriple, ...]
    added_nodes: tuple[str, ...]
    added_edges: tuple[str, ...]
    query: Query | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "query_text": self.query_text,
            "in_scope": self.in_scope,
            "response": self.response.to_dict(),
            "grounded": [g.to_dict() for g in self.grounded],
            "added_nodes": list(self.added_nodes),
            "added_edges": list(self.added_edges),
            "query": self.query.to_dict() if self.query else None,
        }

    @classmethod
    def from_dict(cls, obj: dict, graph: KnowledgeGraph) -> "Step":
        return cls(
            index=obj["index"],
            query_text=obj["query_text"],
            in_scope=obj["in_scope"],
            response=AnnotatedResponse.from_dict(obj["response"]),
            grounded=tuple(GroundedTriple.from_dict(g, graph) for g in obj["grounded"]),
            added_nodes=tuple(obj["added_nodes"]),
            added_edges=tuple(obj["added_edges"]),
            query=Query.from_dict(obj["query"]) if obj.get("query") else None,
        )


@dataclass(frozen=True)
class StepView:
    """Focus+context partition of the cumulative graph at one step."""

    highlighted: tuple[str, ...]
    faded: tuple[str, ...]
    hidden: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "highlighted": list(self.highlighted),
            "faded": list(self.faded),
            "hidden": list(self.hidden),
        }


@dataclass
class SessionState:
    id: str
    steps: list[Step] = field(default_factory=list)
    node_steps: dict[str, int] = field(default_factory=dict)  # node id -> introducing step
    display_edges: dict[str, DisplayEdge] = field(default_factory=dict)
    pool: RecommendationPool | None = None
    context: Context = field(default_factory=Context)
    current_step: int = -1
    events: list[SessionEvent] = field(default_factory=list)
    last_recommendations: tuple[str, ...] = ()
    # in-flight fields between the events of one exchange
    pending_query_text: str | None = None
    pending_query: Query | None = None
    pending_scope: bool | None = None
    pending_raw: str | None = None

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "steps": [s.to_dict() for s in self.steps],
            "node_steps": dict(sorted(self.node_steps.items())),
            "display_edges": [self.display_edges[k].to_dict() for k in sorted(self.display_edges)],
            "pool": self.pool.to_dict() if self.pool else None,
            "context": self.context.to_dict(),
            "current_step": self.current_step,
            "last_recommendations": list(self.last_recommendations),
            "pending": {
                "query_text": self.pending_query_text,
                "query": self.pending_query.to_dict() if self.pending_query else None,
                "scope": self.pending_scope,
                "raw": self.pending_raw,
            },
            "event_count": len(self.events),
        }

    @classmethod
    def from_dict(cls, obj: dict, graph: KnowledgeGraph, events: list[SessionEvent]) -> "SessionState":
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise CorruptRecord(f"unsupported schema_version {obj.get('schema_version')!r}")
        pending = obj.get("pending") or {}
        state = cls(
            id=obj["id"],
            steps=[Step.from_dict(s, graph) for s in obj["steps"]],
            node_steps=dict(obj["node_steps"]),
            display_edges={e["id"]: DisplayEdge.from_dict(e) for e in obj["display_edges"]},
            pool=RecommendationPool.from_dict(obj["pool"]) if obj.get("pool") else None,
            context=Context.from_dict(obj["context"]),
            current_step=obj["current_step"],
            events=events,
            last_recommendations=tuple(obj.get("last_recommendations", [])),
            pending_query_text=pending.get("query_text"),
            pending_query=Query.from_dict(pending["query"]) if pending.get("query") else None,
            pending_scope=pending.get("scope"),
            pending_raw=pending.get("raw"),
        )
        return state

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def new_session(session_id: str) -> SessionState:
    return SessionState(id=session_id)


def apply_event(state: SessionState, event: SessionEvent, graph: KnowledgeGraph) -> SessionState:
    """Fold one event into the state. Events must arrive gap-free."""
    expected = len(state.events) + 1
    if event.sequence != expected:
        raise SequenceGap(expected, event.sequence)
    state.events.append(event)
    payload = event.payload
    if event.kind == USER_QUERY:
        state.pending_query_text = payload["text"]
        raw_query = payload.get("query")
        state.pending_query = Query.from_dict(raw_query) if raw_query else None
        state.pending_scope = None
        state.pending_raw = None
    elif event.kind == LLM_SCOPE:
        state.pending_scope = bool(payload["in_scope"])
    elif event.kind == LLM_RESPONSE:
        state.pending_raw = payload["raw"]
        if state.pending_scope is False:
            _append_step(state, graph, grounded=(), in_scope=False)
    elif event.kind == GROUNDING_RESULT:
        grounded = tuple(GroundedTriple.from_dict(g, graph) for g in payload["grounded"])
        _append_step(state, graph, grounded=grounded, in_scope=True)
    elif event.kind == RECOMMENDATION_SHOWN:
        state.last_recommendations = tuple(payload["ids"])
    elif event.kind == DISMISSAL:
        if state.pool is None:
            raise UnknownRecommendation(payload["id"])
        state.pool = recommend.dismiss(state.pool, payload["id"])
    elif event.kind == NAVIGATION:
        target = payload["step"]
        if not (0 <= target < len(state.steps)):
            raise StepOutOfRange(target, len(state.steps))
        state.current_step = target
    return state


def _append_step(
    state: SessionState,
    graph: KnowledgeGraph,
    grounded: tuple[GroundedTriple, ...],
    in_scope: bool,
) -> None:
    if state.pending_raw is None or state.pending_query_text is None:
        raise KgChatError("step completion without a pending query/response")
    index = len(state.steps)
    prefix = f"s{index}:"
    response = markers.parse(state.pending_raw).with_namespaced_ids(prefix)
    grounded = tuple(
        GroundedTriple(
            triple=g.triple.with_namespaced_ids(prefix),
            subject_match=g.subject_match,
            object_match=g.object_match,
            verdict=g.verdict,
        )
        for g in grounded
    )
    added_nodes: list[str] = []
    added_edges: list[str] = []
    for g in grounded:
        source = g.subject_match.node
        target = g.object_match.node
        if source is None or target is None:
            continue  # unmatched claims stay out of the graph view
        for node_id in (source, target):
            if node_id not in state.node_steps:
                state.node_steps[node_id] = index
                added_nodes.append(node_id)
        relation = g.display_relation(graph)
        edge_id = display_edge_id(source, relation, target)
        if edge_id not in state.display_edges:
            state.display_edges[edge_id] = DisplayEdge(
                id=edge_id,
                source=source,
                target=target,
                relation=relation,
                label=g.verdict.label,
                evidence_count=g.verdict.evidence_count,
                step=index,
                direct_edge_ids=g.verdict.direct_edges,
            )
            added_edges.append(edge_id)
    query = state.pending_query if in_scope else None
    if in_scope and query is not None:
        entities = [e for e in query.entities() if e in graph.nodes]
        if state.pool is None:
            state.pool = recommend.init_pool(entities, graph)
        else:
            state.pool = recommend.expand(state.pool, entities, graph)
        state.pool = recommend.record_explored(state.pool, query)
        state.context = state.context.append(query)
    state.steps.append(
        Step(
            index=index,
            query_text=state.pending_query_text,
            in_scope=in_scope,
            response=response,
            grounded=grounded,
            added_nodes=tuple(added_nodes),
            added_edges=tuple(added_edges),
            query=query,
        )
    )
    state.current_step = index
    state.pending_query_text = None
    state.pending_query = None
    state.pending_scope = None
    state.pending_raw = None


def replay(session_id: str, events: list[SessionEvent], graph: KnowledgeGraph) -> SessionState:
    """Rebuild a session purely from its event log."""
    state = new_session(session_id)
    for event in events:
        apply_event(state, event, graph)
    return state


def view_at_step(state: SessionState, k: int) -> StepView:
    """Partition every cumulative node/edge id relative to step k."""
    if not (0 <= k < len(state.steps)):
        raise StepOutOfRange(k, len(state.steps))
    highlighted: list[str] = []
    faded: list[str] = []
    hidden: list[str] = []
    entries = [(step, node_id) for node_id, step in state.node_steps.items()]
    entries += [(edge.step, edge_id) for edge_id, edge in state.display_edges.items()]
    for step, item_id in sorted(entries, key=lambda e: (e[0], e[1])):
        if step == k:
            highlighted.append(item_id)
        elif step < k:
            faded.append(item_id)
        else:
            hidden.append(item_id)
    return StepView(tuple(highlighted), tuple(faded), tuple(hidden))


class FileSessionStore:
    """Directory-backed store: per session, a snapshot file plus a JSON-Lines
    event log. The log is the source of truth; a corrupt snapshot is rebuilt
    from it with a warning."""

    def __init__(self, root: str | Path, graph: KnowledgeGraph):
        self.root = Path(root)
        self.graph = graph
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreUnavailable(f"cannot create session store at {root}: {exc}") from exc

    def _snapshot_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.json"

    def _log_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.events.jsonl"

    def save(self, state: SessionState) -> None:
        try:
            snapshot_tmp = self._snapshot_path(state.id).with_suffix(".json.tmp")
            snapshot_tmp.write_text(state.canonical_json(), encoding="utf-8")
            snapshot_tmp.replace(self._snapshot_path(state.id))
            log_tmp = self._log_path(state.id).with_suffix(".jsonl.tmp")
            lines = [
                json.dumps(e.to_dict(), sort_keys=True, separators=(",", ":"))
                for e in state.events
            ]
            log_tmp.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
            log_tmp.replace(self._log_path(state.id))
        except OSError as exc:
            raise StoreUnavailable(f"cannot persist session {state.id}: {exc}") from exc

    def load(self, session_id: str) -> SessionState:
        snapshot_path = self._snapshot_path(session_id)
        log_path = self._log_path(session_id)
        if not snapshot_path.exists() and not log_path.exists():
            raise UnknownSession(session_id)
        events = self._read_log(log_path) if log_path.exists() else []
        if snapshot_path.exists():
            try:
                obj = json.loads(snapshot_path.read_text(encoding="utf-8"))
                return SessionState.from_dict(obj, self.graph, events)
            except (json.JSONDecodeError, KeyError, CorruptRecord) as exc:
                if not events:
                    raise CorruptRecord(f"snapshot for {session_id} unreadable: {exc}") from exc
                logger.warning(
                    "snapshot for session %s corrupt (%s); rebuilding from event log",
                    session_id,
                    exc,
                )
        return replay(session_id, events, self.graph)

    def _read_log(self, log_path: Path) -> list[SessionEvent]:
        events: list[SessionEvent] = []
        try:
            text = log_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StoreUnavailable(f"cannot read event log {log_path}: {exc}") from exc
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                events.append(SessionEvent.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CorruptRecord(f"event log line {line_no} unreadable: {exc}") from exc
        return events

    def exists(self, session_id: str) -> bool:
        return self._snapshot_path(session_id).exists() or self._log_path(session_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json") if not p.name.endswith(".tmp"))


def read_event_log(path: str | Path) -> list[SessionEvent]:
    """Parse a standalone JSON-Lines event log file."""
    events: list[SessionEvent] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                events.append(SessionEvent.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CorruptRecord(f"event log line {line_no} unreadable: {exc}") from exc
    return events
