"""Pipeline orchestration and the HTTP service.

One message exchange runs: scope check -> (annotated) answer -> marker
parse -> per-triple grounding -> session events -> recommendations ->
persist. The exchange is exposed as a stream of typed events so clients
can render text incrementally and attach the graph update at the end.

Requests for the same session are serialized; distinct sessions run
concurrently. All state lives in the session store, so a restarted
process picks up exactly where the committed events left off.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from datetime import datetime, timezone
from typing import Callable, Iterator

from pydantic import BaseModel

from . import markers, recommend, session as sessions
from .embeddings import EmbeddingProvider, GraphEmbeddingIndex
from .errors import GatewayError, KgChatError, UnknownSession
from .gateway import ChatGateway
from .grounding import MatcherConfig, ground_response
from .kg import KnowledgeGraph
from .recommend import parse_question
from .session import FileSessionStore, SessionEvent, SessionState

logger = logging.getLogger(__name__)

StreamEvent = tuple[str, dict]
Clock = Callable[[], str]


def utc_clock() -> str:
    return datetime.now(timezone.utc).isoformat()


def counter_clock(start: int = 0) -> Clock:
    """Deterministic stand-in clock for replayed, reproducible runs."""
    state = {"n": start}

    def tick() -> str:
        state["n"] += 1
        return f"1970-01-01T00:00:{state['n']:02d}+00:00"

    return tick


class Pipeline:
    """Stateless orchestration over the store, graph, matcher, and gateway."""

    def __init__(
        self,
        graph: KnowledgeGraph,
        provider: EmbeddingProvider,
        index: GraphEmbeddingIndex,
        matcher: MatcherConfig,
        gateway: ChatGateway,
        store: FileSessionStore,
        recommendations_k: int = 3,
        clock: Clock | None = None,
    ):
        self.graph = graph
        self.provider = provider
        self.index = index
        self.matcher = matcher
        self.gateway = gateway
        self.store = store
        self.recommendations_k = recommendations_k
        self.clock = clock or utc_clock
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    # -- session lifecycle --

    def create_session(self, session_id: str | None = None) -> str:
        session_id = session_id or uuid.uuid4().hex[:12]
        state = sessions.new_session(session_id)
        self.store.save(state)
        return session_id

    def load_session(self, session_id: str) -> SessionState:
        return self.store.load(session_id)

    # -- the message exchange --

    def handle_message(self, session_id: str, text: str) -> Iterator[StreamEvent]:
        """Run one exchange, yielding typed events as they become available."""
        lock = self._lock_for(session_id)
        with lock:
            try:
                state = self.store.load(session_id)
            except UnknownSession:
                yield "error", {"code": "unknown_session", "message": session_id}
                return
            try:
                yield from self._exchange(state, text)
            except KgChatError as exc:
                logger.warning("exchange failed for session %s: %s", session_id, exc)
                self.store.save(state)  # keep whatever events committed
                yield "error", {"code": type(exc).__name__, "message": str(exc)}

    def _exchange(self, state: SessionState, text: str) -> Iterator[StreamEvent]:
        history = self._history_summary(state)
        parsed = parse_question(text, self.graph)
        self._apply(
            state,
            sessions.USER_QUERY,
            {"text": text, "query": parsed.to_dict() if parsed else None},
        )
        in_scope = self.gateway.check_scope(text)
        self._apply(state, sessions.LLM_SCOPE, {"in_scope": in_scope})
        if not in_scope:
            raw = self.gateway.plain_answer(text, history)
            yield "text", {"delta": raw}
            self._apply(state, sessions.LLM_RESPONSE, {"raw": raw})
            self.store.save(state)
            yield "done", {
                "session_id": state.id,
                "step": state.current_step,
                "in_scope": False,
            }
            return

        chunks: list[str] = []
        raw = self.gateway.annotated_answer(text, history, sink=chunks.append)
        parser = markers.begin()
        events: list[StreamEvent] = []
        for chunk in chunks:
            delta, spans = parser.feed(chunk)
            if delta:
                events.append(("text", {"delta": delta}))
            for span in spans:
                kind = "relation" if isinstance(span, markers.RelationSpan) else "entity"
                events.append(("entity", {"kind": kind, **span.to_dict()}))
        response = parser.finalize()
        yield from events
        grounded = ground_response(response, self.graph, self.matcher, self.provider, self.index)
        self._apply(state, sessions.LLM_RESPONSE, {"raw": raw})
        self._apply(
            state, sessions.GROUNDING_RESULT, {"grounded": [g.to_dict() for g in grounded]}
        )
        step = state.steps[-1]
        for grounded_triple in step.grounded:
            yield "triple", {
                **grounded_triple.to_dict(),
                "display_relation": grounded_triple.display_relation(self.graph),
                "step": step.index,
            }
        recs = []
        if state.pool is not None:
            recs = recommend.generate(
                state.context, state.pool, self.graph, self.recommendations_k
            )
            self._apply(
                state, sessions.RECOMMENDATION_SHOWN, {"ids": [r.id for r in recs]}
            )
        self.store.save(state)
        yield "recommendations", {"items": [r.to_dict() for r in recs]}
        if state.pool is not None:
            yield "progress", {"value": recommend.progress(state.pool)}
        yield "done", {"session_id": state.id, "step": step.index, "in_scope": True}

    def _apply(self, state: SessionState, kind: str, payload: dict) -> None:
        event = SessionEvent(
            sequence=len(state.events) + 1,
            timestamp=self.clock(),
            kind=kind,
            payload=payload,
        )
        sessions.apply_event(state, event, self.graph)

    def _history_summary(self, state: SessionState) -> str:
        queries = [step.query_text for step in state.steps[-3:]]
        return "; ".join(queries) if queries else "(none)"

    # -- non-streaming operations --

    def dismiss(self, session_id: str, rec_id: str) -> dict:
        lock = self._lock_for(session_id)
        with lock:
            state = self.store.load(session_id)
            self._apply(state, sessions.DISMISSAL, {"id": rec_id})
            self.store.save(state)
            return self._recommendation_payload(state)

    def recommendations(self, session_id: str, k: int | None = None) -> dict:
        state = self.store.load(session_id)
        return self._recommendation_payload(state, k)

    def _recommendation_payload(self, state: SessionState, k: int | None = None) -> dict:
        if state.pool is None:
            return {"items": [], "progress": None}
        recs = recommend.generate(
            state.context, state.pool, self.graph, k or self.recommendations_k
        )
        return {
            "items": [r.to_dict() for r in recs],
            "progress": recommend.progress(state.pool),
        }

    def graph_view(self, session_id: str, step: int | None = None) -> dict:
        state = self.store.load(session_id)
        step_count = len(state.steps)
        if step_count == 0:
            return {"step": None, "step_count": 0, "view": None, "nodes": [], "edges": []}
        k = step_count - 1 if step is None else step
        view = sessions.view_at_step(state, k)
        nodes = [
            {
                "id": node_id,
                "name": self.graph.nodes[node_id].name,
                "type": self.graph.nodes[node_id].node_type,
                "step": introduced,
            }
            for node_id, introduced in sorted(state.node_steps.items())
        ]
        edges = [state.display_edges[eid].to_dict() for eid in sorted(state.display_edges)]
        return {
            "step": k,
            "step_count": step_count,
            "view": view.to_dict(),
            "nodes": nodes,
            "edges": edges,
        }

    def evidence(self, edge_id: str) -> dict:
        edge = self.graph.edge(edge_id)
        if edge is None:
            raise KeyError(edge_id)
        return {
            "edge_id": edge.id,
            "source": self.graph.nodes[edge.source].name,
            "target": self.graph.nodes[edge.target].name,
            "relation": edge.relation,
            "evidence": [e.to_dict() for e in edge.evidence],
        }


def build_pipeline(config, clock: Clock | None = None) -> Pipeline:
    """Wire a pipeline from a ServiceConfig (see config module)."""
    from .embeddings import FixtureProvider, RemoteProvider, load_or_build_index
    from .kg import load_graph

    config.validate()
    graph = load_graph(config.kg_path)
    if config.embed_base_url and config.embed_model:
        provider: EmbeddingProvider = RemoteProvider(
            base_url=config.embed_base_url,
            model=config.embed_model,
            api_key=config.api_key(),
        )
    else:
        provider = FixtureProvider(config.embeddings_table)
    index = load_or_build_index(graph, provider, config.kg_path)
    gateway = ChatGateway(
        mode=config.mode,
        fixtures_dir=config.fixtures_dir,
        base_url=config.chat_base_url or None,
        model=config.chat_model or None,
        api_key=config.api_key(),
        kg_types=graph.node_types,
        domain_blurb=config.domain_blurb,
    )
    store = FileSessionStore(config.store_path, graph)
    return Pipeline(
        graph=graph,
        provider=provider,
        index=index,
        matcher=config.matcher(),
        gateway=gateway,
        store=store,
        recommendations_k=config.recommendations_k,
        clock=clock,
    )


def sse_format(event_type: str, payload: dict) -> str:
    return f"event: {event_type}\ndata: {json.dumps(payload)}\n\n"


class MessageBody(BaseModel):
    text: str


def create_app(pipeline: Pipeline, ui_dir: str | None = None):
    """FastAPI application exposing the pipeline.

    When `ui_dir` points at a built frontend, it is served at /ui.
    """
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import StreamingResponse

    from .errors import AlreadyExplored, StepOutOfRange, UnknownRecommendation

    app = FastAPI(title="kgchat", version="0.1.0")
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session():
        return {"id": pipeline.create_session()}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return pipeline.load_session(session_id).to_dict()
        except UnknownSession:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")

        def stream():
            for event_type, payload in pipeline.handle_message(session_id, body.text):
                yield sse_format(event_type, payload)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/graph")
    def get_graph(session_id: str, step: int | None = None):
        try:
            return pipeline.graph_view(session_id, step)
        except UnknownSession:
            raise HTTPException(status_code=404, detail="unknown session")
        except StepOutOfRange as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/sessions/{session_id}/recommendations")
    def get_recommendations(session_id: str, k: int = 3):
        try:
            return pipeline.recommendations(session_id, k)
        except UnknownSession:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.post("/sessions/{session_id}/recommendations/{rec_id}/dismiss")
    def dismiss(session_id: str, rec_id: str):
        try:
            return pipeline.dismiss(session_id, rec_id)
        except UnknownSession:
            raise HTTPException(status_code=404, detail="unknown session")
        except UnknownRecommendation:
            raise HTTPException(status_code=404, detail="unknown recommendation")
        except AlreadyExplored:
            raise HTTPException(status_code=409, detail="recommendation already explored")

    @app.get("/sessions/{session_id}/progress")
    def get_progress(session_id: str):
        try:
            state = pipeline.load_session(session_id)
        except UnknownSession:
            raise HTTPException(status_code=404, detail="unknown session")
        value = recommend.progress(state.pool) if state.pool is not None else None
        return {"value": value}

    @app.get("/edges/{edge_id}/evidence")
    def get_evidence(edge_id: str):
        try:
            return pipeline.evidence(edge_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown edge")

    return app
