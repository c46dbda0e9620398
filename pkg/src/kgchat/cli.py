"""Command-line interface: thin wrappers over the library pipeline."""

from __future__ import annotations

import json
import sys

import click

from . import recommend, session as sessions
from .config import load_config
from .errors import KgChatError
from .kg import load_graph
from .service import build_pipeline


def _fail(code: str, message: str) -> None:
    click.echo(json.dumps({"error": {"code": code, "message": message}}), err=True)
    sys.exit(1)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="TOML/JSON config file.")
@click.option("--theta-n", type=float, default=None, help="Entity-match similarity threshold.")
@click.option("--theta-r", type=float, default=None, help="Relation-match similarity threshold.")
@click.option("--mode", type=click.Choice(["live", "replay", "record"]), default=None)
@click.pass_context
def main(ctx, config_path, theta_n, theta_r, mode):
    """Knowledge-graph-grounded chat: verify triples, serve, and replay sessions."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["overrides"] = {"theta_n": theta_n, "theta_r": theta_r, "mode": mode}


def _config(ctx, **extra):
    overrides = dict(ctx.obj["overrides"])
    overrides.update(extra)
    return load_config(ctx.obj["config_path"], overrides)


def _pipeline(ctx, **extra):
    return build_pipeline(_config(ctx, **extra))


@main.command("load-kg")
@click.argument("path", type=click.Path(exists=True))
@click.option("--embeddings-table", type=click.Path(), default=None)
@click.pass_context
def load_kg(ctx, path, embeddings_table):
    """Validate a graph file and build its embedding cache."""
    from .embeddings import FixtureProvider, load_or_build_index, sidecar_path

    try:
        graph = load_graph(path)
        config = _config(ctx, kg_path=path, embeddings_table=embeddings_table)
        provider = FixtureProvider(config.embeddings_table)
        load_or_build_index(graph, provider, path)
        click.echo(
            json.dumps(
                {
                    "nodes": len(graph.nodes),
                    "edges": len(graph.edges),
                    "types": graph.node_types,
                    "embedding_cache": str(sidecar_path(path, provider.provider_id)),
                }
            )
        )
    except KgChatError as exc:
        _fail(type(exc).__name__, str(exc))


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--ui-dir", type=click.Path(exists=True), default=None, help="Serve a built frontend at /ui.")
@click.pass_context
def serve(ctx, host, port, ui_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    try:
        config = _config(ctx, host=host, port=port)
        pipeline = build_pipeline(config)
    except KgChatError as exc:
        _fail(type(exc).__name__, str(exc))
        return
    uvicorn.run(create_app(pipeline, ui_dir=ui_dir), host=config.host, port=config.port)


@main.command()
@click.option("--session", "session_id", required=True)
@click.option("--text", required=True)
@click.pass_context
def ask(ctx, session_id, text):
    """Send one message to a session and stream the outcome."""
    try:
        pipeline = _pipeline(ctx)
        if not pipeline.store.exists(session_id):
            pipeline.create_session(session_id)
        summary = {}
        for event_type, payload in pipeline.handle_message(session_id, text):
            if event_type == "text":
                click.echo(payload["delta"], nl=False)
            elif event_type == "error":
                click.echo()
                _fail(payload["code"], payload["message"])
            else:
                summary.setdefault(event_type, []).append(payload)
        click.echo()
        click.echo(json.dumps(summary, indent=2))
    except KgChatError as exc:
        _fail(type(exc).__name__, str(exc))


@main.command()
@click.option("--triple", required=True, help="Subject|relation|object, pipe-separated.")
@click.pass_context
def verify(ctx, triple):
    """Ground one triple against the graph and print its verdict."""
    from .grounding import classify, match_entity
    from .markers import Triple

    parts = [p.strip() for p in triple.split("|")]
    if len(parts) != 3 or not all(parts):
        _fail("BadTriple", "expected subject|relation|object")
    subject, relation, obj = parts
    try:
        pipeline = _pipeline(ctx)
        t = Triple(subject, relation, obj, "$n1", "$r1", "$n2")
        sm = match_entity(subject, pipeline.graph, pipeline.matcher, pipeline.provider, pipeline.index)
        om = match_entity(obj, pipeline.graph, pipeline.matcher, pipeline.provider, pipeline.index)
        verdict = classify(t, sm, om, pipeline.graph, pipeline.matcher, pipeline.provider)
        evidence = []
        for edge_id in verdict.direct_edges:
            evidence.extend(e.to_dict() for e in pipeline.graph.edges_by_id[edge_id].evidence)
        click.echo(
            json.dumps(
                {
                    "label": verdict.label,
                    "subject_match": sm.to_dict(),
                    "object_match": om.to_dict(),
                    "evidence_count": verdict.evidence_count,
                    "direct_edges": list(verdict.direct_edges),
                    "two_hop": [p.to_dict() for p in verdict.two_hop],
                    "evidence": evidence,
                },
                indent=2,
            )
        )
    except KgChatError as exc:
        _fail(type(exc).__name__, str(exc))


@main.command("recommend")
@click.option("--session", "session_id", required=True)
@click.option("--k", type=int, default=3)
@click.pass_context
def recommend_cmd(ctx, session_id, k):
    """Print the current recommendations for a session."""
    try:
        pipeline = _pipeline(ctx)
        click.echo(json.dumps(pipeline.recommendations(session_id, k), indent=2))
    except KgChatError as exc:
        _fail(type(exc).__name__, str(exc))


@main.command("replay")
@click.option("--session", "log_path", required=True, type=click.Path(exists=True))
@click.option("--id", "session_id", default="replayed")
@click.pass_context
def replay_cmd(ctx, log_path, session_id):
    """Rebuild a session from an event log and print its summary."""
    try:
        config = _config(ctx)
        graph = load_graph(config.kg_path)
        events = sessions.read_event_log(log_path)
        state = sessions.replay(session_id, events, graph)
        click.echo(
            json.dumps(
                {
                    "session": session_id,
                    "events": len(state.events),
                    "steps": len(state.steps),
                    "progress": recommend.progress(state.pool) if state.pool else None,
                    "nodes": len(state.node_steps),
                    "edges": len(state.display_edges),
                },
                indent=2,
            )
        )
    except KgChatError as exc:
        _fail(type(exc).__name__, str(exc))


if __name__ == "__main__":
    main()
