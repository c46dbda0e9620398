from __future__ import annotations

import socket
import sys

import pytest

from kgchat.config import fixture_root, load_config
from kgchat.embeddings import FixtureProvider, GraphEmbeddingIndex
from kgchat.grounding import MatcherConfig
from kgchat.kg import load_graph
from kgchat.service import build_pipeline, counter_clock


@pytest.fixture(scope="session", autouse=True)
def no_network():
    """The whole suite runs with outbound networking disabled: replay mode
    and mock transports must be enough for every test."""
    original_connect = socket.socket.connect
    original_create = socket.create_connection

    def blocked(*args, **kwargs):
        raise RuntimeError("network access attempted with networking disabled")

    socket.socket.connect = blocked
    socket.create_connection = blocked
    yield
    socket.socket.connect = original_connect
    socket.create_connection = original_create


@pytest.fixture(scope="session")
def graph():
    return load_graph(fixture_root() / "kg" / "supplements.jsonl")


@pytest.fixture(scope="session")
def provider():
    return FixtureProvider(fixture_root() / "embeddings" / "supplements.json")


@pytest.fixture(scope="session")
def index(graph, provider):
    return GraphEmbeddingIndex.build(graph, provider)


@pytest.fixture()
def matcher():
    return MatcherConfig()


@pytest.fixture()
def make_pipeline(tmp_path):
    """Factory for replay-mode pipelines over a throwaway session store."""

    def factory(store_name: str = "store", **overrides):
        options = {"store_path": str(tmp_path / store_name), "mode": "replay"}
        options.update(overrides)
        config = load_config(None, options)
        return build_pipeline(config, clock=counter_clock())

    return factory


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    status = "PASS" if report.passed else "FAIL"
    name = report.nodeid.split("::")[-1]
    sys.stderr.write(f"[acceptance] {status}: {name}\n")
    sys.stderr.flush()
