"""Embedding providers and similarity primitives.

Two providers share one contract: a fixture provider backed by a JSON
vector table (with a seeded-hash fallback for unknown terms, so it is
total and deterministic), and a remote HTTP provider speaking the common
`{"model": ..., "input": [...]}` embeddings wire format.

All lookups are keyed by normalized text (trimmed, internal whitespace
collapsed, lowercased) and cached, so repeated calls are cheap and
deterministic per provider.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import DimensionMismatch, EmptyText, ProviderUnavailable, ZeroVector
from .kg import KnowledgeGraph

_WHITESPACE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    return _WHITESPACE.sub(" ", text.strip()).lower()


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; symmetric; rejects zero vectors."""
    if a.shape != b.shape:
        raise DimensionMismatch(a.shape[-1], b.shape[-1])
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector()
    value = float(np.dot(a, b) / (norm_a * norm_b))
    return max(-1.0, min(1.0, value))


def hash_vector(text: str, dimension: int) -> np.ndarray:
    """Deterministic unit vector derived from a hash of the text.

    Platform-independent (sha256, not Python's salted hash), so fallback
    embeddings are stable across runs and machines.
    """
    seed = text.encode("utf-8")
    values: list[float] = []
    counter = 0
    while len(values) < dimension:
        digest = hashlib.sha256(seed + counter.to_bytes(4, "big")).digest()
        for i in range(0, len(digest) - 1, 2):
            if len(values) >= dimension:
                break
            raw = int.from_bytes(digest[i : i + 2], "big")
            values.append(raw / 65535.0 * 2.0 - 1.0)
        counter += 1
    vector = np.array(values, dtype=np.float64)
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        vector[0] = 1.0
        norm = 1.0
    return vector / norm


class EmbeddingProvider(Protocol):
    provider_id: str
    dimension: int

    def embed_normalized(self, normalized: str) -> np.ndarray: ...


def embed(provider: EmbeddingProvider, text: str) -> np.ndarray:
    """Embed one text via the provider, after normalization.

    Raises EmptyText when nothing remains after trimming.
    """
    normalized = normalize_text(text)
    if not normalized:
        raise EmptyText("cannot embed empty text")
    return provider.embed_normalized(normalized)


class FixtureProvider:
    """Vector-table provider for offline, reproducible runs.

    Table file: {"dimension": D, "vectors": {"term": [D floats], ...}}.
    Terms absent from the table get a seeded-hash fallback vector.
    """

    def __init__(self, table_path: str | Path):
        self.table_path = Path(table_path)
        try:
            with open(self.table_path, encoding="utf-8") as handle:
                table = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ProviderUnavailable(f"cannot read vector table {table_path}: {exc}") from exc
        self.dimension = int(table["dimension"])
        self.provider_id = f"fixture:{self.table_path.name}"
        self._vectors: dict[str, np.ndarray] = {}
        for term, values in table["vectors"].items():
            vector = np.array(values, dtype=np.float64)
            if vector.shape != (self.dimension,):
                raise ProviderUnavailable(
                    f"vector for {term!r} has dimension {vector.shape}, expected {self.dimension}"
                )
            self._vectors[normalize_text(term)] = vector
        self._lock = threading.Lock()

    def embed_normalized(self, normalized: str) -> np.ndarray:
        with self._lock:
            vector = self._vectors.get(normalized)
            if vector is None:
                vector = hash_vector(normalized, self.dimension)
                self._vectors[normalized] = vector
            return vector


class RemoteProvider:
    """Client for an HTTP embeddings endpoint.

    POST {base_url}/embeddings with {"model": ..., "input": [text]} and
    read {"data": [{"embedding": [...]}]}. Results are cached per
    normalized text for the life of the provider.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 30.0,
        transport=None,
    ):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.model = model
        self.provider_id = f"remote:{model}"
        self.dimension = 0  # learned from the first response
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(headers=headers, timeout=timeout, transport=transport)
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed_normalized(self, normalized: str) -> np.ndarray:
        with self._lock:
            cached = self._cache.get(normalized)
        if cached is not None:
            return cached
        import httpx

        try:
            response = self._client.post(
                f"{self.base_url}/embeddings",
                json={"model": self.model, "input": [normalized]},
            )
            response.raise_for_status()
            payload = response.json()
            vector = np.array(payload["data"][0]["embedding"], dtype=np.float64)
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise ProviderUnavailable(f"embedding request failed: {exc}") from exc
        with self._lock:
            if self.dimension == 0:
                self.dimension = int(vector.shape[0])
            self._cache[normalized] = vector
        return vector


class GraphEmbeddingIndex:
    """Precomputed embeddings for every node name and alias of a graph.

    Built eagerly so matching is a pure array scan; persists to a sidecar
    JSON file next to the graph so warm starts skip provider calls.
    """

    def __init__(self, provider_id: str, dimension: int, entries: list[tuple[str, str, np.ndarray]]):
        # entries: (node id, term, vector); one entry per name/alias
        self.provider_id = provider_id
        self.dimension = dimension
        self.entries = entries

    @classmethod
    def build(cls, graph: KnowledgeGraph, provider: EmbeddingProvider) -> "GraphEmbeddingIndex":
        entries: list[tuple[str, str, np.ndarray]] = []
        seen: set[tuple[str, str]] = set()
        for node_id in sorted(graph.nodes):
            node = graph.nodes[node_id]
            for term in (node.name, *node.aliases):
                normalized = normalize_text(term)
                if not normalized or (node_id, normalized) in seen:
                    continue
                seen.add((node_id, normalized))
                entries.append((node_id, normalized, provider.embed_normalized(normalized)))
        return cls(provider.provider_id, provider.dimension, entries)

    def best_match(self, vector: np.ndarray) -> tuple[str | None, float]:
        """(node id, similarity) of the argmax-cosine entry.

        Exact ties go to the lexicographically smallest node id. Returns
        (None, -1.0) for an empty graph.
        """
        best = -2.0
        best_node: str | None = None
        for node_id, _, entry_vector in self.entries:
            sim = cosine(vector, entry_vector)
            if sim > best or (sim == best and best_node is not None and node_id < best_node):
                best = sim
                best_node = node_id
        if best_node is None:
            return None, -1.0
        return best_node, best

    # -- sidecar persistence --

    def save(self, path: str | Path) -> None:
        payload = {
            "provider_id": self.provider_id,
            "dimension": self.dimension,
            "entries": [
                {"node": node_id, "term": term, "vector": [float(x) for x in vec]}
                for node_id, term, vec in self.entries
            ],
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "GraphEmbeddingIndex":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        entries = [
            (item["node"], item["term"], np.array(item["vector"], dtype=np.float64))
            for item in payload["entries"]
        ]
        return cls(payload["provider_id"], int(payload["dimension"]), entries)


def sidecar_path(kg_path: str | Path, provider_id: str) -> Path:
    """Cache-file location for a graph/provider pair."""
    kg_path = Path(kg_path)
    digest = hashlib.sha256(provider_id.encode("utf-8")).hexdigest()[:8]
    return kg_path.with_name(f"{kg_path.name}.emb-{digest}.json")


def load_or_build_index(
    graph: KnowledgeGraph, provider: EmbeddingProvider, kg_path: str | Path | None = None
) -> GraphEmbeddingIndex:
    """Load the sidecar index when present and compatible, else rebuild.

    A rebuild is written back to the sidecar when a graph path is given.
    """
    cache_file = sidecar_path(kg_path, provider.provider_id) if kg_path else None
    if cache_file is not None and cache_file.exists():
        try:
            index = GraphEmbeddingIndex.load(cache_file)
            if index.provider_id == provider.provider_id and {
                (node_id, term) for node_id, term, _ in index.entries
            } == _expected_terms(graph):
                return index
        except (OSError, KeyError, ValueError, json.JSONDecodeError):
            pass  # stale or corrupt cache: fall through to rebuild
    index = GraphEmbeddingIndex.build(graph, provider)
    if cache_file is not None:
        try:
            index.save(cache_file)
        except OSError:
            pass  # cache is an optimization, never fatal
    return index


def _expected_terms(graph: KnowledgeGraph) -> set[tuple[str, str]]:
    expected: set[tuple[str, str]] = set()
    for node in graph.nodes.values():
        for term in (node.name, *node.aliases):
            normalized = normalize_text(term)
            if normalized:
                expected.add((node.id, normalized))
    return expected
