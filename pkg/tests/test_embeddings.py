import json
import math
import random

import httpx
import numpy as np
import pytest

from kgchat.embeddings import (
    FixtureProvider,
    GraphEmbeddingIndex,
    RemoteProvider,
    cosine,
    embed,
    hash_vector,
    load_or_build_index,
    normalize_text,
    sidecar_path,
)
from kgchat.errors import DimensionMismatch, EmptyText, ProviderUnavailable, ZeroVector
from kgchat.config import fixture_root

from helpers import random_graph


class TestNormalize:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("  vitamin   E ", "vitamin e"),
            ("Procaine", "procaine"),
            ("COEXISTS_WITH", "coexists_with"),
            ("a\tb\nc", "a b c"),
        ],
    )
    def test_normalization(self, raw, expected):
        assert normalize_text(raw) == expected


class TestCosine:
    def test_identity(self):
        v = np.array([0.3, -0.2, 0.9])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_analytic_diagonal(self):
        value = cosine(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
        assert value == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a, b = rng.normal(size=8), rng.normal(size=8)
            assert cosine(a, b) == cosine(b, a)
            assert -1.0 <= cosine(a, b) <= 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine(np.zeros(3), np.array([1.0, 0.0, 0.0]))


class TestHashVector:
    def test_unit_norm_and_determinism(self):
        for text in ("procaine", "x", "a longer phrase with spaces"):
            first = hash_vector(text, 16)
            second = hash_vector(text, 16)
            assert np.array_equal(first, second)
            assert np.linalg.norm(first) == pytest.approx(1.0, abs=1e-12)

    def test_distinct_texts_differ(self):
        assert not np.array_equal(hash_vector("aaa", 16), hash_vector("aab", 16))


class TestFixtureProvider:
    def test_table_lookup(self, provider):
        table = json.loads((fixture_root() / "embeddings" / "supplements.json").read_text())
        expected = np.array(table["vectors"]["procaine"])
        assert np.array_equal(embed(provider, "Procaine"), expected)

    def test_identical_strings_identical_vectors(self, provider):
        assert np.array_equal(embed(provider, "vitamin E"), embed(provider, "vitamin E"))

    def test_normalized_variants_share_vector(self, provider):
        assert np.array_equal(embed(provider, " Vitamin  E "), embed(provider, "vitamin e"))

    def test_fallback_is_deterministic(self, provider):
        first = embed(provider, "completely unknown supplement")
        for _ in range(5):
            assert np.array_equal(embed(provider, "completely unknown supplement"), first)
        assert first.shape == (provider.dimension,)

    def test_empty_text_rejected(self, provider):
        with pytest.raises(EmptyText):
            embed(provider, "   ")

    def test_missing_table_file(self, tmp_path):
        with pytest.raises(ProviderUnavailable):
            FixtureProvider(tmp_path / "absent.json")

    def test_wrong_dimension_rejected(self, tmp_path):
        path = tmp_path / "table.json"
        path.write_text(json.dumps({"dimension": 4, "vectors": {"x": [1.0, 0.0]}}))
        with pytest.raises(ProviderUnavailable):
            FixtureProvider(path)


def _remote_provider(handler) -> RemoteProvider:
    return RemoteProvider(
        base_url="http://embeddings.test/v1",
        model="test-embed",
        transport=httpx.MockTransport(handler),
    )


class TestRemoteProvider:
    def test_round_trip_and_cache(self):
        calls = []

        def handler(request):
            calls.append(json.loads(request.content))
            return httpx.Response(200, json={"data": [{"embedding": [1.0, 2.0, 2.0]}]})

        provider = _remote_provider(handler)
        first = embed(provider, "Procaine")
        second = embed(provider, "procaine  ")
        assert np.array_equal(first, np.array([1.0, 2.0, 2.0]))
        assert np.array_equal(first, second)
        assert len(calls) == 1  # normalized text shares the cache entry
        assert calls[0] == {"model": "test-embed", "input": ["procaine"]}
        assert provider.dimension == 3

    def test_server_error_surfaces(self):
        provider = _remote_provider(lambda request: httpx.Response(500, text="boom"))
        with pytest.raises(ProviderUnavailable):
            embed(provider, "anything")

    def test_malformed_payload_surfaces(self):
        provider = _remote_provider(lambda request: httpx.Response(200, json={"data": []}))
        with pytest.raises(ProviderUnavailable):
            embed(provider, "anything")


class TestGraphEmbeddingIndex:
    def test_best_match_exact_name(self, graph, provider, index):
        node_id, similarity = index.best_match(embed(provider, "Rivastigmine"))
        assert node_id == "C0003"
        assert similarity == pytest.approx(1.0, abs=1e-12)

    def test_alias_attributed_to_owner(self, graph, provider, index):
        node_id, similarity = index.best_match(embed(provider, "AD"))
        assert node_id == "C0002"
        assert similarity == pytest.approx(1.0, abs=1e-12)

    def test_empty_graph(self, provider, tmp_path):
        from kgchat.kg import KnowledgeGraph

        empty = GraphEmbeddingIndex.build(KnowledgeGraph([], []), provider)
        assert empty.best_match(embed(provider, "anything")) == (None, -1.0)

    def test_save_load_round_trip(self, graph, provider, index, tmp_path):
        path = tmp_path / "cache.json"
        index.save(path)
        loaded = GraphEmbeddingIndex.load(path)
        assert loaded.provider_id == index.provider_id
        assert loaded.dimension == index.dimension
        assert [(n, t) for n, t, _ in loaded.entries] == [(n, t) for n, t, _ in index.entries]
        for (_, _, a), (_, _, b) in zip(loaded.entries, index.entries):
            assert np.array_equal(a, b)

    def test_sidecar_reused_and_rebuilt_when_stale(self, provider, tmp_path):
        rng = random.Random(2)
        graph = random_graph(rng, max_nodes=6, max_edges=4)
        kg_path = tmp_path / "kg.jsonl"
        kg_path.write_text("", encoding="utf-8")
        first = load_or_build_index(graph, provider, kg_path)
        cache_file = sidecar_path(kg_path, provider.provider_id)
        assert cache_file.exists()
        second = load_or_build_index(graph, provider, kg_path)
        assert [(n, t) for n, t, _ in second.entries] == [(n, t) for n, t, _ in first.entries]
        cache_file.write_text("{broken", encoding="utf-8")
        third = load_or_build_index(graph, provider, kg_path)  # quietly rebuilt
        assert [(n, t) for n, t, _ in third.entries] == [(n, t) for n, t, _ in first.entries]
