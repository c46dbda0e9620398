"""Map parsed triples onto the knowledge graph and label them.

Each extracted triple is grounded in two stages: both entity surfaces are
matched to KG nodes by embedding cosine similarity, then the claim is
classified against the graph:

  Support   a direct edge exists whose relation is equivalent to the
            stated one (cosine >= theta_r),
  Relevant  direct edges exist but none is equivalent, or no direct edge
            exists yet a two-hop path connects the entities,
  Unsure    an entity failed to match, or the entities are not connected
            within two hops.

Evidence counts always reflect the direct edges backing the label; a
two-hop-only Relevant verdict carries zero direct evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .embeddings import EmbeddingProvider, GraphEmbeddingIndex, cosine, embed
from .errors import ConfigError
from .kg import KnowledgeGraph, TwoHopPath
from .markers import AnnotatedResponse, Triple

SUPPORT = "Support"
RELEVANT = "Relevant"
UNSURE = "Unsure"


@dataclass(frozen=True)
class MatcherConfig:
    """Similarity thresholds for entity and relation matching.

    theta_r follows the tuned relation-equivalence cutoff of 0.94; the
    entity cutoff defaults to 0.85 and is meant to be pinned explicitly
    wherever reproducibility matters.
    """

    theta_n: float = 0.85
    theta_r: float = 0.94
    two_hop_limit: int = 10

    def __post_init__(self):
        if not (0.0 < self.theta_n <= 1.0):
            raise ConfigError(f"theta_n must be in (0, 1], got {self.theta_n}")
        if not (0.0 < self.theta_r <= 1.0):
            raise ConfigError(f"theta_r must be in (0, 1], got {self.theta_r}")
        if self.two_hop_limit < 1:
            raise ConfigError(f"two_hop_limit must be >= 1, got {self.two_hop_limit}")


@dataclass(frozen=True)
class EntityMatch:
    """Best KG candidate for one entity surface; node is set only when the
    similarity clears theta_n."""

    surface: str
    node: str | None
    similarity: float

    def to_dict(self) -> dict:
        return {"surface": self.surface, "node": self.node, "similarity": self.similarity}

    @classmethod
    def from_dict(cls, obj: dict) -> "EntityMatch":
        return cls(obj["surface"], obj["node"], obj["similarity"])


@dataclass(frozen=True)
class Verdict:
    label: str
    direct_edges: tuple[str, ...]
    two_hop: tuple[TwoHopPath, ...]
    evidence_count: int
    best_relation_similarity: float | None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "direct_edges": list(self.direct_edges),
            "two_hop": [p.to_dict() for p in self.two_hop],
            "evidence_count": self.evidence_count,
            "best_relation_similarity": self.best_relation_similarity,
        }

    @classmethod
    def from_dict(cls, obj: dict, graph: KnowledgeGraph) -> "Verdict":
        two_hop = tuple(
            TwoHopPath(
                first=graph.edges_by_id[p["first"]],
                mid=graph.nodes[p["mid"]],
                second=graph.edges_by_id[p["second"]],
                first_orientation=p["first_orientation"],
                second_orientation=p["second_orientation"],
            )
            for p in obj["two_hop"]
        )
        return cls(
            obj["label"],
            tuple(obj["direct_edges"]),
            two_hop,
            obj["evidence_count"],
            obj["best_relation_similarity"],
        )


@dataclass(frozen=True)
class GroundedTriple:
    triple: Triple
    subject_match: EntityMatch
    object_match: EntityMatch
    verdict: Verdict

    def to_dict(self) -> dict:
        return {
            "triple": self.triple.to_dict(),
            "subject_match": self.subject_match.to_dict(),
            "object_match": self.object_match.to_dict(),
            "verdict": self.verdict.to_dict(),
        }

    @classmethod
    def from_dict(cls, obj: dict, graph: KnowledgeGraph) -> "GroundedTriple":
        return cls(
            Triple.from_dict(obj["triple"]),
            EntityMatch.from_dict(obj["subject_match"]),
            EntityMatch.from_dict(obj["object_match"]),
            Verdict.from_dict(obj["verdict"], graph),
        )

    def display_relation(self, graph: KnowledgeGraph) -> str:
        """Relation name shown on the edge label: the KG's name when direct
        edges back the verdict, otherwise the stated surface."""
        if self.verdict.direct_edges:
            edge = graph.edges_by_id.get(self.verdict.direct_edges[0])
            if edge is not None:
                return edge.relation
        return self.triple.relation_surface


def match_entity(
    surface: str,
    graph: KnowledgeGraph,
    cfg: MatcherConfig,
    provider: EmbeddingProvider,
    index: GraphEmbeddingIndex | None = None,
) -> EntityMatch:
    """Best node for a surface by argmax cosine over node names and aliases.

    The node is reported only when the best similarity reaches theta_n;
    exact ties break to the lexicographically smallest node id.
    """
    if index is None:
        index = GraphEmbeddingIndex.build(graph, provider)
    vector = embed(provider, surface)
    node_id, similarity = index.best_match(vector)
    if node_id is None or similarity < cfg.theta_n:
        return EntityMatch(surface=surface, node=None, similarity=similarity)
    return EntityMatch(surface=surface, node=node_id, similarity=similarity)


def classify(
    triple: Triple,
    subject_match: EntityMatch,
    object_match: EntityMatch,
    graph: KnowledgeGraph,
    cfg: MatcherConfig,
    provider: EmbeddingProvider,
) -> Verdict:
    """Label one triple against the graph. Rules apply in order:

    1. either entity unmatched            -> Unsure
    2. a direct edge passes theta_r       -> Support (evidence over passing edges)
    3. direct edges, none passes          -> Relevant (evidence over all of them)
    4. no direct edge, two-hop path found -> Relevant (zero direct evidence)
    5. otherwise                          -> Unsure
    """
    if subject_match.node is None or object_match.node is None:
        return Verdict(UNSURE, (), (), 0, None)
    direct = graph.direct_edges(subject_match.node, object_match.node)
    if direct:
        relation_vector = embed(provider, triple.relation_surface)
        best_sim = None
        passing: list[str] = []
        passing_evidence = 0
        total_evidence = 0
        for edge, _ in direct:
            sim = cosine(relation_vector, embed(provider, edge.relation))
            if best_sim is None or sim > best_sim:
                best_sim = sim
            total_evidence += edge.evidence_count
            if sim >= cfg.theta_r:
                passing.append(edge.id)
                passing_evidence += edge.evidence_count
        if passing:
            return Verdict(SUPPORT, tuple(passing), (), passing_evidence, best_sim)
        all_ids = tuple(edge.id for edge, _ in direct)
        return Verdict(RELEVANT, all_ids, (), total_evidence, best_sim)
    paths = graph.two_hop_paths(subject_match.node, object_match.node, cfg.two_hop_limit)
    if paths:
        return Verdict(RELEVANT, (), tuple(paths), 0, None)
    return Verdict(UNSURE, (), (), 0, None)


def ground_response(
    response: AnnotatedResponse,
    graph: KnowledgeGraph,
    cfg: MatcherConfig,
    provider: EmbeddingProvider,
    index: GraphEmbeddingIndex | None = None,
) -> list[GroundedTriple]:
    """Match and classify every triple of a parsed response."""
    if index is None:
        index = GraphEmbeddingIndex.build(graph, provider)
    grounded: list[GroundedTriple] = []
    for triple in response.triples:
        subject_match = match_entity(triple.subject_surface, graph, cfg, provider, index)
        object_match = match_entity(triple.object_surface, graph, cfg, provider, index)
        verdict = classify(triple, subject_match, object_match, graph, cfg, provider)
        grounded.append(
            GroundedTriple(
                triple=triple,
                subject_match=subject_match,
                object_match=object_match,
                verdict=verdict,
            )
        )
    return grounded
