"""Knowledge graph store: load a JSON-Lines graph file, index it, and answer
neighborhood, direct-edge, and two-hop path queries.

The graph is immutable once loaded, so any number of readers may share one
instance. Edges are treated as undirected for connectivity queries; the
orientation of each traversed edge is reported so callers can display the
stored direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

from .errors import DanglingEndpoint, DuplicateNodeId, ParseError, UnknownNode

Direction = Literal["out", "in", "both"]
Orientation = Literal["forward", "reverse"]


@dataclass(frozen=True)
class Evidence:
    """One piece of literature attached to an edge (e.g. a PubMed record)."""

    source_id: str
    title: str
    year: int | None = None

    def to_dict(self) -> dict:
        return {"source_id": self.source_id, "title": self.title, "year": self.year}


@dataclass(frozen=True)
class KgNode:
    id: str
    name: str
    node_type: str
    aliases: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "type": self.node_type,
            "aliases": list(self.aliases),
        }


@dataclass(frozen=True)
class KgEdge:
    id: str
    source: str
    target: str
    relation: str
    evidence: tuple[Evidence, ...] = ()

    @property
    def evidence_count(self) -> int:
        return len(self.evidence)

    def other_endpoint(self, node_id: str) -> str:
        """The endpoint opposite `node_id` (itself for a self-loop)."""
        return self.target if node_id == self.source else self.source

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "target": self.target,
            "relation": self.relation,
            "evidence": [e.to_dict() for e in self.evidence],
        }


@dataclass(frozen=True)
class TwoHopPath:
    """A connection a — mid — b through exactly one intermediate node.

    `first` joins the query node a to `mid`, `second` joins `mid` to b.
    Orientations record whether each stored edge points along the traversal
    (forward) or against it (reverse).
    """

    first: KgEdge
    mid: KgNode
    second: KgEdge
    first_orientation: Orientation
    second_orientation: Orientation

    @property
    def evidence_count(self) -> int:
        return self.first.evidence_count + self.second.evidence_count

    def to_dict(self) -> dict:
        return {
            "first": self.first.id,
            "mid": self.mid.id,
            "second": self.second.id,
            "first_orientation": self.first_orientation,
            "second_orientation": self.second_orientation,
        }


@dataclass
class _Adjacency:
    outgoing: list[str] = field(default_factory=list)
    incoming: list[str] = field(default_factory=list)


class KnowledgeGraph:
    """Fully indexed entity-relation store with literature attached to edges."""

    def __init__(self, nodes: Iterable[KgNode], edges: Iterable[KgEdge]):
        self.nodes: dict[str, KgNode] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise DuplicateNodeId(node.id)
            self.nodes[node.id] = node
        self.edges: list[KgEdge] = list(edges)
        self.edges_by_id: dict[str, KgEdge] = {}
        for edge in self.edges:
            if edge.id in self.edges_by_id:
                raise ParseError(0, f"duplicate edge id: {edge.id}")
            self.edges_by_id[edge.id] = edge
        for edge in self.edges:
            for endpoint in (edge.source, edge.target):
                if endpoint not in self.nodes:
                    raise DanglingEndpoint(edge.id, endpoint)
        self.adjacency = self._build_adjacency()
        self.type_index: dict[str, list[str]] = {}
        for node in self.nodes.values():
            self.type_index.setdefault(node.node_type, []).append(node.id)
        for ids in self.type_index.values():
            ids.sort()

    def _build_adjacency(self) -> dict[str, _Adjacency]:
        adjacency = {node_id: _Adjacency() for node_id in self.nodes}
        for edge in self.edges:
            adjacency[edge.source].outgoing.append(edge.id)
            adjacency[edge.target].incoming.append(edge.id)
        for entry in adjacency.values():
            entry.outgoing.sort()
            entry.incoming.sort()
        return adjacency

    def rebuild_adjacency(self) -> dict[str, _Adjacency]:
        """Recompute the index from the raw edge list (for integrity checks)."""
        return self._build_adjacency()

    def node(self, node_id: str) -> KgNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def edge(self, edge_id: str) -> KgEdge | None:
        return self.edges_by_id.get(edge_id)

    def node_by_name(self, name: str) -> KgNode | None:
        """First node whose name matches case-insensitively, by node id order."""
        wanted = name.strip().lower()
        hits = [n for n in self.nodes.values() if n.name.strip().lower() == wanted]
        return min(hits, key=lambda n: n.id) if hits else None

    @property
    def node_types(self) -> list[str]:
        return sorted(self.type_index)

    def neighbors(self, node_id: str, direction: Direction = "both") -> list[tuple[str, str]]:
        """(edge id, neighbor node id) pairs incident to `node_id`.

        Deduplicated, sorted by edge id. A self-loop contributes a single
        entry with the node itself as neighbor.
        """
        entry_adj = self.adjacency.get(node_id)
        if entry_adj is None:
            raise UnknownNode(node_id)
        edge_ids: set[str] = set()
        if direction in ("out", "both"):
            edge_ids.update(entry_adj.outgoing)
        if direction in ("in", "both"):
            edge_ids.update(entry_adj.incoming)
        if direction not in ("out", "in", "both"):
            raise ValueError(f"direction must be out|in|both, got {direction!r}")
        result = {
            (eid, self.edges_by_id[eid].other_endpoint(node_id)) for eid in edge_ids
        }
        return sorted(result)

    def direct_edges(self, a: str, b: str) -> list[tuple[KgEdge, Orientation]]:
        """Every edge whose endpoint set is {a, b}, sorted by edge id.

        Orientation is forward when the stored edge points a -> b.
        """
        for node_id in (a, b):
            if node_id not in self.nodes:
                raise UnknownNode(node_id)
        result: list[tuple[KgEdge, Orientation]] = []
        for eid, neighbor in self.neighbors(a, "both"):
            if neighbor != b:
                continue
            edge = self.edges_by_id[eid]
            orientation: Orientation = "forward" if edge.source == a else "reverse"
            result.append((edge, orientation))
        result.sort(key=lambda pair: pair[0].id)
        return result

    def two_hop_paths(self, a: str, b: str, limit: int = 10) -> list[TwoHopPath]:
        """Paths a — mid — b through one intermediate node, ignoring direction.

        The mid node is never a or b; self-loops therefore never participate.
        Ranked by total evidence count descending, then by (first edge id,
        second edge id); at most `limit` paths are returned.
        """
        if limit < 1:
            raise ValueError(f"limit must be >= 1, got {limit}")
        for node_id in (a, b):
            if node_id not in self.nodes:
                raise UnknownNode(node_id)
        from_b: dict[str, list[str]] = {}
        for eid, neighbor in self.neighbors(b, "both"):
            from_b.setdefault(neighbor, []).append(eid)
        paths: list[TwoHopPath] = []
        for eid_first, mid in self.neighbors(a, "both"):
            if mid == a or mid == b or mid not in from_b:
                continue
            first = self.edges_by_id[eid_first]
            for eid_second in from_b[mid]:
                if eid_second == eid_first:
                    continue
                second = self.edges_by_id[eid_second]
                paths.append(
                    TwoHopPath(
                        first=first,
                        mid=self.nodes[mid],
                        second=second,
                        first_orientation="forward" if first.source == a else "reverse",
                        second_orientation="forward" if second.source == mid else "reverse",
                    )
                )
        paths.sort(key=lambda p: (-p.evidence_count, p.first.id, p.second.id))
        return paths[:limit]


def _parse_node(obj: dict, line_number: int) -> KgNode:
    try:
        node_id = obj["id"]
        name = obj["name"]
        node_type = obj["type"]
    except KeyError as exc:
        raise ParseError(line_number, f"node missing field {exc}") from None
    if not isinstance(node_id, str) or not node_id:
        raise ParseError(line_number, "node id must be a non-empty string")
    if not isinstance(name, str) or not name:
        raise ParseError(line_number, "node name must be a non-empty string")
    if not isinstance(node_type, str) or not node_type:
        raise ParseError(line_number, "node type must be a non-empty string")
    aliases = obj.get("aliases") or []
    if not isinstance(aliases, list) or any(not isinstance(x, str) for x in aliases):
        raise ParseError(line_number, "node aliases must be a list of strings")
    return KgNode(id=node_id, name=name, node_type=node_type, aliases=tuple(aliases))


def _parse_edge(obj: dict, line_number: int) -> KgEdge:
    try:
        edge_id = obj["id"]
        source = obj["source"]
        target = obj["target"]
        relation = obj["relation"]
    except KeyError as exc:
        raise ParseError(line_number, f"edge missing field {exc}") from None
    for value, label in ((edge_id, "id"), (source, "source"), (target, "target")):
        if not isinstance(value, str) or not value:
            raise ParseError(line_number, f"edge {label} must be a non-empty string")
    if not isinstance(relation, str) or not relation:
        raise ParseError(line_number, "edge relation must be a non-empty string")
    raw_evidence = obj.get("evidence") or []
    if not isinstance(raw_evidence, list):
        raise ParseError(line_number, "edge evidence must be a list")
    evidence: list[Evidence] = []
    seen_sources: set[str] = set()
    for item in raw_evidence:
        if not isinstance(item, dict) or not item.get("source_id"):
            raise ParseError(line_number, "evidence items need a source_id")
        source_id = item["source_id"]
        if source_id in seen_sources:
            raise ParseError(line_number, f"duplicate evidence source_id {source_id}")
        seen_sources.add(source_id)
        evidence.append(
            Evidence(source_id=source_id, title=item.get("title", ""), year=item.get("year"))
        )
    return KgEdge(
        id=edge_id, source=source, target=target, relation=relation, evidence=tuple(evidence)
    )


def load_graph(path: str | Path) -> KnowledgeGraph:
    """Load a graph from a UTF-8 JSON-Lines file.

    Each non-empty line is an object with a "kind" of "node" or "edge".
    Nodes may appear after the edges that reference them; endpoint checks
    run once the whole file is read.
    """
    nodes: list[KgNode] = []
    edges: list[KgEdge] = []
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_number, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(line_number, "expected a JSON object")
            kind = obj.get("kind")
            if kind == "node":
                nodes.append(_parse_node(obj, line_number))
            elif kind == "edge":
                edges.append(_parse_edge(obj, line_number))
            else:
                raise ParseError(line_number, f"unknown kind {kind!r}")
    return KnowledgeGraph(nodes, edges)
