"""Shared test utilities: random graph construction, brute-force oracles,
and a generator of valid annotated strings with reference output.

The oracles deliberately re-derive everything from the raw edge list with
plain Python so they share no code path with the implementations they
check.
"""

from __future__ import annotations

import math
import random
import string

from kgchat.kg import Evidence, KgEdge, KgNode, KnowledgeGraph

NODE_TYPES = ["Drugs", "Supplements", "Disorders", "Physiology", "Anatomy"]
RELATIONS = ["TREATS", "PREVENTS", "AFFECTS", "COEXISTS_WITH", "REDUCES", "DAMAGES"]


def random_graph(rng: random.Random, max_nodes: int = 30, max_edges: int = 60) -> KnowledgeGraph:
    n_nodes = rng.randint(1, max_nodes)
    nodes = []
    for i in range(n_nodes):
        aliases = tuple(
            "".join(rng.choices(string.ascii_lowercase, k=rng.randint(2, 6)))
            for _ in range(rng.randint(0, 2))
        )
        nodes.append(
            KgNode(
                id=f"n{i:04d}",
                name=f"term {i} " + "".join(rng.choices(string.ascii_lowercase, k=4)),
                node_type=rng.choice(NODE_TYPES),
                aliases=aliases,
            )
        )
    n_edges = rng.randint(0, max_edges)
    edges = []
    for j in range(n_edges):
        source = rng.choice(nodes).id
        target = rng.choice(nodes).id  # self-loops and parallels allowed
        evidence = tuple(
            Evidence(source_id=f"PM{j:04d}{k}", title=f"study {j}.{k}", year=2000 + k)
            for k in range(rng.randint(0, 3))
        )
        edges.append(
            KgEdge(
                id=f"e{j:04d}",
                source=source,
                target=target,
                relation=rng.choice(RELATIONS),
                evidence=evidence,
            )
        )
    return KnowledgeGraph(nodes, edges)


# --- brute-force graph oracles ---------------------------------------------


def brute_neighbors(graph: KnowledgeGraph, node: str, direction: str) -> set[tuple[str, str]]:
    found = set()
    for edge in graph.edges:
        if direction in ("out", "both") and edge.source == node:
            found.add((edge.id, edge.target))
        if direction in ("in", "both") and edge.target == node:
            found.add((edge.id, edge.source))
    return found


def brute_direct_edges(graph: KnowledgeGraph, a: str, b: str) -> list[tuple[str, str]]:
    result = []
    for edge in graph.edges:
        if {edge.source, edge.target} == {a, b}:
            orientation = "forward" if (edge.source == a and edge.target == b) else "reverse"
            if a == b:
                orientation = "forward"
            result.append((edge.id, orientation))
    return sorted(result)


def brute_two_hop(graph: KnowledgeGraph, a: str, b: str) -> set[tuple]:
    paths = set()
    for e1 in graph.edges:
        if a not in (e1.source, e1.target):
            continue
        mid = e1.target if e1.source == a else e1.source
        if mid in (a, b):
            continue
        for e2 in graph.edges:
            if e2.id == e1.id:
                continue
            if mid not in (e2.source, e2.target):
                continue
            other = e2.target if e2.source == mid else e2.source
            if e2.source == e2.target:  # self-loop on mid reaches b only if b == mid
                continue
            if other != b:
                continue
            first_orient = "forward" if e1.source == a else "reverse"
            second_orient = "forward" if e2.source == mid else "reverse"
            paths.add((e1.id, mid, e2.id, first_orient, second_orient))
    return paths


# --- brute-force embedding / matching oracle --------------------------------


def pure_cosine(a, b) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(y * y for y in b))
    return dot / (norm_a * norm_b)


def brute_argmax_match(graph: KnowledgeGraph, provider, surface_vector) -> tuple[str | None, float]:
    """Independent argmax over every node name/alias embedding."""
    from kgchat.embeddings import normalize_text

    best_sim = None
    best_node = None
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        for term in (node.name, *node.aliases):
            normalized = normalize_text(term)
            if not normalized:
                continue
            sim = pure_cosine(list(surface_vector), list(provider.embed_normalized(normalized)))
            if best_sim is None or sim > best_sim:
                best_sim = sim
                best_node = node_id
            # equal similarity keeps the earlier (smaller) node id
    if best_sim is None:
        return None, -1.0
    return best_node, best_sim


# --- brute-force recommendation oracles --------------------------------------


def brute_one_hop_items(graph: KnowledgeGraph, entity: str) -> set[tuple]:
    items = set()
    for edge in graph.edges:
        if entity not in (edge.source, edge.target):
            continue
        neighbor = edge.target if edge.source == entity else edge.source
        items.add((entity, "node", neighbor))
        items.add((entity, "type", graph.nodes[neighbor].node_type))
    return items


def brute_generate_set(context, pool, graph: KnowledgeGraph) -> set[tuple]:
    """The recommendation set-builder evaluated directly from the edge list."""
    focus_nodes = {node for query in context.queries for node in query.focus}
    goal_targets = {(item.kind, item.target) for item in pool.goal}
    excluded = {(i.source, i.kind, i.target) for i in (pool.dismissed | pool.explored)}
    result = set()
    for node in focus_nodes:
        if node not in graph.nodes:
            continue
        for kind, target in goal_targets:
            reachable = False
            for edge in graph.edges:
                if node not in (edge.source, edge.target):
                    continue
                neighbor = edge.target if edge.source == node else edge.source
                if kind == "node" and neighbor == target:
                    reachable = True
                    break
                if kind == "type" and graph.nodes[neighbor].node_type == target:
                    reachable = True
                    break
            if reachable and (node, kind, target) not in excluded:
                result.add((node, kind, target))
    return result


# --- annotated-string generator with reference output ------------------------

_WORDS = [
    "omega", "retina", "baseline", "tissue", "signal", "uptake", "serum",
    "cortex", "plasma", "fiber", "enzyme", "trial", "cohort", "dose",
]


def _words(rng: random.Random, low: int = 1, high: int = 4) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(low, high)))


def generate_annotated(rng: random.Random) -> tuple[str, str, list[tuple[str, str, str]]]:
    """(raw annotated string, reference plain text, reference triples).

    Only grammar-valid markers are produced; every relation's entity
    references resolve somewhere in the string (possibly later).
    """
    raw_parts: list[str] = []
    plain_parts: list[str] = []
    entity_ids: list[int] = []
    surfaces: dict[int, str] = {}
    triples: list[tuple[int, str, int]] = []
    used_relation_ids: set[int] = set()
    pending_entities = 0

    def add_plain():
        text = _words(rng) + rng.choice([" ", ". ", ", ", " "])
        raw_parts.append(text)
        plain_parts.append(text)

    def add_entity():
        nonlocal pending_entities
        marker = rng.randint(1, 99)
        while marker in surfaces:
            marker = rng.randint(1, 99)
        surface = _words(rng, 1, 3)
        surfaces[marker] = surface
        entity_ids.append(marker)
        raw_parts.append(f"[{surface}]($n{marker})")
        plain_parts.append(surface)
        pending_entities = max(0, pending_entities - 1)

    def add_relation():
        nonlocal pending_entities
        if len(entity_ids) + pending_entities < 2 or rng.random() < 0.3:
            # reference entities that only appear later in the stream
            pending_entities += 2
            subject = _fresh_id(rng, surfaces, reserve=2)
            obj = subject + 1
            surfaces[subject] = None  # reserved, filled below
            surfaces[obj] = None
            later_subject = _words(rng, 1, 2)
            later_object = _words(rng, 1, 2)
            marker = _fresh_relation(rng, used_relation_ids)
            surface = _words(rng, 1, 2)
            separator1 = "," + " " * rng.randint(0, 2)
            separator2 = "," + " " * rng.randint(0, 2)
            raw_parts.append(f"[{surface}]($r{marker}{separator1}$n{subject}{separator2}$n{obj})")
            plain_parts.append(surface)
            triples.append((subject, surface, obj))
            # immediately emit the two entities afterwards (order varies)
            for mid, msurface in rng.sample(
                [(subject, later_subject), (obj, later_object)], 2
            ):
                filler = " " + _words(rng, 1, 2) + " "
                raw_parts.append(filler)
                plain_parts.append(filler)
                surfaces[mid] = msurface
                entity_ids.append(mid)
                raw_parts.append(f"[{msurface}]($n{mid})")
                plain_parts.append(msurface)
            pending_entities = 0
        else:
            subject, obj = rng.sample(entity_ids, 2)
            marker = _fresh_relation(rng, used_relation_ids)
            surface = _words(rng, 1, 2)
            separator1 = "," + " " * rng.randint(0, 2)
            separator2 = "," + " " * rng.randint(0, 2)
            raw_parts.append(f"[{surface}]($r{marker}{separator1}$n{subject}{separator2}$n{obj})")
            plain_parts.append(surface)
            triples.append((subject, surface, obj))

    actions = [add_plain, add_entity, add_relation]
    for _ in range(rng.randint(1, 12)):
        rng.choice(actions)()

    raw = "".join(raw_parts)
    plain = "".join(plain_parts)
    reference = [
        (surfaces[s], relation_surface, surfaces[o]) for s, relation_surface, o in triples
    ]
    return raw, plain, reference


def _fresh_id(rng: random.Random, surfaces: dict, reserve: int = 1) -> int:
    marker = rng.randint(100, 900)
    while any(marker + offset in surfaces for offset in range(reserve)):
        marker = rng.randint(100, 900)
    return marker


def _fresh_relation(rng: random.Random, used: set[int]) -> int:
    marker = rng.randint(1, 999)
    while marker in used:
        marker = rng.randint(1, 999)
    used.add(marker)
    return marker


def random_chunks(rng: random.Random, text: str) -> list[str]:
    """Split text at random boundaries (possibly empty chunks)."""
    if not text:
        return [""]
    chunks = []
    i = 0
    while i < len(text):
        size = rng.randint(1, max(1, min(12, len(text) - i)))
        chunks.append(text[i : i + size])
        i += size
    if rng.random() < 0.2:
        chunks.insert(rng.randint(0, len(chunks)), "")
    return chunks
