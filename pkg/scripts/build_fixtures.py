"""Regenerate the packaged fixture data.

Produces three artifact groups under src/kgchat/fixtures/:

  embeddings/supplements.json   vector table for the fixture provider
  transcripts/<template>/*.json recorded chat transcripts for replay mode
  sessions/case3.jsonl          a three-step exploration event log,
                                generated by running the real pipeline

The embedding table places relation paraphrases on small rotations of a
shared base axis per relation concept, so equivalence (cosine >= 0.94)
holds exactly where intended and nowhere else; entity names get salted
hash vectors. The script verifies all of that before writing anything.

Run from the repository root after an editable install:

    python scripts/build_fixtures.py
"""

from __future__ import annotations

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from kgchat.config import fixture_root  # noqa: E402
from kgchat.embeddings import FixtureProvider, cosine, hash_vector, normalize_text  # noqa: E402
from kgchat.gateway import ANNOTATE_TEMPLATE, CHAT_TEMPLATE, SCOPE_TEMPLATE, fixture_key  # noqa: E402
from kgchat.kg import load_graph  # noqa: E402

DIMENSION = 16
DETAIL_AXIS = 9
GINKGO_AXIS = 10

# relation concept -> (base axis, [(term, rotation angle rad), ...])
RELATION_CLUSTERS = {
    "prevents": (0, [("prevents", 0.0), ("prevent", 0.10),
                     ("potential benefits in slowing the progression of", 0.30)]),
    "treats": (1, [("treats", 0.0), ("treat", 0.10)]),
    "affects": (2, [("affects", 0.0), ("helpful for", 0.28), ("reducing", 0.20),
                    ("managing", 0.32), ("slowing down the progression of", 0.25),
                    ("may slow the progression of", 0.30)]),
    "coexists_with": (3, [("coexists_with", 0.0), ("coexists with", 0.10)]),
    "contains": (4, [("contains", 0.0), ("containing", 0.10)]),
    "damages": (5, [("damages", 0.0), ("damage", 0.10)]),
    "reduces": (6, [("reduces", 0.0), ("reduce", 0.10)]),
    "benefits": (7, [("benefits", 0.0), ("benefit", 0.10)]),
    "protect": (8, [("protect", 0.0)]),
}

THETA_R = 0.94
THETA_N = 0.85
GINKGO_SIMILARITY = 0.93


def axis(i: int) -> np.ndarray:
    v = np.zeros(DIMENSION)
    v[i] = 1.0
    return v


def rotated(base_axis: int, phi: float) -> np.ndarray:
    return math.cos(phi) * axis(base_axis) + math.sin(phi) * axis(DETAIL_AXIS)


def build_vector_table(graph) -> dict[str, list[float]]:
    vectors: dict[str, np.ndarray] = {}
    for _, (base, terms) in RELATION_CLUSTERS.items():
        for term, phi in terms:
            vectors[normalize_text(term)] = rotated(base, phi)
    vectors["ginkgo biloba"] = axis(GINKGO_AXIS)
    vectors["ginkgo biloba extract"] = (
        GINKGO_SIMILARITY * axis(GINKGO_AXIS)
        + math.sqrt(1.0 - GINKGO_SIMILARITY**2) * axis(DETAIL_AXIS)
    )
    entity_terms = []
    for node in graph.nodes.values():
        entity_terms.append(node.name)
        entity_terms.extend(node.aliases)
    for term in entity_terms:
        key = normalize_text(term)
        if key not in vectors:
            vectors[key] = hash_vector("fixture-table:" + key, DIMENSION)
    return {term: [float(x) for x in vec] for term, vec in sorted(vectors.items())}


def verify_vector_table(table: dict[str, list[float]], graph) -> None:
    vectors = {t: np.array(v) for t, v in table.items()}
    # intra-cluster equivalence, cross-cluster separation
    for name, (_, terms) in RELATION_CLUSTERS.items():
        base_term = normalize_text(terms[0][0])
        for term, _ in terms:
            sim = cosine(vectors[normalize_text(term)], vectors[base_term])
            assert sim >= THETA_R, f"{term} drifted out of cluster {name}: {sim}"
        for other_name, (_, other_terms) in RELATION_CLUSTERS.items():
            if other_name == name:
                continue
            for term, _ in terms:
                for other_term, _ in other_terms:
                    sim = cosine(vectors[normalize_text(term)], vectors[normalize_text(other_term)])
                    assert sim < THETA_R, f"{term} vs {other_term} too similar: {sim}"
    # entity separation: nothing accidentally above the match threshold
    entity_keys = set()
    for node in graph.nodes.values():
        entity_keys.add(normalize_text(node.name))
        entity_keys.update(normalize_text(a) for a in node.aliases)
    intended = {("ginkgo biloba", "ginkgo biloba extract")}
    for a in sorted(entity_keys):
        for b in sorted(entity_keys):
            if a >= b:
                continue
            sim = cosine(vectors[a], vectors[b])
            if (a, b) in intended or (b, a) in intended:
                assert THETA_N <= sim < THETA_R, f"{a} vs {b}: {sim}"
            else:
                assert sim < THETA_N, f"{a} vs {b} accidentally similar: {sim}"
    print(f"vector table verified: {len(table)} terms, dimension {DIMENSION}")


# (conversation id, [(question, in-scope, answer or None for chat), ...])
CONVERSATIONS = [
    (
        "case1",
        [
            (
                "Can Procaine slow the progression of Alzheimer's disease?",
                True,
                "[Procaine]($n1) may have [potential benefits in slowing the "
                "progression of]($r1, $n1, $n2) [Alzheimer's Disease]($n2). Some "
                "studies describe improved cognitive outcomes in early disease.",
            ),
        ],
    ),
    (
        "case2",
        [
            (
                "Can rivastigmine treat AD?",
                True,
                "[Rivastigmine]($n1) is approved to [treat]($r1, $n1, $n2) mild to "
                "moderate [Alzheimer's disease]($n2).",
            ),
            (
                "Can you tell me more about Rivastigmine and Disorders?",
                True,
                "[Rivastigmine]($n1) is also used to [treat]($r1, $n1, $n2) "
                "[Parkinson's disease dementia]($n2).",
            ),
        ],
    ),
    (
        "case3",
        [
            (
                "Is vitamin E helpful for Alzheimer's disease?",
                True,
                "[Vitamin E]($n1) may be [helpful for]($r1, $n1, $n2) [Alzheimer's "
                "disease]($n2), and it has been studied for slowing cognitive decline.",
            ),
            (
                "Can you tell me more about Alzheimer's Disease and Drugs?",
                True,
                "[Procaine]($n1) may [prevent]($r1, $n1, $n2) [Alzheimer's disease]($n2), "
                "and [Rivastigmine]($n3) is approved to [treat]($r2, $n3, $n2) it.",
            ),
            (
                "Can you tell me more about Alzheimer's Disease and Disorders?",
                True,
                "[Alzheimer's disease]($n1) often [coexists with]($r1, $n1, $n2) "
                "[Parkinson's disease dementia]($n2) in older adults.",
            ),
        ],
    ),
    (
        "fig6b",
        [
            (
                "Does fish oil contain Omega-3 fatty acids?",
                True,
                "[fish oil]($n1) is known for [containing]($r1, $n1, $n2) a rich "
                "content of [Omega-3 fatty acids]($n2).",
            ),
        ],
    ),
    (
        "fig6a",
        [
            (
                "Can Ginkgo biloba help with Alzheimer's disease?",
                True,
                "[Ginkgo biloba]($n1) may [benefit]($r1, $n1, $n2) [Alzheimer's "
                "Disease]($n2) according to some reports.",
            ),
        ],
    ),
    (
        "offtopic",
        [
            (
                "What is the capital of France?",
                False,
                "The capital of France is Paris.",
            ),
        ],
    ),
]

CHUNK_SIZE = 9  # deliberately splits markers across chunks


def chunked(text: str) -> list[str]:
    return [text[i : i + CHUNK_SIZE] for i in range(0, len(text), CHUNK_SIZE)]


def write_fixture(root: Path, template_name: str, key: str, prompt: str, chunks: list[str]) -> None:
    path = root / template_name / f"{key}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"key": key, "template": template_name, "prompt": prompt, "chunks": chunks}
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def build_transcripts(graph, transcripts_dir: Path) -> None:
    if transcripts_dir.exists():
        shutil.rmtree(transcripts_dir)
    kg_types = ", ".join(graph.node_types) + " (dietary supplements and neurodegenerative conditions)"
    count = 0
    for _, turns in CONVERSATIONS:
        history: list[str] = []
        for question, in_scope, answer in turns:
            history_summary = "; ".join(history[-3:]) if history else "(none)"
            scope_system, scope_user = SCOPE_TEMPLATE.render(question, kg_types, history_summary)
            scope_key = fixture_key(SCOPE_TEMPLATE.name, scope_system, scope_user)
            write_fixture(
                transcripts_dir,
                SCOPE_TEMPLATE.name,
                scope_key,
                f"{scope_system} / {question}",
                ["yes" if in_scope else "no"],
            )
            template = ANNOTATE_TEMPLATE if in_scope else CHAT_TEMPLATE
            system, user = template.render(question, kg_types, history_summary)
            key = fixture_key(template.name, system, user)
            write_fixture(transcripts_dir, template.name, key, f"{system} / {question}", chunked(answer))
            history.append(question)
            count += 2
    print(f"wrote {count} transcript fixtures to {transcripts_dir}")


def build_case3_log(sessions_dir: Path) -> None:
    from kgchat import recommend, session as session_mod
    from kgchat.config import load_config
    from kgchat.service import build_pipeline, counter_clock

    with tempfile.TemporaryDirectory() as tmp:
        config = load_config(None, {"store_path": tmp, "mode": "replay"})
        pipeline = build_pipeline(config, clock=counter_clock())
        pipeline.create_session("case3")
        case3 = dict((cid, turns) for cid, turns in CONVERSATIONS)["case3"]
        questions = [q for q, _, _ in case3]
        for question in questions[:2]:
            for event_type, payload in pipeline.handle_message("case3", question):
                if event_type == "error":
                    raise RuntimeError(f"case3 exchange failed: {payload}")
        dismissed_item = recommend.PoolItem("C0002", "node", "C0009", "Supplements")
        pipeline.dismiss("case3", recommend.item_id(dismissed_item))
        for event_type, payload in pipeline.handle_message("case3", questions[2]):
            if event_type == "error":
                raise RuntimeError(f"case3 exchange failed: {payload}")
        # a view-only navigation back to the first step closes the log
        state = pipeline.load_session("case3")
        nav = session_mod.SessionEvent(
            sequence=len(state.events) + 1,
            timestamp=pipeline.clock(),
            kind=session_mod.NAVIGATION,
            payload={"step": 0},
        )
        session_mod.apply_event(state, nav, pipeline.graph)
        pipeline.store.save(state)
        sessions_dir.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(Path(tmp) / "case3.events.jsonl", sessions_dir / "case3.jsonl")
        final_progress = recommend.progress(state.pool)
        print(
            f"wrote case3 log: {len(state.events)} events, {len(state.steps)} steps, "
            f"final progress {final_progress:.4f}"
        )


def main() -> None:
    root = fixture_root()
    graph = load_graph(root / "kg" / "supplements.jsonl")
    table = build_vector_table(graph)
    verify_vector_table(table, graph)
    embeddings_path = root / "embeddings" / "supplements.json"
    embeddings_path.parent.mkdir(parents=True, exist_ok=True)
    embeddings_path.write_text(
        json.dumps({"dimension": DIMENSION, "vectors": table}, indent=1) + "\n",
        encoding="utf-8",
    )
    print(f"wrote embedding table to {embeddings_path}")
    # drop any stale sidecar caches so reloads rebuild against the new table
    for stale in embeddings_path.parent.parent.glob("kg/*.emb-*.json"):
        stale.unlink()
    build_transcripts(graph, root / "transcripts")
    provider = FixtureProvider(embeddings_path)
    assert provider.dimension == DIMENSION
    build_case3_log(root / "sessions")


if __name__ == "__main__":
    main()
