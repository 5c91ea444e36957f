"""Generate the bundled datasets under src/llmcd/data/.

karate comes from networkx's copy of the real Zachary karate-club
network with its two-faction ground truth. The other five are
synthetic stand-ins built to match the published benchmark's summary
statistics exactly (nodes, edges, communities, directedness): each
community gets a path backbone so no node is isolated, then random
edges (mostly intra-community) fill up to the exact edge count.
Everything is seeded, so reruns reproduce the committed files
byte-for-byte.

Run from the repo root after an editable install:
    python scripts/make_datasets.py
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

import networkx as nx

from llmcd.graph import Graph, Partition, format_edge_list, format_labels

DATA_ROOT = Path(__file__).resolve().parent.parent / "src" / "llmcd" / "data"

INTRA_PROBABILITY = 0.88
MAX_INTRA_ATTEMPTS = 200

SYNTHETIC_SPECS = [
    # name, nodes, edges, communities, directed, seed
    ("football", 115, 613, 12, False, 1101),
    ("webkb", 187, 298, 5, True, 1102),
    ("terrorist", 645, 3172, 6, True, 1103),
    ("cora", 2708, 5278, 7, True, 1104),
    ("citeseer", 3279, 4552, 6, True, 1105),
]


def write_dataset(name: str, graph: Graph, truth: Partition) -> None:
    out = DATA_ROOT / name
    out.mkdir(parents=True, exist_ok=True)
    (out / "edges.txt").write_text(format_edge_list(graph), encoding="utf-8")
    (out / "labels.txt").write_text(format_labels(truth), encoding="utf-8")
    print(f"wrote {name}: {graph.node_count} nodes, {graph.edge_count} edges")


def make_karate() -> tuple[Graph, Partition]:
    g = nx.karate_club_graph()
    graph = Graph.from_edges(
        ((u, v) for u, v in g.edges()), directed=False, nodes=g.nodes()
    )
    club_label = {"Mr. Hi": "instructor", "Officer": "officer"}
    truth = Partition({n: club_label[g.nodes[n]["club"]] for n in g.nodes()})
    return graph, truth


def community_blocks(n_nodes: int, n_comms: int) -> list[list[int]]:
    """Contiguous blocks of nearly equal size."""
    base, extra = divmod(n_nodes, n_comms)
    blocks = []
    start = 0
    for c in range(n_comms):
        size = base + (1 if c < extra else 0)
        blocks.append(list(range(start, start + size)))
        start += size
    return blocks


def make_synthetic(
    n_nodes: int, n_edges: int, n_comms: int, directed: bool, seed: int
) -> tuple[Graph, Partition]:
    rng = random.Random(seed)
    blocks = community_blocks(n_nodes, n_comms)
    truth = Partition(
        {node: f"c{c}" for c, block in enumerate(blocks) for node in block}
    )

    edges: set[tuple[int, int]] = set()

    def canonical(u: int, v: int) -> tuple[int, int]:
        return (u, v) if directed else (min(u, v), max(u, v))

    # path backbone keeps every node incident and each community connected
    for block in blocks:
        for a, b in zip(block, block[1:]):
            edges.add(canonical(a, b))
    if len(edges) > n_edges:
        raise SystemExit(
            f"backbone alone exceeds the edge target ({len(edges)} > {n_edges})"
        )

    def sample_intra() -> tuple[int, int] | None:
        for _ in range(MAX_INTRA_ATTEMPTS):
            block = blocks[rng.randrange(n_comms)]
            if len(block) < 2:
                continue
            u, v = rng.sample(block, 2)
            e = canonical(u, v)
            if e not in edges:
                return e
        return None

    def sample_inter() -> tuple[int, int]:
        while True:
            u = rng.randrange(n_nodes)
            v = rng.randrange(n_nodes)
            if u == v or truth.label_of(u) == truth.label_of(v):
                continue
            e = canonical(u, v)
            if e not in edges:
                return e

    while len(edges) < n_edges:
        if rng.random() < INTRA_PROBABILITY:
            e = sample_intra() or sample_inter()
        else:
            e = sample_inter()
        edges.add(e)

    graph = Graph.from_edges(edges, directed=directed, nodes=range(n_nodes))
    assert graph.node_count == n_nodes, graph.node_count
    assert graph.edge_count == n_edges, graph.edge_count
    assert len(truth.labels) == n_comms
    return graph, truth


def main() -> int:
    graph, truth = make_karate()
    assert graph.node_count == 34 and graph.edge_count == 78
    assert len(truth.labels) == 2
    assert graph.neighbors(0)[:8] == (1, 2, 3, 4, 5, 6, 7, 8)
    write_dataset("karate", graph, truth)
    for name, n_nodes, n_edges, n_comms, directed, seed in SYNTHETIC_SPECS:
        graph, truth = make_synthetic(n_nodes, n_edges, n_comms, directed, seed)
        write_dataset(name, graph, truth)
    return 0


if __name__ == "__main__":
    sys.exit(main())
