"""Deterministic label propagation, the classical sanity baseline.

Exists to make the pipeline testable offline, not to win benchmarks:
the update order is a seed-shuffled fixed sweep and ties go to the
smallest label, so (graph, config) fully determines the output.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass

from .errors import ConfigError, DataError
from .graph import Graph, Partition

__all__ = ["LPConfig", "label_propagation"]


@dataclass(frozen=True)
class LPConfig:
    seed: int = 0
    max_iterations: int = 100

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")


def label_propagation(graph: Graph, config: LPConfig | None = None) -> Partition:
    """Propagate labels to neighbor consensus; smallest label wins ties.

    Every node starts labeled by its own id. Sweeps visit nodes in one
    seed-shuffled order, fixed across sweeps, updating in place; a node
    adopts the most frequent label among its neighbors. Stops at the
    first sweep with no change, or after max_iterations. Covers every
    node, and a component's labels always come from within it.
    """
    if config is None:
        config = LPConfig()
    if graph.directed:
        raise DataError(
            "label propagation requires an undirected graph; symmetrize first"
        )
    if graph.node_count == 0:
        raise DataError("cannot propagate labels on an empty graph")
    labels: dict[int, int] = {n: n for n in graph.node_ids}
    order = list(graph.node_ids)
    random.Random(config.seed).shuffle(order)
    for _ in range(config.max_iterations):
        changed = False
        for node in order:
            nbrs = graph.adjacency[node]
            if not nbrs:
                continue
            freq = Counter(labels[n] for n in nbrs)
            top = max(freq.values())
            best = min(lab for lab, c in freq.items() if c == top)
            if best != labels[node]:
                labels[node] = best
                changed = True
        if not changed:
            break
    return Partition({n: str(lab) for n, lab in labels.items()})
