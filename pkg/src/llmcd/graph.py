"""Immutable graphs, community partitions, and their file formats.

Edge-list format (UTF-8, line oriented):
  - ``u v``: one edge per line, two whitespace-separated non-negative
    integer node ids.
  - lines starting with ``#`` are comments, except ``#nodes:`` headers,
    which declare extra node ids (for isolated nodes): ``#nodes: 7 8 9``.
  - undirected input collapses ``(u, v)`` and ``(v, u)`` into one edge.

Label format: ``node_id label`` per line, ``#`` comments; the label is a
single whitespace-free token and carries no ordinal meaning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import (
    DataError,
    EdgeListParseError,
    LabelFileError,
    UnknownNodeError,
)

__all__ = [
    "Graph",
    "Partition",
    "GraphStats",
    "load_edge_list",
    "load_labels",
    "format_edge_list",
    "format_labels",
    "symmetrize",
    "neighbors",
    "graph_stats",
]


def _canonical_edge(u: int, v: int, directed: bool) -> tuple[int, int]:
    if directed:
        return (u, v)
    return (u, v) if u <= v else (v, u)


def _rebuild_graph(
    edges: list[tuple[int, int]], directed: bool, node_ids: tuple[int, ...]
) -> "Graph":
    return Graph.from_edges(edges, directed=directed, nodes=node_ids)


@dataclass(frozen=True)
class Graph:
    """Validated immutable graph over non-negative integer node ids.

    Undirected edges are stored once in canonical (low, high) order.
    ``adjacency`` maps each node to its ascending neighbor tuple
    (out-neighbors when directed).
    """

    node_ids: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    directed: bool
    adjacency: Mapping[int, tuple[int, ...]] = field(compare=False, repr=False)

    # immutable value object: copying returns self, pickling rebuilds
    def __copy__(self) -> "Graph":
        return self

    def __deepcopy__(self, memo: dict) -> "Graph":
        return self

    def __reduce__(self):
        return (
            _rebuild_graph,
            (sorted(self.edges), self.directed, self.node_ids),
        )

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]],
        *,
        directed: bool = False,
        nodes: Iterable[int] = (),
    ) -> "Graph":
        node_set: set[int] = set()
        edge_set: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u < 0 or v < 0:
                raise DataError(f"negative node id in edge ({u}, {v})")
            if u == v:
                raise DataError(f"self-loop on node {u}")
            edge_set.add(_canonical_edge(u, v, directed))
            node_set.add(u)
            node_set.add(v)
        for n in nodes:
            n = int(n)
            if n < 0:
                raise DataError(f"negative node id {n}")
            node_set.add(n)
        adjacency: dict[int, list[int]] = {n: [] for n in node_set}
        for u, v in edge_set:
            adjacency[u].append(v)
            if not directed:
                adjacency[v].append(u)
        frozen_adj = MappingProxyType(
            {n: tuple(sorted(nbrs)) for n, nbrs in adjacency.items()}
        )
        return cls(
            node_ids=tuple(sorted(node_set)),
            edges=frozenset(edge_set),
            directed=directed,
            adjacency=frozen_adj,
        )

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_node(self, node: int) -> bool:
        return node in self.adjacency

    def neighbors(self, node: int) -> tuple[int, ...]:
        """Ascending neighbor ids of ``node`` (out-neighbors if directed)."""
        try:
            return self.adjacency[node]
        except KeyError:
            raise UnknownNodeError(f"node {node} not in graph") from None


@dataclass(frozen=True)
class Partition:
    """Disjoint community assignment: node id -> opaque string label.

    Labels carry no ordinal meaning; every consumer must be invariant
    under relabeling. ``covered`` is the set of assigned nodes.
    """

    assignments: Mapping[int, str]

    def __init__(self, assignments: Mapping[int, str]):
        normalized: dict[int, str] = {}
        for node, label in assignments.items():
            node = int(node)
            if node < 0:
                raise DataError(f"negative node id {node} in partition")
            label = str(label)
            if not label or label.split() != [label]:
                raise DataError(
                    f"label {label!r} for node {node} must be a single "
                    "whitespace-free token"
                )
            normalized[node] = label
        object.__setattr__(self, "assignments", MappingProxyType(normalized))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return dict(self.assignments) == dict(other.assignments)

    # immutable value object: copying returns self, pickling rebuilds
    def __copy__(self) -> "Partition":
        return self

    def __deepcopy__(self, memo: dict) -> "Partition":
        return self

    def __reduce__(self):
        return (Partition, (dict(self.assignments),))

    @property
    def covered(self) -> frozenset[int]:
        return frozenset(self.assignments)

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(self.assignments.values())

    def __len__(self) -> int:
        return len(self.assignments)

    def label_of(self, node: int) -> str:
        try:
            return self.assignments[node]
        except KeyError:
            raise UnknownNodeError(f"node {node} not covered") from None

    def communities(self) -> dict[str, tuple[int, ...]]:
        """Group covered nodes by label; node tuples ascending."""
        groups: dict[str, list[int]] = {}
        for node, label in self.assignments.items():
            groups.setdefault(label, []).append(node)
        return {lab: tuple(sorted(ns)) for lab, ns in groups.items()}

    def relabel(self, mapping: Mapping[str, str]) -> "Partition":
        """Return a copy with labels mapped through ``mapping``
        (labels absent from the mapping are kept)."""
        return Partition(
            {n: mapping.get(lab, lab) for n, lab in self.assignments.items()}
        )

    def restrict(self, nodes: Iterable[int]) -> "Partition":
        keep = set(nodes)
        return Partition(
            {n: lab for n, lab in self.assignments.items() if n in keep}
        )


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    edge_count: int
    community_count: int | None
    directed: bool


def graph_stats(graph: Graph, truth: Partition | None = None) -> GraphStats:
    """Summary statistics; community count comes from the ground truth."""
    return GraphStats(
        node_count=graph.node_count,
        edge_count=graph.edge_count,
        community_count=len(truth.labels) if truth is not None else None,
        directed=graph.directed,
    )


def load_edge_list(text: str, directed: bool = False) -> Graph:
    """Parse edge-list text into a validated Graph.

    Raises EdgeListParseError (with line number) on malformed lines,
    DataError on self-loops, and DataError on empty input.
    """
    edges: list[tuple[int, int]] = []
    declared: list[int] = []
    saw_content = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("#nodes:"):
                saw_content = True
                for tok in line[len("#nodes:"):].split():
                    try:
                        declared.append(int(tok))
                    except ValueError:
                        raise EdgeListParseError(
                            lineno, f"non-integer node id {tok!r} in #nodes: header"
                        ) from None
            continue
        saw_content = True
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(
                lineno, f"expected two node ids, got {len(tokens)} tokens"
            )
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(
                lineno, f"non-integer token in {line!r}"
            ) from None
        if u < 0 or v < 0:
            raise EdgeListParseError(lineno, f"negative node id in {line!r}")
        if u == v:
            raise DataError(f"self-loop on node {u} (line {lineno})")
        edges.append((u, v))
    if not saw_content:
        raise DataError("empty edge-list input")
    return Graph.from_edges(edges, directed=directed, nodes=declared)


def load_labels(text: str) -> Partition:
    """Parse ``node label`` lines into a Partition.

    A node listed twice with the same label is tolerated; a conflicting
    duplicate is an error.
    """
    assignments: dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise LabelFileError(
                f"line {lineno}: expected 'node label', got {line!r}"
            )
        try:
            node = int(tokens[0])
        except ValueError:
            raise LabelFileError(
                f"line {lineno}: non-integer node id {tokens[0]!r}"
            ) from None
        label = tokens[1]
        if node in assignments and assignments[node] != label:
            raise LabelFileError(
                f"line {lineno}: conflicting assignment for node {node}: "
                f"{assignments[node]!r} vs {label!r}"
            )
        assignments[node] = label
    return Partition(assignments)


def format_edge_list(graph: Graph) -> str:
    """Render a Graph back to edge-list text (round-trips with
    load_edge_list)."""
    lines = [f"{u} {v}" for u, v in sorted(graph.edges)]
    incident = {u for u, _ in graph.edges} | {v for _, v in graph.edges}
    isolated = [n for n in graph.node_ids if n not in incident]
    if isolated:
        lines.insert(0, "#nodes: " + " ".join(str(n) for n in isolated))
    return "\n".join(lines) + "\n"


def format_labels(partition: Partition) -> str:
    """Render a Partition to label-file text (round-trips with
    load_labels)."""
    lines = [f"{n} {partition.assignments[n]}" for n in sorted(partition.covered)]
    return "\n".join(lines) + "\n"


def symmetrize(graph: Graph) -> Graph:
    """Undirected view: union of both edge orientations, deduplicated.

    Idempotent; undirected graphs are returned unchanged.
    """
    if not graph.directed:
        return graph
    return Graph.from_edges(graph.edges, directed=False, nodes=graph.node_ids)


def neighbors(graph: Graph, node: int) -> list[int]:
    """Ascending list of neighbors of ``node``; raises UnknownNodeError
    for ids outside the graph."""
    return list(graph.neighbors(node))
