"""Render graphs as natural-language connectivity text and plan
token-budgeted node chunks.

Each node becomes exactly one line, ``Node <i> is connected to: <n1>,
<n2>, ...`` with neighbors ascending. The phrasing is frozen; golden
tests pin the bytes because downstream model accuracy is sensitive to
serialization drift.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import ChunkBudgetError, ConfigError, DataError
from .graph import Graph

__all__ = [
    "GraphText",
    "NodeChunk",
    "serialize",
    "serialize_nodes",
    "estimate_tokens",
    "plan_chunks",
    "chunk_plan_json",
    "parse_graph_text",
]

ISOLATED_MARKER = "(none)"

TokenEstimator = Callable[[str], int]


def estimate_tokens(text: str) -> int:
    """Deterministic token estimate: ceil(len(text) / 4).

    A crude stand-in for provider tokenizers; strictly monotone
    non-decreasing in text length. An alternative estimator can be
    injected wherever this default is used.
    """
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class GraphText:
    """One connectivity line per node, ascending by node id."""

    lines: tuple[str, ...]
    full_text: str
    char_count: int
    estimated_tokens: int

    @classmethod
    def from_lines(
        cls, lines: Sequence[str], estimator: TokenEstimator | None = None
    ) -> "GraphText":
        est = estimator or estimate_tokens
        full = "\n".join(lines)
        return cls(
            lines=tuple(lines),
            full_text=full,
            char_count=len(full),
            estimated_tokens=est(full),
        )


def _node_line(graph: Graph, node: int, isolated_marker: str) -> str:
    nbrs = graph.neighbors(node)
    if not nbrs:
        return f"Node {node} is connected to: {isolated_marker}"
    return f"Node {node} is connected to: " + ", ".join(str(n) for n in nbrs)


def serialize(
    graph: Graph,
    *,
    token_estimator: TokenEstimator | None = None,
    isolated_marker: str = ISOLATED_MARKER,
) -> GraphText:
    """Full connectivity text for a nonempty graph.

    Every neighbor list is emitted in full (no elision): truncation
    would silently discard edges the downstream model needs.
    """
    if graph.node_count == 0:
        raise DataError("cannot serialize an empty graph")
    lines = [_node_line(graph, n, isolated_marker) for n in graph.node_ids]
    return GraphText.from_lines(lines, token_estimator)


def serialize_nodes(
    graph: Graph,
    nodes: Iterable[int],
    *,
    token_estimator: TokenEstimator | None = None,
    isolated_marker: str = ISOLATED_MARKER,
) -> GraphText:
    """Connectivity text restricted to ``nodes`` (ascending). Lines are
    byte-identical to their occurrence in the full serialization."""
    ordered = sorted(set(nodes))
    if not ordered:
        raise DataError("cannot serialize an empty node selection")
    lines = [_node_line(graph, n, isolated_marker) for n in ordered]
    return GraphText.from_lines(lines, token_estimator)


@dataclass(frozen=True)
class NodeChunk:
    """A token-budgeted slice of the serialization.

    ``member_nodes`` partition the graph across chunks; ``anchor_nodes``
    repeat the previous chunk's trailing members so chunk-local community
    labels can be aligned during merging.
    """

    index: int
    member_nodes: tuple[int, ...]
    anchor_nodes: tuple[int, ...]
    chunk_text: GraphText

    @property
    def requested_nodes(self) -> frozenset[int]:
        return frozenset(self.member_nodes) | frozenset(self.anchor_nodes)


def plan_chunks(
    graph: Graph,
    budget_tokens: int,
    anchor_count: int,
    *,
    overhead_tokens: int = 0,
    token_estimator: TokenEstimator | None = None,
    isolated_marker: str = ISOLATED_MARKER,
) -> list[NodeChunk]:
    """Greedy ascending packing of node lines under a token budget.

    Every chunk satisfies ``estimated_tokens + overhead_tokens <=
    budget_tokens``. Each chunk after the first carries the previous
    chunk's last ``anchor_count`` members as anchors (their lines
    repeated verbatim). If everything fits, exactly one anchor-free
    chunk is returned.
    """
    if anchor_count < 0:
        raise ConfigError("anchor_count must be >= 0")
    if budget_tokens <= overhead_tokens:
        raise ConfigError(
            f"budget of {budget_tokens} tokens does not even cover the "
            f"prompt overhead ({overhead_tokens})"
        )
    est = token_estimator or estimate_tokens
    line_of = {
        n: _node_line(graph, n, isolated_marker) for n in graph.node_ids
    }

    def fits(nodes: list[int]) -> bool:
        text = "\n".join(line_of[n] for n in nodes)
        return est(text) + overhead_tokens <= budget_tokens

    chunks: list[NodeChunk] = []
    anchors: list[int] = []
    members: list[int] = []

    def close_chunk() -> None:
        nodes = sorted(anchors + members)
        chunks.append(
            NodeChunk(
                index=len(chunks),
                member_nodes=tuple(members),
                anchor_nodes=tuple(anchors),
                chunk_text=serialize_nodes(
                    graph,
                    nodes,
                    token_estimator=token_estimator,
                    isolated_marker=isolated_marker,
                ),
            )
        )

    for node in graph.node_ids:
        if fits(sorted(anchors + members + [node])):
            members.append(node)
            continue
        if not members:
            raise ChunkBudgetError(
                node,
                f"line for node {node} does not fit the budget of "
                f"{budget_tokens} tokens (overhead {overhead_tokens}, "
                f"{len(anchors)} anchor lines)",
            )
        prev_members = members
        close_chunk()
        anchors = prev_members[-anchor_count:] if anchor_count else []
        members = [node]
        if not fits(sorted(anchors + members)):
            raise ChunkBudgetError(
                node,
                f"line for node {node} does not fit the budget of "
                f"{budget_tokens} tokens even in a fresh chunk "
                f"({len(anchors)} anchor lines, overhead {overhead_tokens})",
            )
    close_chunk()
    return chunks


def chunk_plan_json(chunks: Sequence[NodeChunk]) -> str:
    """JSON audit description of a chunk plan."""
    plan = [
        {
            "index": c.index,
            "member_ids": list(c.member_nodes),
            "anchor_ids": list(c.anchor_nodes),
            "estimated_tokens": c.chunk_text.estimated_tokens,
        }
        for c in chunks
    ]
    return json.dumps(plan, indent=2, sort_keys=True)


_LINE_RE = re.compile(r"^Node (\d+) is connected to: (.*)$")


def parse_graph_text(text: str) -> Graph:
    """Reconstruct the (undirected) graph from serialization text.

    Round-trips with :func:`serialize` up to symmetrization: parsing the
    serialization of any graph reproduces its symmetrized edge set.
    """
    nodes: set[int] = set()
    edges: set[tuple[int, int]] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise DataError(f"line {lineno} is not a connectivity line: {line!r}")
        node = int(m.group(1))
        nodes.add(node)
        rest = m.group(2).strip()
        if rest == ISOLATED_MARKER or not rest:
            continue
        for tok in rest.split(","):
            tok = tok.strip()
            if not tok.isdigit():
                raise DataError(
                    f"line {lineno}: bad neighbor token {tok!r}"
                )
            other = int(tok)
            if other == node:
                raise DataError(f"line {lineno}: self-loop on node {node}")
            edges.add((min(node, other), max(node, other)))
            nodes.add(other)
    if not nodes:
        raise DataError("no connectivity lines found")
    return Graph.from_edges(edges, directed=False, nodes=nodes)
