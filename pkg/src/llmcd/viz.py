"""Graphviz DOT export of a partitioned graph.

Communities get fill colors from a fixed palette, assigned by sorted
label and cycling when there are more communities than colors, so the
same partition always renders the same bytes. Nodes the partition does
not cover are painted neutral gray.
"""

from __future__ import annotations

from .errors import DataError
from .graph import Graph, Partition, symmetrize

__all__ = ["export_dot", "PALETTE", "UNCOVERED_COLOR"]

PALETTE = (
    "#4c72b0",
    "#dd8452",
    "#55a868",
    "#c44e52",
    "#8172b3",
    "#937860",
    "#da8bc3",
    "#ccb974",
    "#64b5cd",
    "#8c8c8c",
)

UNCOVERED_COLOR = "#cccccc"


def export_dot(graph: Graph, partition: Partition) -> str:
    """Undirected DOT text: one node statement per graph node, one edge
    statement per undirected edge. Directed graphs are symmetrized."""
    if len(partition) == 0:
        raise DataError("partition covers no nodes; nothing to color")
    g = symmetrize(graph)
    color_of = {
        label: PALETTE[i % len(PALETTE)]
        for i, label in enumerate(sorted(partition.labels))
    }
    lines = ["graph communities {", "  node [style=filled];"]
    for node in g.node_ids:
        if node in partition.covered:
            color = color_of[partition.label_of(node)]
        else:
            color = UNCOVERED_COLOR
        lines.append(f'  {node} [fillcolor="{color}"];')
    for u, v in sorted(g.edges):
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
