"""Parse model replies into partitions and merge chunked outputs.

The reply grammar is ``Node:<int>; Community:<token>``, whitespace
tolerant around ':' and ';'. A community token is a contiguous run of
non-whitespace, non-';' characters, so integer ids and names both
parse and a trailing ``; Reason:<...>`` segment (variant 3) stays
separable; reasons are captured raw and never interpreted.

parse_assignments never raises on arbitrary text: junk yields low
coverage plus diagnostics, not exceptions. Chunked replies carry
chunk-local labels, so merging aligns each incoming chunk to the
accumulated canonical partition by majority vote over shared anchor
nodes before adopting its member assignments.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Mapping, Sequence

from .errors import AlignmentError, DataError, MalformedReplyError
from .graph import Partition

__all__ = [
    "ParseDiagnostics",
    "LabelAlignment",
    "parse_assignments",
    "render_assignments",
    "align_labels",
    "merge_chunks",
]

_ASSIGN_RE = re.compile(
    r"Node\s*:\s*(\d+)\s*;\s*Community\s*:\s*([^\s;]+)"
    r"(?:\s*;\s*Reason\s*:\s*([^\n]*))?"
)


@dataclass(frozen=True)
class ParseDiagnostics:
    """What the parser saw.

    matched_lines counts lines with at least one grammar match;
    ignored_lines counts nonempty lines with none (inline preamble on a
    matching line is not ignored). coverage is measured against the
    requested node set and is 1.0 when nothing was requested. reasons
    holds raw variant-3 justification text, keyed by node.
    """

    matched_lines: int
    ignored_lines: int
    conflicts: tuple[tuple[int, str, str], ...]
    out_of_scope: int
    coverage: float
    reasons: Mapping[int, str] = field(default_factory=dict)


def parse_assignments(
    text: str,
    requested_nodes: AbstractSet[int],
    *,
    strict: bool = False,
) -> tuple[Partition, ParseDiagnostics]:
    """Extract node-community assignments from arbitrary reply text.

    First occurrence wins on conflicting duplicates; with strict=True a
    conflict raises instead. Assignments for nodes outside
    requested_nodes are counted but excluded from the partition.
    """
    assignments: dict[int, str] = {}
    conflicts: list[tuple[int, str, str]] = []
    reasons: dict[int, str] = {}
    matched_lines = 0
    ignored_lines = 0
    out_of_scope = 0
    for line in text.splitlines():
        hits = list(_ASSIGN_RE.finditer(line))
        if not hits:
            if line.strip():
                ignored_lines += 1
            continue
        matched_lines += 1
        for m in hits:
            node = int(m.group(1))
            label = m.group(2)
            if node not in requested_nodes:
                out_of_scope += 1
                continue
            if node in assignments:
                if assignments[node] != label:
                    if strict:
                        raise MalformedReplyError(
                            f"conflicting labels for node {node}: "
                            f"{assignments[node]!r} then {label!r}"
                        )
                    conflicts.append((node, assignments[node], label))
                continue
            assignments[node] = label
            if m.group(3) is not None:
                reasons[node] = m.group(3).strip()
    coverage = (
        len(assignments) / len(requested_nodes) if requested_nodes else 1.0
    )
    diagnostics = ParseDiagnostics(
        matched_lines=matched_lines,
        ignored_lines=ignored_lines,
        conflicts=tuple(conflicts),
        out_of_scope=out_of_scope,
        coverage=coverage,
        reasons=reasons,
    )
    return Partition(assignments), diagnostics


def render_assignments(partition: Partition) -> str:
    """Canonical reply text for a partition, one ``Node:<id>;
    Community:<label>`` line per node ascending.

    Labels containing ';' would not survive a reparse, so they are
    rejected here rather than silently corrupted.
    """
    lines = []
    for node in sorted(partition.covered):
        label = partition.label_of(node)
        if ";" in label:
            raise DataError(
                f"label {label!r} contains ';' and cannot be rendered "
                "in the reply grammar"
            )
        lines.append(f"Node:{node}; Community:{label}")
    return "\n".join(lines)


@dataclass(frozen=True)
class LabelAlignment:
    """How one chunk's local labels map onto the canonical labels."""

    relabel_map: Mapping[str, str]
    overlap_agreement: float


def align_labels(
    canonical: Partition,
    incoming: Partition,
    anchors: AbstractSet[int],
) -> LabelAlignment:
    """Map incoming labels to canonical ones by anchor co-occurrence.

    Each incoming label goes to the canonical label it shares most
    anchors with, ties to the lexicographically smallest canonical
    label. Labels with no anchor co-occurrence get fresh names: the
    incoming name itself if unused, else ``<name>~k`` for the smallest
    k >= 1 that is. Agreement is the fraction of anchors whose
    relabeled incoming label matches canonical.
    """
    if len(canonical) and len(incoming) and not anchors:
        raise AlignmentError(
            "cannot align nonempty partitions without anchor nodes"
        )
    stray = set(anchors) - (canonical.covered & incoming.covered)
    if stray:
        raise AlignmentError(
            f"anchor nodes {sorted(stray)} are not covered by both partitions"
        )
    co: dict[str, Counter[str]] = {}
    for a in anchors:
        co.setdefault(incoming.label_of(a), Counter())[canonical.label_of(a)] += 1

    relabel: dict[str, str] = {}
    taken = set(canonical.labels)
    for local in sorted(incoming.labels):
        votes = co.get(local)
        if votes:
            top = max(votes.values())
            target = min(lab for lab, c in votes.items() if c == top)
        else:
            target = local
            k = 0
            while target in taken:
                k += 1
                target = f"{local}~{k}"
        relabel[local] = target
        taken.add(target)

    if anchors:
        agree = sum(
            1
            for a in anchors
            if relabel[incoming.label_of(a)] == canonical.label_of(a)
        )
        agreement = agree / len(anchors)
    else:
        agreement = 1.0
    return LabelAlignment(relabel_map=relabel, overlap_agreement=agreement)


def merge_chunks(
    partials: Sequence[tuple[Partition, Iterable[int]]]
) -> Partition:
    """Left fold of (partition, anchor set) chunks into one partition.

    The first chunk must carry no anchors. Anchor nodes are used only
    to align labels; member assignments from later chunks never
    overwrite earlier ones, so merged coverage is exactly the union of
    member coverages.
    """
    if not partials:
        raise DataError("no partial partitions to merge")
    first_part, first_anchors = partials[0]
    if set(first_anchors):
        raise AlignmentError("the first chunk must not carry anchor nodes")
    merged: dict[int, str] = {n: first_part.label_of(n) for n in first_part.covered}
    for part, anchor_iter in partials[1:]:
        anchors = set(anchor_iter)
        canonical = Partition(merged)
        usable = anchors & canonical.covered & part.covered
        if len(canonical) and len(part) and not usable:
            raise AlignmentError(
                "chunk shares no usable anchor nodes with the merged "
                "partition; labels cannot be aligned"
            )
        alignment = align_labels(canonical, part, usable)
        for node in sorted(part.covered - anchors):
            if node not in merged:
                merged[node] = alignment.relabel_map[part.label_of(node)]
    return Partition(merged)
