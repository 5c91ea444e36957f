"""Clustering-agreement metrics over a shared contingency table.

NMI, ARI, VOI, and purity between a predicted and a ground-truth
partition. All four are computed from integer cell counts with exact
arithmetic where it matters:

- log terms take reduced integer ratios, so equal ratios give
  bit-identical floats;
- term lists are summed with math.fsum (correctly rounded, hence
  order-independent), so every metric is exactly invariant under
  relabeling and node reordering;
- ARI runs entirely in fractions.Fraction and only converts at the end.

Consequently identical partitions score exactly (1.0, 1.0, 0.0 VOI,
1.0 purity) rather than within-epsilon.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ConfigError, DataError, NoOverlapError
from .graph import Partition

__all__ = [
    "ContingencyTable",
    "MetricReport",
    "CoverageWarning",
    "restrict_to_common",
    "contingency",
    "nmi",
    "ari",
    "voi",
    "purity",
    "score_partitions",
]


class CoverageWarning(UserWarning):
    """Prediction covers suspiciously little of the ground truth."""


@dataclass(frozen=True)
class ContingencyTable:
    """Cell counts n_ij: predicted cluster i (rows) x true class j (cols).

    Rows and columns are ordered by sorted label; totals are integers.
    """

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    row_sums: tuple[int, ...]
    col_sums: tuple[int, ...]
    total: int


@dataclass(frozen=True)
class MetricReport:
    nmi: float
    ari: float
    voi: float
    purity: float
    coverage: float
    n_evaluated: int

    def as_dict(self) -> dict[str, float | int]:
        return {
            "nmi": self.nmi,
            "ari": self.ari,
            "voi": self.voi,
            "purity": self.purity,
            "coverage": self.coverage,
            "n_evaluated": self.n_evaluated,
        }


def restrict_to_common(
    pred: Partition, truth: Partition
) -> tuple[list[tuple[str, str]], float]:
    """Pair up (pred label, truth label) on the nodes both cover.

    Coverage is the fraction of truth's nodes that the prediction
    reached; partial model outputs are scored on what they did cover,
    with coverage reported alongside.
    """
    if len(truth) == 0:
        raise DataError("ground-truth partition is empty")
    common = sorted(pred.covered & truth.covered)
    if not common:
        raise NoOverlapError(
            "prediction and ground truth cover disjoint node sets"
        )
    pairs = [(pred.label_of(n), truth.label_of(n)) for n in common]
    coverage = len(common) / len(truth)
    return pairs, coverage


def contingency(pairs: Sequence[tuple[str, str]]) -> ContingencyTable:
    """Exact cell counts from (pred label, truth label) pairs."""
    if not pairs:
        raise DataError("no label pairs to tabulate")
    row_labels = tuple(sorted({p for p, _ in pairs}))
    col_labels = tuple(sorted({t for _, t in pairs}))
    ri = {lab: i for i, lab in enumerate(row_labels)}
    ci = {lab: j for j, lab in enumerate(col_labels)}
    cells = [[0] * len(col_labels) for _ in row_labels]
    for p, t in pairs:
        cells[ri[p]][ci[t]] += 1
    counts = tuple(tuple(row) for row in cells)
    return ContingencyTable(
        row_labels=row_labels,
        col_labels=col_labels,
        counts=counts,
        row_sums=tuple(sum(row) for row in counts),
        col_sums=tuple(sum(col) for col in zip(*counts)),
        total=len(pairs),
    )


def _log_ratio(num: int, den: int) -> float:
    """ln(num/den) for positive integers; equal reduced ratios give
    bit-identical results."""
    g = math.gcd(num, den)
    num //= g
    den //= g
    if num == den:
        return 0.0
    return math.log(num / den)


def _entropy_terms(sums: Iterable[int], n: int) -> list[float]:
    return [(s / n) * _log_ratio(n, s) for s in sums if s]


def _mi_terms(table: ContingencyTable) -> list[float]:
    n = table.total
    terms = []
    for i, row in enumerate(table.counts):
        a = table.row_sums[i]
        for j, c in enumerate(row):
            if c:
                terms.append((c / n) * _log_ratio(n * c, a * table.col_sums[j]))
    return terms


_NMI_NORMALIZATIONS = ("arithmetic", "max", "geometric")


def nmi(table: ContingencyTable, *, normalization: str = "arithmetic") -> float:
    """Normalized mutual information in [0, 1].

    Natural-log entropies; the normalizing denominator is the
    arithmetic mean of the two entropies by default ("max" and
    "geometric" match other toolchains). Both-trivial partitions score
    1.0; exactly one trivial side scores 0.0.
    """
    if normalization not in _NMI_NORMALIZATIONS:
        raise ConfigError(
            f"unknown NMI normalization {normalization!r}; "
            f"choose one of {_NMI_NORMALIZATIONS}"
        )
    hx = math.fsum(_entropy_terms(table.row_sums, table.total))
    hy = math.fsum(_entropy_terms(table.col_sums, table.total))
    if hx == 0.0 and hy == 0.0:
        return 1.0
    if hx == 0.0 or hy == 0.0:
        return 0.0
    mi = math.fsum(_mi_terms(table))
    if normalization == "arithmetic":
        denom = (hx + hy) / 2.0
    elif normalization == "max":
        denom = max(hx, hy)
    else:
        denom = math.sqrt(hx * hy)
    value = mi / denom
    # guard against last-ulp drift outside the mathematical range
    return min(max(value, 0.0), 1.0)


def _comb2(k: int) -> int:
    return k * (k - 1) // 2


def ari(table: ContingencyTable) -> float:
    """Adjusted Rand index via pair counting, exact in Fraction.

    (index - expected) / (max - expected); when max == expected (both
    partitions trivial in the same way) the score is pinned to 1.0.
    """
    n = table.total
    if n < 2:
        raise DataError("ARI needs at least 2 evaluated nodes")
    index = sum(_comb2(c) for row in table.counts for c in row)
    sum_a = sum(_comb2(a) for a in table.row_sums)
    sum_b = sum(_comb2(b) for b in table.col_sums)
    expected = Fraction(sum_a * sum_b, _comb2(n))
    maximum = Fraction(sum_a + sum_b, 2)
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


def voi(table: ContingencyTable, *, base: float | None = None) -> float:
    """Variation of information, in nats unless a log base is given.

    Computed as H(X|Y) + H(Y|X), each term (n_ij/n) * ln(marginal/n_ij),
    so every term is >= 0 and identical partitions score exactly 0.0.
    """
    n = table.total
    terms: list[float] = []
    for i, row in enumerate(table.counts):
        a = table.row_sums[i]
        for j, c in enumerate(row):
            if c:
                w = c / n
                terms.append(w * _log_ratio(table.col_sums[j], c))
                terms.append(w * _log_ratio(a, c))
    value = math.fsum(terms)
    if base is not None:
        if base <= 0 or base == 1:
            raise ConfigError("log base must be positive and != 1")
        value /= math.log(base)
    return value


def purity(table: ContingencyTable) -> float:
    """Fraction of nodes that fall in their cluster's majority class."""
    return sum(max(row) for row in table.counts) / table.total


def score_partitions(
    pred: Partition,
    truth: Partition,
    *,
    nmi_normalization: str = "arithmetic",
    voi_base: float | None = None,
    min_coverage: float | None = None,
    warn_coverage: float = 0.9,
) -> MetricReport:
    """All four metrics on the common node set, with coverage.

    ``min_coverage`` makes low coverage a hard error; otherwise coverage
    below ``warn_coverage`` only warns.
    """
    pairs, coverage = restrict_to_common(pred, truth)
    if min_coverage is not None and coverage < min_coverage:
        raise DataError(
            f"prediction covers {coverage:.3f} of ground truth, below the "
            f"required {min_coverage}"
        )
    if coverage < warn_coverage:
        warnings.warn(
            f"prediction covers only {coverage:.3f} of ground-truth nodes; "
            "metrics are computed on the covered subset",
            CoverageWarning,
            stacklevel=2,
        )
    table = contingency(pairs)
    return MetricReport(
        nmi=nmi(table, normalization=nmi_normalization),
        ari=ari(table),
        voi=voi(table, base=voi_base),
        purity=purity(table),
        coverage=coverage,
        n_evaluated=table.total,
    )
