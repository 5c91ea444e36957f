"""Estimator-style wrappers around the two detectors.

Both follow the scikit-learn clustering protocol: constructor params
stored verbatim (so get_params / set_params / clone work), fit(X)
setting labels_, and fit_predict via ClusterMixin. X is a Graph or an
iterable of edge pairs, not a feature matrix, so these are API-shaped
companions for sklearn pipelines-by-hand rather than fully
check_estimator-compliant transformers.
"""

from __future__ import annotations

import numbers
from typing import Any, Iterable

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .baseline import LPConfig, label_propagation
from .errors import ConfigError, DataError
from .gateway import Provider
from .graph import Graph, Partition, symmetrize
from .pipeline import detect_communities
from .prompts import DEFAULT_VARIANT_ID

__all__ = ["LLMCommunityDetector", "LabelPropagationDetector", "as_graph"]


def as_graph(X: Any) -> Graph:
    """Coerce estimator input to a Graph.

    Accepts a Graph as-is, or any iterable of (u, v) integer pairs.
    """
    if isinstance(X, Graph):
        return X
    if isinstance(X, (str, bytes)):
        raise DataError(
            "X must be a Graph or an iterable of edge pairs, not text; "
            "load files with load_edge_list first"
        )
    try:
        pairs = list(X)
    except TypeError:
        raise DataError(
            f"cannot interpret {type(X).__name__} as a graph"
        ) from None
    edges = []
    for item in pairs:
        pair = tuple(item)
        if len(pair) != 2 or not all(
            isinstance(x, numbers.Integral) for x in pair
        ):
            raise DataError(f"edge {item!r} is not a pair of integers")
        edges.append((int(pair[0]), int(pair[1])))
    return Graph.from_edges(edges)


def _encode_labels(graph: Graph, partition: Partition) -> np.ndarray:
    """Integer cluster codes aligned with graph.node_ids; uncovered
    nodes code to -1."""
    code_of = {lab: i for i, lab in enumerate(sorted(partition.labels))}
    return np.array(
        [
            code_of[partition.label_of(n)] if n in partition.covered else -1
            for n in graph.node_ids
        ],
        dtype=int,
    )


class LLMCommunityDetector(ClusterMixin, BaseEstimator):
    """Community detection by prompting a chat-completion provider.

    After fit: labels_ (integer codes, -1 for nodes the model never
    assigned), partition_, coverage_, diagnostics_.
    """

    def __init__(
        self,
        provider: Provider | None = None,
        prompt_variant: int = DEFAULT_VARIANT_ID,
        chunk_budget_tokens: int | None = None,
        anchor_count: int = 0,
        max_output_tokens: int = 4096,
        temperature: float = 0.0,
        strict_parse: bool = False,
    ):
        self.provider = provider
        self.prompt_variant = prompt_variant
        self.chunk_budget_tokens = chunk_budget_tokens
        self.anchor_count = anchor_count
        self.max_output_tokens = max_output_tokens
        self.temperature = temperature
        self.strict_parse = strict_parse

    def fit(self, X, y=None):
        if self.provider is None:
            raise ConfigError(
                "LLMCommunityDetector needs a provider; pass a mock or an "
                "HttpProvider"
            )
        graph = as_graph(X)
        result = detect_communities(
            graph,
            self.provider,
            prompt_variant=self.prompt_variant,
            chunk_budget_tokens=self.chunk_budget_tokens,
            anchor_count=self.anchor_count,
            max_output_tokens=self.max_output_tokens,
            temperature=self.temperature,
            strict_parse=self.strict_parse,
        )
        self.partition_ = result.partition
        self.coverage_ = result.coverage
        self.diagnostics_ = result.diagnostics
        self.labels_ = _encode_labels(symmetrize(graph), result.partition)
        return self


class LabelPropagationDetector(ClusterMixin, BaseEstimator):
    """Deterministic label-propagation clustering, estimator-shaped."""

    def __init__(self, seed: int = 0, max_iterations: int = 100):
        self.seed = seed
        self.max_iterations = max_iterations

    def fit(self, X, y=None):
        graph = symmetrize(as_graph(X))
        partition = label_propagation(
            graph, LPConfig(seed=self.seed, max_iterations=self.max_iterations)
        )
        self.partition_ = partition
        self.labels_ = _encode_labels(graph, partition)
        return self
