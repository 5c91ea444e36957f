"""Bundled benchmark datasets.

karate is the real Zachary karate-club network with its two-faction
ground truth. The other five are deterministic synthetic stand-ins
generated offline (scripts/make_datasets.py) to match the published
benchmark's summary statistics exactly: node count, edge count,
community count, and directedness. Their community structure is
planted, not real-world, so treat non-karate scores as pipeline
exercises rather than literature-comparable results.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .graph import Graph, Partition, load_edge_list, load_labels

__all__ = ["DatasetInfo", "DATASETS", "list_datasets", "dataset_paths", "load_dataset"]


@dataclass(frozen=True)
class DatasetInfo:
    name: str
    display_name: str
    directed: bool
    node_count: int
    edge_count: int
    community_count: int
    synthetic: bool


DATASETS: dict[str, DatasetInfo] = {
    d.name: d
    for d in (
        DatasetInfo("karate", "Karate Club", False, 34, 78, 2, False),
        DatasetInfo("football", "Football", False, 115, 613, 12, True),
        DatasetInfo("webkb", "WebKB", True, 187, 298, 5, True),
        DatasetInfo("terrorist", "Terrorist Attacks", True, 645, 3172, 6, True),
        DatasetInfo("cora", "Cora", True, 2708, 5278, 7, True),
        DatasetInfo("citeseer", "CiteSeer", True, 3279, 4552, 6, True),
    )
}


def list_datasets() -> list[DatasetInfo]:
    return [DATASETS[name] for name in sorted(DATASETS)]


def dataset_paths(name: str) -> tuple[Path, Path]:
    """Filesystem paths of a bundled dataset's edge and label files."""
    if name not in DATASETS:
        raise ConfigError(
            f"unknown dataset {name!r}; bundled: {', '.join(sorted(DATASETS))}"
        )
    root = resources.files("llmcd").joinpath("data", name)
    edges = Path(str(root.joinpath("edges.txt")))
    labels = Path(str(root.joinpath("labels.txt")))
    if not edges.exists() or not labels.exists():
        raise ConfigError(
            f"dataset {name!r} files are missing; reinstall the package or "
            "run scripts/make_datasets.py"
        )
    return edges, labels


def load_dataset(name: str) -> tuple[Graph, Partition]:
    """Load a bundled dataset as (graph, ground-truth partition)."""
    info = DATASETS.get(name)
    if info is None:
        raise ConfigError(
            f"unknown dataset {name!r}; bundled: {', '.join(sorted(DATASETS))}"
        )
    edges_path, labels_path = dataset_paths(name)
    graph = load_edge_list(
        edges_path.read_text(encoding="utf-8"), directed=info.directed
    )
    truth = load_labels(labels_path.read_text(encoding="utf-8"))
    return graph, truth
