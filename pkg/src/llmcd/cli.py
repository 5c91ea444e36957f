"""Command-line interface.

Subcommands: detect (run experiments), prompts (inspect instruction
variants), metrics (compare two label files), viz (DOT export),
datasets (bundled data). Exit codes: 0 success, 2 configuration
error, 3 provider error, 4 data error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .datasets import dataset_paths, list_datasets
from .errors import ConfigError, DataError, LlmcdError, ProviderError
from .graph import load_edge_list, load_labels
from .harness import ExperimentConfig, run_experiment
from .metrics import score_partitions
from .prompts import list_variants
from .viz import export_dot

__all__ = ["cli", "main"]


@click.group()
def cli() -> None:
    """Community detection on graphs by prompting language models."""


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(), help="Edge-list file.")
@click.option("--labels", "labels_path", required=True, type=click.Path(), help="Ground-truth label file.")
@click.option(
    "--provider",
    "provider_spec",
    required=True,
    help="Provider config JSON path, or a mock: echo-oracle, baseline-lp, "
    "noisy-echo:<flip_rate>.",
)
@click.option("--prompt-variant", default=4, show_default=True, type=int)
@click.option("--runs", default=10, show_default=True, type=int)
@click.option("--chunk-tokens", "chunk_tokens", default=None, type=int, help="Token budget per chunk; omit to send the whole graph at once.")
@click.option("--anchors", default=0, show_default=True, type=int, help="Nodes repeated from the previous chunk for label alignment.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", default=".", show_default=True, type=click.Path(), help="Report output directory.")
@click.option(
    "--format",
    "output_format",
    default="markdown",
    show_default=True,
    type=click.Choice(["json", "csv", "markdown"]),
)
@click.option("--parallel", default=1, show_default=True, type=int, help="Concurrent runs.")
@click.option("--strict-parse", is_flag=True, help="Fail a run on conflicting duplicate assignments instead of keeping the first.")
def detect(
    graph_path: str,
    labels_path: str,
    provider_spec: str,
    prompt_variant: int,
    runs: int,
    chunk_tokens: int | None,
    anchors: int,
    seed: int,
    out_dir: str,
    output_format: str,
    parallel: int,
    strict_parse: bool,
) -> None:
    """Detect communities and score them against ground truth."""
    config = ExperimentConfig(
        graph_path=graph_path,
        labels_path=labels_path,
        provider_spec=provider_spec,
        prompt_variant=prompt_variant,
        runs=runs,
        chunk_budget_tokens=chunk_tokens,
        anchor_count=anchors,
        seed=seed,
        output_dir=out_dir,
        output_format=output_format,
        max_parallel_runs=parallel,
        strict_parse=strict_parse,
    )
    report = run_experiment(config)
    agg = report.aggregate
    click.echo(f"report written to {Path(out_dir) / 'report.json'}")
    for name in ("nmi", "ari", "purity", "voi"):
        stats = agg[name]
        click.echo(
            f"{name}: mean {stats['mean']:.4f}, variance {stats['variance']:.6f}"
        )
    if report.excluded_runs:
        click.echo(f"excluded runs: {report.excluded_runs}", err=True)


@cli.group()
def prompts() -> None:
    """Inspect the frozen instruction variants."""


@prompts.command("list")
def prompts_list() -> None:
    """One summary line per variant."""
    for v in list_variants():
        marker = " (default)" if v.is_default else ""
        reason = ", expects Reason field" if v.expects_reason_field else ""
        preview = v.instruction_text[:60]
        click.echo(f"{v.id}{marker}{reason}: {preview}...")


@prompts.command("show")
@click.argument("variant_id", type=int)
def prompts_show(variant_id: int) -> None:
    """Print one variant's exact instruction text."""
    for v in list_variants():
        if v.id == variant_id:
            click.echo(v.instruction_text)
            return
    raise ConfigError(f"unknown prompt variant {variant_id}; valid ids are 1-4")


@cli.command("metrics")
@click.argument("action", type=click.Choice(["compare"]))
@click.argument("pred_path", type=click.Path())
@click.argument("truth_path", type=click.Path())
def metrics_cmd(action: str, pred_path: str, truth_path: str) -> None:
    """Compare two label files: metrics compare <pred> <truth>."""
    pred = load_labels(Path(pred_path).read_text(encoding="utf-8"))
    truth = load_labels(Path(truth_path).read_text(encoding="utf-8"))
    report = score_partitions(pred, truth)
    click.echo(json.dumps(report.as_dict(), indent=2, sort_keys=True))


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path())
@click.option("--partition", "partition_path", required=True, type=click.Path(), help="Label file with community assignments.")
@click.option("--out", "out_path", required=True, type=click.Path())
def viz(graph_path: str, partition_path: str, out_path: str) -> None:
    """Write a colored DOT rendering of a partitioned graph."""
    graph = load_edge_list(Path(graph_path).read_text(encoding="utf-8"))
    partition = load_labels(Path(partition_path).read_text(encoding="utf-8"))
    Path(out_path).write_text(export_dot(graph, partition), encoding="utf-8")
    click.echo(f"DOT written to {out_path}")


@cli.group()
def datasets() -> None:
    """Bundled benchmark datasets."""


@datasets.command("list")
def datasets_list() -> None:
    """Name, stats, and file locations of each bundled dataset."""
    for info in list_datasets():
        kind = "synthetic stand-in" if info.synthetic else "real"
        edges, _ = dataset_paths(info.name)
        click.echo(
            f"{info.name}: {info.display_name}, {info.node_count} nodes, "
            f"{info.edge_count} edges, {info.community_count} communities, "
            f"{'directed' if info.directed else 'undirected'}, {kind}, "
            f"at {edges.parent}"
        )


def main() -> None:
    """Console entry point with exit-code mapping."""
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        sys.exit(130)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except ProviderError as exc:
        click.echo(f"provider error: {exc}", err=True)
        sys.exit(3)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(4)
    except LlmcdError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except FileNotFoundError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(4)


if __name__ == "__main__":
    main()
