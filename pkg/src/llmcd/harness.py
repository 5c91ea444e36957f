"""Experiment orchestration: repeated detection runs, score
aggregation, and report emission.

Scores are averaged across runs (partitions are never consensus-merged).
With a deterministic provider and fixed config the emitted JSON report
is byte-identical across invocations: keys are sorted, nothing
timestamped, request ids derive from the config hash, and files are
written atomically via temp-and-rename. Provenance hashes of the
dataset bytes, instruction bytes, and config pin what produced a
report.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import io
import json
import os
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import ConfigError, DataError, ProviderError
from .gateway import HttpProvider, Provider, load_provider_config
from .graph import Graph, Partition, load_edge_list, load_labels
from .metrics import MetricReport, score_partitions
from .mocks import BaselineBrain, EchoOracle, Noisy
from .pipeline import detect_communities
from .prompts import DEFAULT_VARIANT_ID, list_variants

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "RunRecord",
    "run_experiment",
    "aggregate",
    "emit_report",
    "resolve_provider",
    "MOCK_PROVIDER_SPECS",
]

AGGREGATED_METRICS = ("nmi", "ari", "voi", "purity", "coverage")

MOCK_PROVIDER_SPECS = ("echo-oracle", "baseline-lp", "noisy-echo:<flip_rate>")


@dataclass(frozen=True)
class ExperimentConfig:
    graph_path: str
    labels_path: str
    provider_spec: str
    prompt_variant: int = DEFAULT_VARIANT_ID
    runs: int = 10
    chunk_budget_tokens: int | None = None
    anchor_count: int = 0
    seed: int = 0
    output_dir: str = "."
    output_format: str = "markdown"
    max_parallel_runs: int = 1
    strict_parse: bool = False

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.max_parallel_runs < 1:
            raise ConfigError("max_parallel_runs must be >= 1")
        if self.output_format not in ("json", "csv", "markdown"):
            raise ConfigError(
                f"unknown output format {self.output_format!r}; "
                "choose json, csv, or markdown"
            )

    def identity_dict(self) -> dict[str, Any]:
        """Fields that define the experiment. Output location and
        format deliberately excluded: where a report lands does not
        change what was measured."""
        return {
            "graph_path": self.graph_path,
            "labels_path": self.labels_path,
            "provider_spec": self.provider_spec,
            "prompt_variant": self.prompt_variant,
            "runs": self.runs,
            "chunk_budget_tokens": self.chunk_budget_tokens,
            "anchor_count": self.anchor_count,
            "seed": self.seed,
            "strict_parse": self.strict_parse,
        }


@dataclass(frozen=True)
class RunRecord:
    run_index: int
    status: str
    metrics: MetricReport | None = None
    chunk_count: int = 0
    total_conflicts: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    latency_seconds: float = 0.0
    token_source: str = ""
    error: str = ""

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "run_index": self.run_index,
            "status": self.status,
        }
        if self.status == "ok" and self.metrics is not None:
            out.update(
                {
                    "metrics": self.metrics.as_dict(),
                    "chunk_count": self.chunk_count,
                    "total_conflicts": self.total_conflicts,
                    "input_tokens": self.input_tokens,
                    "output_tokens": self.output_tokens,
                    "latency_seconds": self.latency_seconds,
                    "token_source": self.token_source,
                }
            )
        else:
            out["error"] = self.error
        return out


@dataclass(frozen=True)
class ExperimentReport:
    config: Mapping[str, Any]
    provenance: Mapping[str, str]
    runs: tuple[RunRecord, ...]
    excluded_runs: int
    aggregate: Mapping[str, Mapping[str, float]]
    totals: Mapping[str, float]
    method: str = ""

    def as_dict(self) -> dict[str, Any]:
        return {
            "config": dict(self.config),
            "provenance": dict(self.provenance),
            "method": self.method,
            "runs": [r.as_dict() for r in self.runs],
            "excluded_runs": self.excluded_runs,
            "aggregate": {k: dict(v) for k, v in self.aggregate.items()},
            "totals": dict(self.totals),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def aggregate(per_run: Sequence[MetricReport]) -> dict[str, dict[str, float]]:
    """Arithmetic mean and sample variance (k-1 denominator) per metric.

    A single run has variance 0 by definition.
    """
    if not per_run:
        raise DataError("cannot aggregate zero successful runs")
    summary: dict[str, dict[str, float]] = {}
    for name in AGGREGATED_METRICS:
        values = [getattr(r, name) for r in per_run]
        mean = statistics.mean(values)
        variance = statistics.variance(values) if len(values) > 1 else 0.0
        summary[name] = {"mean": mean, "variance": variance}
    return summary


def resolve_provider(
    spec: str, *, graph: Graph, truth: Partition, seed: int
) -> Provider:
    """Turn a provider spec into a live handle.

    Named specs build offline mocks: ``echo-oracle`` replays the ground
    truth, ``baseline-lp`` answers with label propagation, and
    ``noisy-echo:<flip_rate>`` corrupts the oracle. Anything else is
    read as a provider-config JSON path for the HTTP adapter.
    """
    if spec == "echo-oracle":
        return EchoOracle(truth)
    if spec == "baseline-lp":
        return BaselineBrain(graph, seed)
    if spec.startswith("noisy-echo:"):
        raw = spec.split(":", 1)[1]
        try:
            rate = float(raw)
        except ValueError:
            raise ConfigError(
                f"bad flip rate {raw!r} in provider spec {spec!r}"
            ) from None
        return Noisy(EchoOracle(truth), rate, seed)
    return HttpProvider(load_provider_config(spec))


def _write_atomic(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def run_experiment(
    config: ExperimentConfig, *, provider: Provider | None = None
) -> ExperimentReport:
    """Execute the full pipeline ``runs`` times and write the report.

    A failed run is recorded with its error and excluded from
    aggregation; only zero successes is fatal. The provider is built
    from the config unless a handle is injected explicitly.
    """
    graph_bytes = Path(config.graph_path).read_bytes()
    labels_bytes = Path(config.labels_path).read_bytes()
    graph = load_edge_list(graph_bytes.decode("utf-8"))
    truth = load_labels(labels_bytes.decode("utf-8"))
    if provider is None:
        provider = resolve_provider(
            config.provider_spec, graph=graph, truth=truth, seed=config.seed
        )

    by_id = {v.id: v for v in list_variants()}
    if config.prompt_variant not in by_id:
        raise ConfigError(
            f"unknown prompt variant {config.prompt_variant!r}; valid ids are 1-4"
        )
    instruction = by_id[config.prompt_variant].instruction_text
    config_hash = _sha256_bytes(
        json.dumps(config.identity_dict(), sort_keys=True).encode("utf-8")
    )
    provenance = {
        "config_hash": config_hash,
        "graph_sha256": _sha256_bytes(graph_bytes),
        "labels_sha256": _sha256_bytes(labels_bytes),
        "prompt_sha256": _sha256_bytes(instruction.encode("utf-8")),
    }

    def one_run(run_index: int) -> RunRecord:
        try:
            result = detect_communities(
                graph,
                provider,
                prompt_variant=config.prompt_variant,
                chunk_budget_tokens=config.chunk_budget_tokens,
                anchor_count=config.anchor_count,
                request_id_prefix=f"{config_hash[:12]}:run{run_index}",
                strict_parse=config.strict_parse,
            )
            metrics = score_partitions(result.partition, truth)
            return RunRecord(
                run_index=run_index,
                status="ok",
                metrics=metrics,
                chunk_count=result.chunk_count,
                total_conflicts=result.total_conflicts,
                input_tokens=result.input_tokens,
                output_tokens=result.output_tokens,
                latency_seconds=result.latency_seconds,
                token_source=result.token_source,
            )
        except (ProviderError, DataError, ConfigError) as exc:
            return RunRecord(
                run_index=run_index,
                status="error",
                error=f"{type(exc).__name__}: {exc}",
            )

    if config.max_parallel_runs == 1:
        records = [one_run(r) for r in range(config.runs)]
    else:
        with concurrent.futures.ThreadPoolExecutor(
            max_workers=config.max_parallel_runs
        ) as pool:
            records = list(pool.map(one_run, range(config.runs)))

    ok = [r for r in records if r.status == "ok"]
    if not ok:
        first = records[0].error if records else "no runs"
        raise ProviderError(
            f"all {config.runs} runs failed; first error: {first}"
        )
    report = ExperimentReport(
        config=config.identity_dict(),
        provenance=provenance,
        method=config.provider_spec,
        runs=tuple(records),
        excluded_runs=len(records) - len(ok),
        aggregate=aggregate([r.metrics for r in ok if r.metrics is not None]),
        totals={
            "input_tokens": sum(r.input_tokens for r in ok),
            "output_tokens": sum(r.output_tokens for r in ok),
            "latency_seconds": sum(r.latency_seconds for r in ok),
        },
    )
    out_dir = Path(config.output_dir)
    _write_atomic(out_dir / "report.json", report.to_json())
    if config.output_format != "json":
        emit_report(report, config.output_format, out_dir)
    return report


_EXTENSIONS = {"json": "report.json", "csv": "report.csv", "markdown": "report.md"}


def emit_report(
    report: ExperimentReport, format: str, out_dir: str | Path
) -> Path:
    """Write the report in the requested format; returns the path.

    The markdown table follows the Method, NMI, ARI, Purity, VOI
    column order; CSV and JSON carry full per-run detail.
    """
    if format not in _EXTENSIONS:
        raise ConfigError(
            f"unknown report format {format!r}; choose json, csv, or markdown"
        )
    path = Path(out_dir) / _EXTENSIONS[format]
    if format == "json":
        _write_atomic(path, report.to_json())
    elif format == "csv":
        _write_atomic(path, _render_csv(report))
    else:
        _write_atomic(path, _render_markdown(report))
    return path


def _render_csv(report: ExperimentReport) -> str:
    import csv

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "run_index",
            "status",
            "nmi",
            "ari",
            "voi",
            "purity",
            "coverage",
            "n_evaluated",
            "chunk_count",
            "input_tokens",
            "output_tokens",
            "latency_seconds",
            "error",
        ]
    )
    for r in report.runs:
        if r.status == "ok" and r.metrics is not None:
            m = r.metrics
            writer.writerow(
                [
                    r.run_index,
                    r.status,
                    repr(m.nmi),
                    repr(m.ari),
                    repr(m.voi),
                    repr(m.purity),
                    repr(m.coverage),
                    m.n_evaluated,
                    r.chunk_count,
                    r.input_tokens,
                    r.output_tokens,
                    repr(r.latency_seconds),
                    "",
                ]
            )
        else:
            writer.writerow(
                [r.run_index, r.status, "", "", "", "", "", "", "", "", "", "", r.error]
            )
    return buf.getvalue()


def _render_markdown(report: ExperimentReport) -> str:
    agg = report.aggregate

    def cell(name: str) -> str:
        return f"{agg[name]['mean']:.4f}"

    lines = [
        "| Method | NMI | ARI | Purity | VOI |",
        "| --- | --- | --- | --- | --- |",
        f"| {report.method} | {cell('nmi')} | {cell('ari')} "
        f"| {cell('purity')} | {cell('voi')} |",
        "",
        f"Runs: {len(report.runs)} ({report.excluded_runs} excluded), "
        f"mean coverage {agg['coverage']['mean']:.4f}.",
    ]
    return "\n".join(lines) + "\n"
