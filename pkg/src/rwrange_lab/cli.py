"""Experiment runner: config handling, subcommands, persistence, resume.

A run is described by an ExperimentConfig (JSON file, command-line flags, or
both; flags win).  Sample generation is split into fixed-size stream chunks;
each finished chunk is persisted as a part file and recorded in a progress
ledger, so an interrupted run picks up where it stopped.  Final outputs are
assembled in stream order, which makes every emitted CSV/JSON byte-identical
across re-runs and worker counts.  A manifest with per-file checksums is
written at the end of every run.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import (
    CAPACITY_CSV_COLUMNS,
    capacity_estimate,
    write_capacity_csv,
    CapacityEstimate,
)
from .decomposition import (
    _tail_chunk,
    dyadic_decompose,
    tail_sample_rows,
    write_cross_term_csv,
)
from .observables import (
    ObservableKind,
    ResistanceSolveConfig,
    _observable_chunk,
    build_range_graph,
    cut_point_count,
    cut_point_count_naive,
    effective_resistance,
    effective_resistance_dense,
    graph_distance,
    graph_distance_dijkstra,
)
from .stats import (
    clt_report,
    default_tail_window,
    fit_tail_exponent,
    report_to_json,
    survival_rows,
    validate_variance_grid,
    variance_scan_from_values,
    variance_scan_rows,
    VARIANCE_CSV_COLUMNS,
    TAIL_CSV_COLUMNS,
)
from .tables import write_csv
from .walks import dump_path, simulate_walk, stream_generator

COMMANDS = (
    "simulate",
    "tails",
    "variance",
    "clt",
    "decompose",
    "capacity",
    "oracle-check",
)

OUTPUT_DIR_ENV = "RWRANGE_LAB_OUTPUT_DIR"
CHUNK_STREAMS = 512
MANIFEST_NAME = "run-manifest.json"
PROGRESS_NAME = "run-progress.json"
PARTS_DIR = "parts"

_ORACLE_STREAM_BASE = 1_000_000
_DENSE_ORACLE_VERTEX_LIMIT = 2000


class ConfigError(ValueError):
    """Invalid configuration, pointing at the offending field."""

    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        super().__init__(f"field '{field_name}': {message}")


@dataclass(frozen=True)
class SolverSettings:
    rel_tolerance: float = 1e-10
    max_iterations: int | None = None
    preconditioner: str = "diagonal"

    def to_config(self) -> ResistanceSolveConfig:
        return ResistanceSolveConfig(
            rel_tolerance=self.rel_tolerance,
            max_iterations=self.max_iterations,
            preconditioner=self.preconditioner,
        )


_SOLVER_FIELDS = {f.name for f in dataclasses.fields(SolverSettings)}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs, validated up front."""

    command: str
    d: int | None = None
    kind: str = "cut"
    n: int | None = None
    n_grid: tuple[int, ...] | None = None
    samples: int | None = None
    seed: int = 0
    threads: int = 1
    output_dir: str | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    window: tuple[float, float] | None = None
    levels: int = 4
    radius_factors: tuple[float, ...] = (16.0, 64.0)
    trials_per_point: int = 200
    max_n: int = 256
    instances: int = 500

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "d": self.d,
            "kind": self.kind,
            "n": self.n,
            "n_grid": list(self.n_grid) if self.n_grid is not None else None,
            "samples": self.samples,
            "seed": self.seed,
            "threads": self.threads,
            "output_dir": self.output_dir,
            "solver": {
                "rel_tolerance": self.solver.rel_tolerance,
                "max_iterations": self.solver.max_iterations,
                "preconditioner": self.solver.preconditioner,
            },
            "window": list(self.window) if self.window is not None else None,
            "levels": self.levels,
            "radius_factors": list(self.radius_factors),
            "trials_per_point": self.trials_per_point,
            "max_n": self.max_n,
            "instances": self.instances,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def science_hash(self) -> str:
        """Hash of the fields that determine sample values (not scheduling)."""
        payload = self.to_dict()
        payload.pop("threads")
        payload.pop("output_dir")
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        ).hexdigest()

    def observable_kind(self) -> ObservableKind:
        return ObservableKind(self.kind)

    def resolved_output_dir(self) -> Path:
        if self.output_dir is not None:
            return Path(self.output_dir)
        env = os.environ.get(OUTPUT_DIR_ENV)
        if env:
            return Path(env)
        return Path("rwrange-out")


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def config_from_dict(raw: dict, source: str = "config") -> ExperimentConfig:
    """Build a config from a plain dict, rejecting unknown keys."""
    unknown = sorted(set(raw) - _CONFIG_FIELDS)
    if unknown:
        raise ConfigError(unknown[0], f"unknown key in {source}")
    merged = dict(raw)
    solver_raw = merged.pop("solver", None)
    if solver_raw is not None:
        if not isinstance(solver_raw, dict):
            raise ConfigError("solver", "must be an object")
        bad = sorted(set(solver_raw) - _SOLVER_FIELDS)
        if bad:
            raise ConfigError(f"solver.{bad[0]}", f"unknown key in {source}")
        merged["solver"] = SolverSettings(**solver_raw)
    for key in ("n_grid", "radius_factors"):
        if merged.get(key) is not None:
            merged[key] = tuple(merged[key])
    if merged.get("window") is not None:
        window = merged["window"]
        if len(window) != 2:
            raise ConfigError("window", "must be a [low, high] pair")
        merged["window"] = (float(window[0]), float(window[1]))
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError("command", str(exc)) from exc


def config_from_json(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("(file)", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("(file)", "top level must be an object")
    return config_from_dict(raw, source="config file")


def _default_samples(command: str) -> int:
    return {"simulate": 1, "capacity": 2}.get(command, 1000)


def validate_config(config: ExperimentConfig) -> ExperimentConfig:
    """Check every parameter the command will touch; fill derived defaults."""
    if config.command not in COMMANDS:
        raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}")
    if config.threads < 1:
        raise ConfigError("threads", "must be at least 1")
    if config.seed < 0:
        raise ConfigError("seed", "must be non-negative")
    merged = dataclasses.replace(
        config,
        samples=config.samples
        if config.samples is not None
        else _default_samples(config.command),
    )
    if merged.samples < 1:
        raise ConfigError("samples", "must be at least 1")
    try:
        merged.solver.to_config()
    except ValueError as exc:
        raise ConfigError("solver", str(exc)) from exc

    needs_d = merged.command != "oracle-check"
    if needs_d:
        if merged.d is None:
            raise ConfigError("d", f"required for '{merged.command}'")
        if not 4 <= merged.d <= 8:
            raise ConfigError("d", "must lie in 4..8")
    needs_kind = merged.command in ("tails", "variance", "clt", "decompose")
    if needs_kind:
        try:
            merged.observable_kind()
        except ValueError:
            names = ", ".join(k.value for k in ObservableKind)
            raise ConfigError("kind", f"must be one of {names}") from None
    if merged.command == "variance":
        if merged.n_grid is None:
            raise ConfigError("n_grid", "required for 'variance'")
        try:
            validate_variance_grid(merged.n_grid, merged.samples)
        except ValueError as exc:
            raise ConfigError("n_grid", str(exc)) from exc
    elif merged.command != "oracle-check":
        if merged.n is None:
            raise ConfigError("n", f"required for '{merged.command}'")
        if merged.n < 1:
            raise ConfigError("n", "must be at least 1")
    if merged.command == "tails" and merged.window is not None:
        low, high = merged.window
        if not 1.0 <= low < high:
            raise ConfigError("window", "must satisfy 1 <= low < high")
    if merged.command == "decompose":
        if merged.levels < 1:
            raise ConfigError("levels", "must be at least 1")
        if merged.n is not None and merged.n % (2**merged.levels) != 0:
            raise ConfigError("levels", f"n={merged.n} not divisible by 2^levels")
    if merged.command == "capacity":
        if merged.trials_per_point < 1:
            raise ConfigError("trials_per_point", "must be at least 1")
        if not merged.radius_factors:
            raise ConfigError("radius_factors", "must not be empty")
        if any(f < 4.0 for f in merged.radius_factors):
            raise ConfigError("radius_factors", "every factor must be >= 4")
    if merged.command == "oracle-check":
        if merged.max_n < 16:
            raise ConfigError("max_n", "must be at least 16")
        if merged.instances < 1:
            raise ConfigError("instances", "must be at least 1")
        if merged.d is not None and not 4 <= merged.d <= 8:
            raise ConfigError("d", "must lie in 4..8")
    return merged


# ---------------------------------------------------------------------------
# run state: part files, progress ledger, manifest
# ---------------------------------------------------------------------------


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def merge_ranges(ranges: list[list[int]]) -> list[list[int]]:
    """Collapse sorted [start, stop) ranges into maximal contiguous ones."""
    merged: list[list[int]] = []
    for start, stop in sorted(ranges):
        if merged and merged[-1][1] == start:
            merged[-1][1] = stop
        else:
            merged.append([start, stop])
    return merged


class RunState:
    """Progress ledger plus part-file store for one output directory."""

    def __init__(self, output_dir: Path, config: ExperimentConfig):
        self.output_dir = output_dir
        self.parts_dir = output_dir / PARTS_DIR
        self.progress_path = output_dir / PROGRESS_NAME
        self.config_hash = config.science_hash()
        self.threads = config.threads
        self.cells: dict[str, list[list[int]]] = {}

    def prepare(self) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        stale = True
        if self.progress_path.exists():
            try:
                recorded = json.loads(self.progress_path.read_text())
            except json.JSONDecodeError:
                recorded = None
            if recorded and recorded.get("config_hash") == self.config_hash:
                self.cells = {
                    cell: [list(r) for r in ranges]
                    for cell, ranges in recorded.get("cells", {}).items()
                }
                stale = False
        if stale:
            self.cells = {}
            if self.parts_dir.exists():
                for leftover in self.parts_dir.iterdir():
                    leftover.unlink()
            if self.progress_path.exists():
                self.progress_path.unlink()
        self.parts_dir.mkdir(exist_ok=True)

    def part_path(self, cell: str, start: int, stop: int) -> Path:
        return self.parts_dir / f"{cell}-{start:09d}-{stop:09d}.npy"

    def completed(self, cell: str) -> set[tuple[int, int]]:
        return {(r[0], r[1]) for r in self.cells.get(cell, [])}

    def record(self, cell: str, start: int, stop: int, values: np.ndarray) -> None:
        np.save(self.part_path(cell, start, stop), values)
        self.cells.setdefault(cell, []).append([start, stop])
        self._save_progress()

    def _save_progress(self) -> None:
        payload = {"config_hash": self.config_hash, "cells": self.cells}
        tmp = self.progress_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True))
        os.replace(tmp, self.progress_path)

    def assemble(self, cell: str, total: int) -> np.ndarray:
        ranges = sorted(self.completed(cell))
        arrays = [np.load(self.part_path(cell, s, e)) for s, e in ranges]
        covered = merge_ranges([list(r) for r in ranges])
        if covered != [[0, total]]:
            raise RuntimeError(f"cell {cell} incomplete after execution: {covered}")
        return np.concatenate(arrays)

    def completed_ranges(self) -> dict[str, list[list[int]]]:
        return {cell: merge_ranges(ranges) for cell, ranges in sorted(self.cells.items())}

    def discard(self) -> None:
        if self.parts_dir.exists():
            for leftover in self.parts_dir.iterdir():
                leftover.unlink()
            self.parts_dir.rmdir()
        if self.progress_path.exists():
            self.progress_path.unlink()


def stream_tiles(total: int, chunk: int = CHUNK_STREAMS) -> list[tuple[int, int]]:
    return [(s, min(s + chunk, total)) for s in range(0, total, chunk)]


def run_stream_cell(
    state: RunState, cell: str, worker, args: tuple, total: int
) -> np.ndarray:
    """Execute the missing chunks of one cell, then assemble all of it."""
    done = state.completed(cell)
    missing = [t for t in stream_tiles(total) if t not in done]
    if missing:
        if state.threads > 1 and len(missing) > 1:
            with ProcessPoolExecutor(max_workers=state.threads) as pool:
                futures = {
                    pool.submit(worker, args, start, stop): (start, stop)
                    for start, stop in missing
                }
                for future, (start, stop) in futures.items():
                    state.record(cell, start, stop, np.asarray(future.result()))
        else:
            for start, stop in missing:
                state.record(cell, start, stop, np.asarray(worker(args, start, stop)))
    return state.assemble(cell, total)


def write_manifest(
    output_dir: Path,
    config: ExperimentConfig,
    outputs: list[Path],
    started_at: str,
    status: str,
    completed_stream_ranges: dict[str, list[list[int]]],
) -> Path:
    manifest = {
        "artifact_version": __version__,
        "config": config.to_dict(),
        "started_at": started_at,
        "finished_at": _now(),
        "status": status,
        "outputs": {
            path.name: file_sha256(path) for path in sorted(outputs, key=lambda p: p.name)
        },
        "completed_stream_ranges": completed_stream_ranges,
    }
    path = output_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def verify_run_directory(output_dir: str | Path) -> list[str]:
    """Compare manifest checksums against the files on disk."""
    directory = Path(output_dir)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        return [f"missing manifest {manifest_path}"]
    manifest = json.loads(manifest_path.read_text())
    problems = []
    for name, recorded in manifest.get("outputs", {}).items():
        path = directory / name
        if not path.exists():
            problems.append(f"missing output file {name}")
        elif file_sha256(path) != recorded:
            problems.append(f"checksum mismatch for {name}")
    return problems


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# per-command workers and runners
# ---------------------------------------------------------------------------


def _solver_fields(config: ExperimentConfig) -> tuple:
    s = config.solver
    return (s.rel_tolerance, s.max_iterations, s.preconditioner)


def _decompose_chunk(args: tuple, start: int, stop: int) -> np.ndarray:
    d, n, kind_value, levels, seed, cfg_fields = args
    kind = ObservableKind(kind_value)
    solver = ResistanceSolveConfig(*cfg_fields)
    width = 2 + (2**levels - 1)
    out = np.empty((stop - start, width))
    for j in range(start, stop):
        path = simulate_walk(d, n, seed=seed, stream=j)
        decomposition = dyadic_decompose(path, kind, levels, solver)
        flat = [value for level in decomposition.errors for value in level]
        out[j - start, 0] = decomposition.total
        out[j - start, 1] = sum(decomposition.leaves)
        out[j - start, 2:] = flat
    return out


def _capacity_cell(args: tuple, start: int, stop: int) -> np.ndarray:
    d, n, factor, trials, seed = args
    out = np.empty((stop - start, 4))
    for j in range(start, stop):
        path = simulate_walk(d, n, seed=seed, stream=j)
        estimate = capacity_estimate(
            path.coords,
            escape_radius_factor=factor,
            trials_per_point=trials,
            seed=seed,
        )
        out[j - start] = (
            estimate.estimate,
            estimate.std_error,
            estimate.set_size,
            estimate.escape_radius,
        )
    return out


def _run_simulate(config: ExperimentConfig, state: RunState) -> list[Path]:
    outputs = []
    for j in range(config.samples):
        path = simulate_walk(config.d, config.n, seed=config.seed, stream=j)
        target = state.output_dir / f"path-{j:05d}.rwpath"
        with open(target, "wb") as fh:
            dump_path(path, fh)
        outputs.append(target)
    state.cells["simulate"] = [[0, config.samples]]
    return outputs


def _run_tails(config: ExperimentConfig, state: RunState) -> list[Path]:
    kind = config.observable_kind()
    window = config.window or default_tail_window(config.n)
    args = (config.d, config.n, kind.value, config.seed, 0, _solver_fields(config))
    values = run_stream_cell(
        state, f"tails-n{config.n}", _tail_chunk, args, config.samples
    )
    fit = fit_tail_exponent(values, window)
    rows = tail_sample_rows(config.d, config.n, kind, values, config.seed)
    outputs = [
        write_cross_term_csv(state.output_dir / "cross-terms.csv", rows),
        Path(
            write_csv(
                state.output_dir / "survival.csv",
                TAIL_CSV_COLUMNS,
                survival_rows(values, window),
            )
        ),
    ]
    fit_path = state.output_dir / "tail-fit.json"
    fit_path.write_text(report_to_json(fit) + "\n")
    outputs.append(fit_path)
    return outputs


def _run_variance(config: ExperimentConfig, state: RunState) -> list[Path]:
    kind = config.observable_kind()
    values_by_n = {}
    for n in config.n_grid:
        args = (kind.value, config.d, n, config.seed, n << 32, _solver_fields(config))
        values_by_n[n] = run_stream_cell(
            state, f"variance-n{n}", _observable_chunk, args, config.samples
        )
    scan = variance_scan_from_values(kind, config.d, values_by_n)
    outputs = [
        Path(
            write_csv(
                state.output_dir / "variance.csv",
                VARIANCE_CSV_COLUMNS,
                variance_scan_rows(scan),
            )
        )
    ]
    scan_path = state.output_dir / "variance-scan.json"
    scan_path.write_text(report_to_json(scan) + "\n")
    outputs.append(scan_path)
    return outputs


def _run_clt(config: ExperimentConfig, state: RunState) -> list[Path]:
    kind = config.observable_kind()
    args = (kind.value, config.d, config.n, config.seed, 0, _solver_fields(config))
    values = run_stream_cell(
        state, f"clt-n{config.n}", _observable_chunk, args, config.samples
    )
    report = clt_report(values, kind, config.d, config.n)
    outputs = [
        Path(
            write_csv(
                state.output_dir / "values.csv",
                ("stream", "value"),
                [(j, float(v)) for j, v in enumerate(values)],
            )
        )
    ]
    report_path = state.output_dir / "clt.json"
    report_path.write_text(report_to_json(report) + "\n")
    outputs.append(report_path)
    return outputs


def _run_decompose(config: ExperimentConfig, state: RunState) -> list[Path]:
    kind = config.observable_kind()
    levels = config.levels
    args = (
        config.d,
        config.n,
        kind.value,
        levels,
        config.seed,
        _solver_fields(config),
    )
    table = run_stream_cell(
        state, f"decompose-n{config.n}", _decompose_chunk, args, config.samples
    )
    totals, leaf_sums, errors = table[:, 0], table[:, 1], table[:, 2:]
    rows = []
    for j in range(table.shape[0]):
        for idx in range(errors.shape[1]):
            k = (idx + 1).bit_length() - 1
            l = idx + 1 - (1 << k)
            rows.append(
                (kind.value, config.d, config.n, k, l, float(errors[j, idx]), config.seed, j)
            )
    outputs = [write_cross_term_csv(state.output_dir / "cross-terms.csv", rows)]
    per_level = []
    for k in range(levels):
        lo, hi = (1 << k) - 1, (1 << (k + 1)) - 1
        level_sums = errors[:, lo:hi].sum(axis=1)
        per_level.append(
            {
                "level": k,
                "mean_level_sum": float(level_sums.mean()),
                "mean_square_level_sum": float((level_sums**2).mean()),
            }
        )
    discrepancies = totals - (leaf_sums - errors.sum(axis=1))
    summary = {
        "kind": kind.value,
        "d": config.d,
        "n": config.n,
        "levels": levels,
        "samples": int(table.shape[0]),
        "seed": config.seed,
        "mean_total": float(totals.mean()),
        "mean_leaf_sum": float(leaf_sums.mean()),
        "max_abs_identity_discrepancy": float(np.abs(discrepancies).max()),
        "per_level": per_level,
    }
    summary_path = state.output_dir / "decompose-summary.json"
    summary_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    outputs.append(summary_path)
    return outputs


def _run_capacity(config: ExperimentConfig, state: RunState) -> list[Path]:
    estimates: list[CapacityEstimate] = []
    csv_rows = []
    by_factor: dict[float, list[float]] = {f: [] for f in config.radius_factors}
    for factor in config.radius_factors:
        args = (config.d, config.n, factor, config.trials_per_point, config.seed)
        cell = f"capacity-f{factor:g}"
        table = run_stream_cell(state, cell, _capacity_cell, args, config.samples)
        for j in range(table.shape[0]):
            estimate, std_error, set_size, radius = table[j]
            by_factor[factor].append(float(estimate))
            csv_rows.append(
                (
                    config.d,
                    int(set_size),
                    factor,
                    config.trials_per_point,
                    float(estimate),
                    float(std_error),
                )
            )
    outputs = [
        Path(
            write_csv(
                state.output_dir / "capacity.csv", CAPACITY_CSV_COLUMNS, csv_rows
            )
        )
    ]
    log_n = math.log(config.n)
    factor_summary = {
        f"{factor:g}": {
            "mean_estimate": float(np.mean(values)),
            "scaled_mean": float(np.mean(values) * log_n / config.n),
        }
        for factor, values in by_factor.items()
    }
    means = [np.mean(values) for values in by_factor.values()]
    drift = float(max(means) / min(means) - 1.0) if len(means) > 1 else 0.0
    summary = {
        "d": config.d,
        "n": config.n,
        "walks": config.samples,
        "trials_per_point": config.trials_per_point,
        "seed": config.seed,
        "factors": factor_summary,
        "max_relative_drift": drift,
    }
    summary_path = state.output_dir / "capacity-summary.json"
    summary_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    outputs.append(summary_path)
    return outputs


def _oracle_dimensions(config: ExperimentConfig) -> list[int]:
    return [config.d] if config.d is not None else [4, 5, 6, 7, 8]


def run_oracle_check(config: ExperimentConfig) -> dict:
    """Compare every fast observable against its slow reference."""
    dims = _oracle_dimensions(config)
    solver = config.solver.to_config()
    mismatches = []
    max_resistance_gap = 0.0
    resistance_checks = 0
    for i in range(config.instances):
        d = dims[i % len(dims)]
        sizes = stream_generator(config.seed, _ORACLE_STREAM_BASE + i)
        n = int(sizes.integers(16, config.max_n + 1))
        path = simulate_walk(d, n, seed=config.seed, stream=i)
        graph = build_range_graph(path)
        fast_distance = graph_distance(graph)
        slow_distance = graph_distance_dijkstra(graph)
        if fast_distance != slow_distance:
            mismatches.append(f"distance d={d} stream={i}: {fast_distance} != {slow_distance}")
        fast_cut = cut_point_count(path)
        slow_cut = cut_point_count_naive(path)
        if fast_cut != slow_cut:
            mismatches.append(f"cut d={d} stream={i}: {fast_cut} != {slow_cut}")
        if graph.num_vertices <= _DENSE_ORACLE_VERTEX_LIMIT:
            fast_res = effective_resistance(graph, solver)
            slow_res = effective_resistance_dense(graph)
            gap = abs(fast_res - slow_res) / max(abs(slow_res), 1e-12)
            max_resistance_gap = max(max_resistance_gap, gap)
            resistance_checks += 1
            if gap > 1e-8:
                mismatches.append(
                    f"resistance d={d} stream={i}: relative gap {gap:.3e}"
                )
    return {
        "instances": config.instances,
        "dimensions": dims,
        "max_n": config.max_n,
        "seed": config.seed,
        "mismatches": mismatches,
        "mismatch_count": len(mismatches),
        "resistance_checks": resistance_checks,
        "max_resistance_relative_gap": max_resistance_gap,
    }


def _run_oracle_check(config: ExperimentConfig, state: RunState) -> list[Path]:
    report = run_oracle_check(config)
    report_path = state.output_dir / "oracle-report.json"
    report_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    state.cells["oracle-check"] = [[0, config.instances]]
    if report["mismatch_count"]:
        raise RuntimeError(f"{report['mismatch_count']} oracle mismatches")
    return [report_path]


_RUNNERS = {
    "simulate": _run_simulate,
    "tails": _run_tails,
    "variance": _run_variance,
    "clt": _run_clt,
    "decompose": _run_decompose,
    "capacity": _run_capacity,
    "oracle-check": _run_oracle_check,
}


def run(config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Execute one experiment; returns (exit status, output files)."""
    config = validate_config(config)
    output_dir = config.resolved_output_dir()
    state = RunState(output_dir, config)
    state.prepare()
    started_at = _now()
    try:
        outputs = _RUNNERS[config.command](config, state)
    except Exception:
        write_manifest(
            output_dir, config, [], started_at, "incomplete", state.completed_ranges()
        )
        raise
    manifest = write_manifest(
        output_dir, config, outputs, started_at, "complete", state.completed_ranges()
    )
    state.discard()
    return 0, outputs + [manifest]


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parse_n_grid(text: str) -> list[int]:
    if ".." in text:
        low_text, high_text = text.split("..", 1)
        low, high = int(low_text), int(high_text)
        if low < 2 or low & (low - 1) or high & (high - 1) or high < low:
            raise argparse.ArgumentTypeError(
                "grid range must be ascending powers of two, like 256..8192"
            )
        return [1 << k for k in range(low.bit_length() - 1, high.bit_length())]
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_float_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected low,high")
    return float(parts[0]), float(parts[1])


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rwrange-lab",
        description="Monte Carlo experiments on random-walk range observables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser, with_kind: bool = True) -> None:
        sub.add_argument("--config", help="JSON config file; flags override it")
        sub.add_argument("--d", type=int, help="lattice dimension (4..8)")
        sub.add_argument("--samples", type=int, help="number of sample streams")
        sub.add_argument("--seed", type=int, help="base seed (default 0)")
        sub.add_argument("--threads", type=int, help="worker processes (default 1)")
        sub.add_argument("--output-dir", help=f"output directory (or ${OUTPUT_DIR_ENV})")
        if with_kind:
            sub.add_argument(
                "--kind",
                choices=[k.value for k in ObservableKind],
                help="observable (default cut)",
            )
        sub.add_argument(
            "--rel-tolerance", type=float, help="resistance solver tolerance"
        )
        sub.add_argument(
            "--max-iterations", type=int, help="resistance solver iteration cap"
        )
        sub.add_argument(
            "--preconditioner",
            choices=("diagonal", "none"),
            help="resistance solver preconditioner",
        )

    sub = subparsers.add_parser("simulate", help="dump raw walk paths")
    add_common(sub, with_kind=False)
    sub.add_argument("--n", type=int, help="steps per walk")

    sub = subparsers.add_parser("tails", help="cross-term tail samples and fit")
    add_common(sub)
    sub.add_argument("--n", type=int, help="half-length of each walk")
    sub.add_argument(
        "--window", type=_parse_float_pair, help="fit window low,high (default n^0.3,n^0.8)"
    )

    sub = subparsers.add_parser("variance", help="variance scaling across n")
    add_common(sub)
    sub.add_argument(
        "--n-grid",
        type=_parse_n_grid,
        help="power-of-two grid, e.g. 256..8192 or 256,512,1024",
    )

    sub = subparsers.add_parser("clt", help="normality diagnostics at one n")
    add_common(sub)
    sub.add_argument("--n", type=int, help="steps per walk")

    sub = subparsers.add_parser("decompose", help="dyadic cross-term dumps")
    add_common(sub)
    sub.add_argument("--n", type=int, help="steps per walk")
    sub.add_argument("--levels", type=int, help="dyadic depth K (default 4)")

    sub = subparsers.add_parser("capacity", help="range capacity estimates")
    add_common(sub, with_kind=False)
    sub.add_argument("--n", type=int, help="steps per walk")
    sub.add_argument(
        "--radius-factors", type=_parse_float_list, help="escape factors, e.g. 16,64"
    )
    sub.add_argument("--trials-per-point", type=int, help="escape trials per point")

    sub = subparsers.add_parser("oracle-check", help="fast vs slow implementation sweep")
    add_common(sub, with_kind=False)
    sub.add_argument("--max-n", type=int, help="largest walk length (default 256)")
    sub.add_argument("--instances", type=int, help="number of random checks (default 500)")

    return parser


_FLAG_FIELDS = (
    "d",
    "kind",
    "n",
    "n_grid",
    "samples",
    "seed",
    "threads",
    "output_dir",
    "window",
    "levels",
    "radius_factors",
    "trials_per_point",
    "max_n",
    "instances",
)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Merge config file (if any) with flags; flags win."""
    raw: dict = {}
    if getattr(args, "config", None):
        raw = config_from_json(Path(args.config).read_text()).to_dict()
    raw["command"] = args.command
    for field_name in _FLAG_FIELDS:
        value = getattr(args, field_name, None)
        if value is not None:
            raw[field_name] = value
    solver_raw = dict(raw.get("solver") or {})
    for flag, key in (
        ("rel_tolerance", "rel_tolerance"),
        ("max_iterations", "max_iterations"),
        ("preconditioner", "preconditioner"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            solver_raw[key] = value
    if solver_raw:
        raw["solver"] = solver_raw
    return config_from_dict(raw, source="flags")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        status, outputs = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in outputs:
        print(f"wrote {path}")
    return status


if __name__ == "__main__":
    sys.exit(main())
