"""Sample diagnostics: tail-exponent fits, variance scaling, normality checks.

Everything here consumes vectors of Monte Carlo draws produced elsewhere and
reduces them deterministically, so a report is a pure function of the sample
values.  Logarithms in the candidate variance laws are natural logs.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .decomposition import cross_term_tail_samples
from .observables import ObservableKind, ResistanceSolveConfig, sample_observable_values

TAIL_GRID_POINTS = 24
MIN_TAIL_SAMPLES = 1000
MIN_USABLE_GRID_POINTS = 8
MIN_VARIANCE_SAMPLES = 500
MIN_CLT_SAMPLES = 1000

VARIANCE_LAWS = ("n", "n_log_n", "n_3_2", "n2_over_log2")

VARIANCE_CSV_COLUMNS = ("kind", "d", "n", "variance", "sample_count", "std_error")
TAIL_CSV_COLUMNS = ("l", "survival")


@dataclass(frozen=True)
class TailFit:
    """Log-log least-squares fit of the empirical survival function."""

    slope: float
    intercept: float
    r_squared: float
    l_min: float
    l_max: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < MIN_USABLE_GRID_POINTS:
            raise ValueError(
                f"tail fit needs at least {MIN_USABLE_GRID_POINTS} grid points, "
                f"got {self.n_points}"
            )
        if not self.l_min < self.l_max:
            raise ValueError("tail fit window must satisfy l_min < l_max")


@dataclass(frozen=True)
class GridPoint:
    """One cell of a variance scan."""

    n: int
    sample_variance: float
    sample_count: int
    std_error_of_variance: float


@dataclass(frozen=True)
class VarianceScan:
    """Sample variances along an n-grid with goodness of fit per growth law."""

    kind: ObservableKind
    d: int
    grid: tuple[GridPoint, ...]
    model_scores: dict[str, float]
    slope: float

    def __post_init__(self) -> None:
        ns = [cell.n for cell in self.grid]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("variance grid must be strictly increasing in n")
        if any(cell.sample_count < MIN_VARIANCE_SAMPLES for cell in self.grid):
            raise ValueError(
                f"every grid cell needs at least {MIN_VARIANCE_SAMPLES} samples"
            )

    def best_model(self) -> str:
        return max(self.model_scores, key=lambda name: self.model_scores[name])


@dataclass(frozen=True)
class CltReport:
    """Normality diagnostics of standardized observable samples."""

    kind: ObservableKind
    d: int
    n: int
    skewness: float
    excess_kurtosis: float
    ks_distance: float
    median_abs_standardized: float
    sample_count: int

    def __post_init__(self) -> None:
        if self.sample_count < MIN_CLT_SAMPLES:
            raise ValueError(
                f"normality report needs at least {MIN_CLT_SAMPLES} samples, "
                f"got {self.sample_count}"
            )
        if not 0.0 <= self.ks_distance <= 1.0:
            raise ValueError("KS distance must lie in [0, 1]")


def survival_curve(
    samples: np.ndarray, window: tuple[float, float], grid_points: int = TAIL_GRID_POINTS
) -> tuple[np.ndarray, np.ndarray]:
    """Rank-based survival P(X >= l) on a geometric l-grid, zero points dropped."""
    values = np.sort(np.asarray(samples, dtype=np.float64))
    l_min, l_max = float(window[0]), float(window[1])
    grid = np.geomspace(l_min, l_max, grid_points)
    # count of samples >= l by binary search on the sorted values
    survivors = values.size - np.searchsorted(values, grid, side="left")
    survival = survivors / values.size
    keep = survival > 0
    return grid[keep], survival[keep]


def fit_tail_exponent(samples: np.ndarray, window: tuple[float, float]) -> TailFit:
    """Fit log-survival against log-level over a geometric grid in the window."""
    values = np.asarray(samples, dtype=np.float64)
    if values.size < MIN_TAIL_SAMPLES:
        raise ValueError(
            f"tail fit needs at least {MIN_TAIL_SAMPLES} samples, got {values.size}"
        )
    l_min, l_max = float(window[0]), float(window[1])
    if not 1.0 <= l_min < l_max:
        raise ValueError(f"window must satisfy 1 <= l_min < l_max, got {window}")
    # grid points beyond the largest sample have zero survival and are
    # dropped below; a window that empties most of the grid errors out
    grid, survival = survival_curve(values, (l_min, l_max))
    if grid.size < MIN_USABLE_GRID_POINTS:
        raise ValueError(
            f"only {grid.size} grid points have positive survival; "
            "narrow the window"
        )
    x = np.log(grid)
    y = np.log(survival)
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(((y - predicted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return TailFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        l_min=l_min,
        l_max=l_max,
        n_points=int(grid.size),
    )


def default_tail_window(n: int) -> tuple[float, float]:
    """The n^0.3 .. n^0.8 window used for cross-term tail fits."""
    return (float(n) ** 0.3, float(n) ** 0.8)


def jackknife_variance_error(values: np.ndarray) -> float:
    """Delete-1 jackknife standard error of the unbiased sample variance."""
    x = np.asarray(values, dtype=np.float64)
    count = x.size
    if count < 3:
        raise ValueError("jackknife needs at least 3 samples")
    centered = x - x.mean()
    ss = float((centered**2).sum())
    leave_one_out = (ss - centered**2 * (count / (count - 1))) / (count - 2)
    deviations = leave_one_out - leave_one_out.mean()
    return float(np.sqrt((count - 1) / count * (deviations**2).sum()))


def _law_log_values(law: str, ns: np.ndarray) -> np.ndarray:
    log_n = np.log(ns)
    if law == "n":
        return log_n
    if law == "n_log_n":
        return log_n + np.log(log_n)
    if law == "n_3_2":
        return 1.5 * log_n
    if law == "n2_over_log2":
        return 2.0 * log_n - 2.0 * np.log(log_n)
    raise ValueError(f"unknown variance law {law!r}")


def _intercept_only_r_squared(y: np.ndarray, x: np.ndarray) -> float:
    """R-squared of y ~ x + const with the slope pinned to one."""
    residuals = y - x
    residuals = residuals - residuals.mean()
    ss_res = float((residuals**2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def _variance_stream_base(n: int) -> int:
    # distinct n-cells draw from disjoint stream ranges
    return n << 32


def validate_variance_grid(n_grid: list[int] | tuple[int, ...], samples_per_n: int) -> list[int]:
    """Check the n-grid and sample budget for a variance scan."""
    ns = [int(n) for n in n_grid]
    if len(ns) < 2:
        raise ValueError("variance scan needs at least two grid points")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_grid must be strictly increasing")
    if any(n < 2 or n & (n - 1) for n in ns):
        raise ValueError("n_grid entries must be powers of two")
    if samples_per_n < MIN_VARIANCE_SAMPLES:
        raise ValueError(
            f"samples_per_n must be at least {MIN_VARIANCE_SAMPLES}, "
            f"got {samples_per_n}"
        )
    return ns


def variance_scan_from_values(
    kind: ObservableKind, d: int, values_by_n: dict[int, np.ndarray]
) -> VarianceScan:
    """Reduce pre-drawn per-n sample vectors to a VarianceScan."""
    ns = sorted(values_by_n)
    cells = [
        GridPoint(
            n=n,
            sample_variance=float(np.asarray(values_by_n[n]).var(ddof=1)),
            sample_count=int(np.asarray(values_by_n[n]).size),
            std_error_of_variance=jackknife_variance_error(values_by_n[n]),
        )
        for n in ns
    ]
    ns_arr = np.array(ns, dtype=np.float64)
    log_var = np.log(np.array([cell.sample_variance for cell in cells]))
    slope = float(np.polyfit(np.log(ns_arr), log_var, 1)[0])
    scores = {
        law: _intercept_only_r_squared(log_var, _law_log_values(law, ns_arr))
        for law in VARIANCE_LAWS
    }
    return VarianceScan(
        kind=kind, d=d, grid=tuple(cells), model_scores=scores, slope=slope
    )


def variance_scan(
    kind: ObservableKind,
    d: int,
    n_grid: list[int] | tuple[int, ...],
    samples_per_n: int,
    seed: int = 0,
    config: ResistanceSolveConfig | None = None,
    workers: int = 1,
) -> VarianceScan:
    """Sample variance of the observable across a power-of-two n-grid."""
    ns = validate_variance_grid(n_grid, samples_per_n)
    values_by_n = {
        n: sample_observable_values(
            kind,
            d,
            n,
            samples_per_n,
            seed=seed,
            config=config,
            stream_base=_variance_stream_base(n),
            workers=workers,
        )
        for n in ns
    }
    return variance_scan_from_values(kind, d, values_by_n)


def clt_report(
    values: np.ndarray, kind: ObservableKind, d: int, n: int
) -> CltReport:
    """Normality diagnostics of pre-drawn observable samples."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < MIN_CLT_SAMPLES:
        raise ValueError(
            f"normality report needs at least {MIN_CLT_SAMPLES} samples, got {x.size}"
        )
    spread = x.std(ddof=1)
    if spread == 0.0:
        raise ValueError("samples have zero variance; nothing to standardize")
    standardized = (x - x.mean()) / spread
    return CltReport(
        kind=kind,
        d=d,
        n=n,
        skewness=float(sps.skew(standardized)),
        excess_kurtosis=float(sps.kurtosis(standardized)),
        ks_distance=float(sps.kstest(standardized, "norm").statistic),
        median_abs_standardized=float(np.median(np.abs(standardized))),
        sample_count=int(x.size),
    )


def clt_diagnostics(
    kind: ObservableKind,
    d: int,
    n: int,
    samples: int,
    seed: int = 0,
    config: ResistanceSolveConfig | None = None,
    workers: int = 1,
) -> CltReport:
    """Draw fresh observable samples and reduce them to a normality report."""
    values = sample_observable_values(
        kind, d, n, samples, seed=seed, config=config, workers=workers
    )
    return clt_report(values, kind, d, n)


def tail_scan(
    kind: ObservableKind,
    d: int,
    n: int,
    samples: int,
    seed: int = 0,
    window: tuple[float, float] | None = None,
    config: ResistanceSolveConfig | None = None,
    workers: int = 1,
) -> tuple[TailFit, np.ndarray]:
    """Draw cross-term samples at half-length n and fit their tail exponent."""
    values = cross_term_tail_samples(
        d, n, kind, samples, seed=seed, config=config, workers=workers
    )
    fit = fit_tail_exponent(values, window or default_tail_window(n))
    return fit, values


def report_to_dict(report) -> dict:
    """Dataclass report as a JSON-ready dict (enums become their values)."""
    def convert(value):
        if isinstance(value, ObservableKind):
            return value.value
        if isinstance(value, dict):
            return {k: convert(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [convert(v) for v in value]
        if dataclasses.is_dataclass(value) and not isinstance(value, type):
            return {
                f.name: convert(getattr(value, f.name))
                for f in dataclasses.fields(value)
            }
        if isinstance(value, (np.integer,)):
            return int(value)
        if isinstance(value, (np.floating,)):
            return float(value)
        return value

    return convert(report)


def report_to_json(report) -> str:
    """Canonical JSON text for any report dataclass."""
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2)


def variance_scan_rows(scan: VarianceScan) -> list[tuple]:
    """CSV rows (kind, d, n, variance, sample_count, std_error) per grid cell."""
    return [
        (
            scan.kind.value,
            scan.d,
            cell.n,
            cell.sample_variance,
            cell.sample_count,
            cell.std_error_of_variance,
        )
        for cell in scan.grid
    ]


def survival_rows(samples: np.ndarray, window: tuple[float, float]) -> list[tuple]:
    """CSV rows (l, survival) of the fitted survival curve."""
    grid, survival = survival_curve(np.asarray(samples, dtype=np.float64), window)
    return [(float(l), float(s)) for l, s in zip(grid, survival)]
