"""Monte Carlo capacity of a finite lattice set via escape probabilities.

The capacity of a finite set A in Z^d (d >= 4, transient) is the sum over
x in A of the probability that a walk started at x never revisits A.  The
estimator replaces "never" by "leaves a large ball first": for each source
point it launches independent walks and counts those that exit the ball of
radius escape_radius_factor times the set's diameter (around the set's
centroid) before stepping on A again.

Literal stepping to such a ball is quadratically expensive in the radius,
so the engine simulates exactly only while the walk is near the set and
crosses the empty outer annulus in one draw per excursion, using the
harmonic hitting probability between concentric spheres; walks re-enter on
a sphere comfortably outside the set and resume exact stepping.  Both the
exact and fast-forwarded variants are exposed; they agree statistically and
each is deterministic per (seed, point index, trial index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._kernels import build_point_table, escape_trials
from .tables import write_csv
from .walks import MAX_DIMENSION, MIN_DIMENSION, LatticePoint

CAPACITY_CSV_COLUMNS = ("d", "set_size", "radius_factor", "trials", "estimate", "std_error")

MIN_RADIUS_FACTOR = 4.0
DEFAULT_TRIALS_PER_POINT = 200


@dataclass(frozen=True)
class CapacityEstimate:
    """Escape-probability capacity estimate for one point set."""

    d: int
    set_size: int
    estimate: float
    std_error: float
    escapes_per_point: int
    escape_radius: float
    radius_factor: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.estimate <= self.set_size:
            raise ValueError(
                f"capacity estimate {self.estimate} outside [0, {self.set_size}]"
            )

    def csv_row(self) -> tuple:
        return (
            self.d,
            self.set_size,
            self.radius_factor,
            self.escapes_per_point,
            self.estimate,
            self.std_error,
        )


def canonical_point_array(
    points: Iterable[LatticePoint] | np.ndarray, d: int | None = None
) -> np.ndarray:
    """Deduplicated (m, d) int64 array in lexicographic order.

    Accepts either an iterable of LatticePoint or an integer coordinate
    array; the canonical ordering makes every downstream estimate a function
    of the set, not of the iteration order it arrived in.
    """
    if isinstance(points, np.ndarray):
        array = np.asarray(points, dtype=np.int64)
        if array.ndim != 2:
            raise ValueError("point array must have shape (m, d)")
    else:
        rows = [tuple(p) for p in points]
        if not rows:
            raise ValueError("capacity needs a nonempty point set")
        array = np.array(rows, dtype=np.int64)
    if array.shape[0] == 0:
        raise ValueError("capacity needs a nonempty point set")
    if d is not None and array.shape[1] != d:
        raise ValueError(f"points have dimension {array.shape[1]}, expected {d}")
    if not MIN_DIMENSION <= array.shape[1] <= MAX_DIMENSION:
        raise ValueError(f"dimension {array.shape[1]} outside supported range")
    return np.unique(array, axis=0)


def set_diameter(points: np.ndarray) -> float:
    """Bounding-box diagonal of the set, the diameter scale for the ball."""
    spans = points.max(axis=0) - points.min(axis=0)
    return float(np.sqrt(float((spans.astype(np.float64) ** 2).sum())))


def _geometry(points: np.ndarray, escape_radius_factor: float):
    centroid = np.rint(points.mean(axis=0)).astype(np.int64)
    offsets = points - centroid
    hull_dist2 = int((offsets**2).sum(axis=1).max())
    hull_radius = math.sqrt(hull_dist2)
    escape_radius = escape_radius_factor * max(set_diameter(points), 1.0)
    reentry_radius = math.ceil(1.25 * hull_radius) + 8.0
    forward_radius = math.ceil(1.25 * reentry_radius) + 8.0
    fast_forward = forward_radius <= escape_radius / 2.0
    return centroid, hull_dist2, escape_radius, reentry_radius, forward_radius, fast_forward


def capacity_estimate(
    points: Iterable[LatticePoint] | np.ndarray,
    d: int | None = None,
    escape_radius_factor: float = 16.0,
    trials_per_point: int = DEFAULT_TRIALS_PER_POINT,
    seed: int = 0,
    fast_forward: bool | None = None,
) -> CapacityEstimate:
    """Estimate Cap(points) from escape fractions.

    ``fast_forward=None`` lets the geometry decide (annulus crossing only
    when the escape ball is at least twice the forward radius); forcing it
    off makes every trial step exactly to the escape ball, which is the slow
    reference behaviour.
    """
    array = canonical_point_array(points, d)
    m, dim = array.shape
    if escape_radius_factor < MIN_RADIUS_FACTOR:
        raise ValueError(
            f"escape_radius_factor must be at least {MIN_RADIUS_FACTOR}, "
            f"got {escape_radius_factor}"
        )
    if trials_per_point < 1:
        raise ValueError("trials_per_point must be positive")

    centroid, hull_dist2, escape_radius, reentry_radius, forward_radius, auto_ff = (
        _geometry(array, escape_radius_factor)
    )
    use_ff = auto_ff if fast_forward is None else (fast_forward and auto_ff)

    log2_size = max(4, int(4 * m - 1).bit_length())
    table = build_point_table(array, log2_size)
    exponent = 2.0 - dim
    escapes, _steps = escape_trials(
        array,
        table,
        log2_size,
        centroid,
        hull_dist2,
        int(forward_radius**2),
        int(escape_radius**2),
        reentry_radius,
        reentry_radius**exponent,
        escape_radius**exponent,
        exponent,
        np.uint64(seed),
        trials_per_point,
        use_ff,
    )
    fractions = escapes / trials_per_point
    estimate = float(fractions.sum())
    mean_fraction = estimate / m
    std_error = math.sqrt(m * mean_fraction * (1.0 - mean_fraction) / trials_per_point)
    return CapacityEstimate(
        d=dim,
        set_size=m,
        estimate=estimate,
        std_error=std_error,
        escapes_per_point=trials_per_point,
        escape_radius=escape_radius,
        radius_factor=escape_radius_factor,
    )


def capacity_radius_sweep(
    points: Iterable[LatticePoint] | np.ndarray,
    d: int | None = None,
    radius_factors: Sequence[float] = (4.0, 16.0, 64.0),
    trials_per_point: int = DEFAULT_TRIALS_PER_POINT,
    seed: int = 0,
) -> list[CapacityEstimate]:
    """Capacity estimates across escape-radius factors, to expose the bias."""
    array = canonical_point_array(points, d)
    return [
        capacity_estimate(
            array,
            escape_radius_factor=factor,
            trials_per_point=trials_per_point,
            seed=seed,
        )
        for factor in radius_factors
    ]


def write_capacity_csv(
    target: str | Path, estimates: Iterable[CapacityEstimate]
) -> Path:
    """Write capacity rows (d, set_size, radius_factor, trials, estimate, std_error)."""
    return write_csv(
        target, CAPACITY_CSV_COLUMNS, [e.csv_row() for e in estimates]
    )
