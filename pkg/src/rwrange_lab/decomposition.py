"""Cross terms and the dyadic decomposition of range observables.

Splitting a segment at an interior time and summing the observable over the
two halves always overshoots the whole-segment value, because the halves
ignore every shortcut the walk builds between them.  The overshoot is the
cross term; recursing on halves yields a dyadic decomposition whose
telescoping identity holds exactly per realization and whose cross terms at
one level come from disjoint stretches of the walk.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .observables import ObservableKind, ResistanceSolveConfig, observable
from .parallel import map_stream_chunks
from .tables import write_csv
from .walks import WalkPath, simulate_walk

CROSS_TERM_SLACK = 1e-6
_IDENTITY_UNIT_DRIFT = 1e-8

CROSS_TERM_CSV_COLUMNS = ("kind", "d", "n", "k", "l", "value", "seed", "stream")


@dataclass(frozen=True)
class CrossTerm:
    """Overshoot of a split evaluation: X[0,m] + X[m,t] - X[0,t]."""

    kind: ObservableKind
    n_left: int
    n_right: int
    value: float

    def __post_init__(self) -> None:
        if self.n_left < 1 or self.n_right < 1:
            raise ValueError("cross terms need non-degenerate halves")
        if self.value < -CROSS_TERM_SLACK:
            raise ValueError(
                f"cross term must be non-negative, got {self.value} "
                f"(slack {CROSS_TERM_SLACK})"
            )


@dataclass(frozen=True)
class DyadicDecomposition:
    """Leaf values and cross terms of the binary interval tree over [0, n].

    ``errors[k][l]`` is the cross term of the l-th interval at depth k
    (depths 0 to levels-1), i.e. the overshoot of splitting that interval in
    half.  ``total`` is the observable over [0, n] itself, and satisfies
    total = sum(leaves) - sum of all cross terms: exactly for the integer
    observables, within solver drift for resistance.
    """

    kind: ObservableKind
    n: int
    levels: int
    leaves: tuple[float, ...]
    errors: tuple[tuple[float, ...], ...]
    total: float

    def __post_init__(self) -> None:
        if len(self.leaves) != 2**self.levels:
            raise ValueError("leaf count must be 2**levels")
        if len(self.errors) != self.levels:
            raise ValueError("errors must hold one tuple per depth 0..levels-1")
        for k, level in enumerate(self.errors):
            if len(level) != 2**k:
                raise ValueError(f"depth {k} must hold 2**{k} cross terms")
        discrepancy = self.identity_discrepancy()
        if abs(discrepancy) > self.identity_tolerance():
            raise ValueError(
                f"telescoping identity violated: discrepancy {discrepancy:.3e} "
                f"exceeds {self.identity_tolerance():.3e}"
            )

    def error_sum(self) -> float:
        return float(sum(sum(level) for level in self.errors))

    def identity_discrepancy(self) -> float:
        return float(self.total - (sum(self.leaves) - self.error_sum()))

    def identity_tolerance(self) -> float:
        if self.kind is ObservableKind.RESISTANCE:
            return self.levels * 2**self.levels * _IDENTITY_UNIT_DRIFT * self.n
        return 0.0


def cross_term(
    path: WalkPath,
    kind: ObservableKind,
    split: int,
    end: int,
    config: ResistanceSolveConfig | None = None,
) -> CrossTerm:
    """Cross term of ``path`` split at time ``split`` within [0, end]."""
    if not 0 < split < end <= path.n:
        raise ValueError(
            f"need 0 < split < end <= n, got split={split} end={end} n={path.n}"
        )
    left = observable(path.segment(0, split), kind, config)
    right = observable(path.segment(split, end), kind, config)
    whole = observable(path.segment(0, end), kind, config)
    return CrossTerm(
        kind=kind, n_left=split, n_right=end - split, value=left + right - whole
    )


def dyadic_decompose(
    path: WalkPath,
    kind: ObservableKind,
    levels: int,
    config: ResistanceSolveConfig | None = None,
) -> DyadicDecomposition:
    """Evaluate the observable on every node of the dyadic tree over [0, n]."""
    if levels < 1:
        raise ValueError("levels must be at least 1")
    n = path.n
    blocks = 2**levels
    if n % blocks != 0:
        raise ValueError(f"n={n} is not divisible by 2**levels={blocks}")
    values: list[list[float]] = []
    for k in range(levels + 1):
        pieces = 2**k
        width = n // pieces
        values.append(
            [
                observable(path.segment(l * width, (l + 1) * width), kind, config)
                for l in range(pieces)
            ]
        )
    errors = tuple(
        tuple(
            values[k + 1][2 * l] + values[k + 1][2 * l + 1] - values[k][l]
            for l in range(2**k)
        )
        for k in range(levels)
    )
    return DyadicDecomposition(
        kind=kind,
        n=n,
        levels=levels,
        leaves=tuple(values[levels]),
        errors=errors,
        total=values[0][0],
    )


def _tail_chunk(args: tuple, start: int, stop: int) -> np.ndarray:
    d, n, kind_value, seed, stream_base, cfg_fields = args
    kind = ObservableKind(kind_value)
    config = ResistanceSolveConfig(*cfg_fields) if cfg_fields else None
    out = np.empty(stop - start)
    for j in range(start, stop):
        path = simulate_walk(d, 2 * n, seed=seed, stream=stream_base + j)
        out[j - start] = cross_term(path, kind, n, 2 * n, config).value
    return out


def cross_term_tail_samples(
    d: int,
    n: int,
    kind: ObservableKind,
    samples: int,
    seed: int = 0,
    config: ResistanceSolveConfig | None = None,
    stream_base: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """Independent draws of the equal-split cross term at half-length n.

    Stream j contributes X[0,n] + X[n,2n] - X[0,2n] of a fresh 2n-step walk
    on stream ``stream_base + j``; the output is in stream order regardless
    of the worker count.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    cfg_fields = (
        (config.rel_tolerance, config.max_iterations, config.preconditioner)
        if config is not None
        else None
    )
    args = (d, n, kind.value, seed, stream_base, cfg_fields)
    return map_stream_chunks(_tail_chunk, args, samples, workers)


def tail_sample_rows(
    d: int,
    n: int,
    kind: ObservableKind,
    values: Sequence[float],
    seed: int,
    stream_base: int = 0,
) -> list[tuple]:
    """CSV rows for equal-split cross-term draws (depth and index both 0)."""
    return [
        (kind.value, d, n, 0, 0, float(v), seed, stream_base + j)
        for j, v in enumerate(values)
    ]


def decomposition_rows(
    decomposition: DyadicDecomposition, d: int, seed: int, stream: int
) -> list[tuple]:
    """CSV rows for every cross term of one realized decomposition."""
    return [
        (
            decomposition.kind.value,
            d,
            decomposition.n,
            k,
            l,
            float(value),
            seed,
            stream,
        )
        for k, level in enumerate(decomposition.errors)
        for l, value in enumerate(level)
    ]


def write_cross_term_csv(target: str | Path, rows: Iterable[Sequence[object]]) -> Path:
    """Write cross-term rows (kind, d, n, k, l, value, seed, stream)."""
    return write_csv(target, CROSS_TERM_CSV_COLUMNS, rows)
