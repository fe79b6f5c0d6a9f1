"""Simple random walk trajectories on Z^d with reproducible seed/stream provenance.

A walk is stored as the full array of positions S_0..S_n because every
observable downstream needs random access to the trajectory.  Randomness comes
from a counter-based Philox generator keyed by (seed, stream), so each Monte
Carlo sample owns an independent stream and results never depend on execution
order or worker count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterator

import numpy as np

MIN_DIMENSION = 4
MAX_DIMENSION = 8

_U64 = 2**64


def _check_dimension(d: int) -> int:
    d = int(d)
    if not MIN_DIMENSION <= d <= MAX_DIMENSION:
        raise ValueError(
            f"dimension must be in [{MIN_DIMENSION}, {MAX_DIMENSION}], got {d}"
        )
    return d


def _check_u64(value: int, name: str) -> int:
    value = int(value)
    if not 0 <= value < _U64:
        raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")
    return value


def stream_generator(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for one (seed, stream) pair.

    Distinct streams under the same seed are statistically independent, and
    the mapping is pure: the same pair always yields the same bit sequence
    regardless of platform or thread count.
    """
    key = np.array(
        [_check_u64(seed, "seed"), _check_u64(stream, "stream")], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class LatticePoint:
    """A point of Z^d, hashable and comparable by value."""

    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        coords = tuple(int(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        _check_dimension(len(coords))

    @property
    def d(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)


class _StepSequence:
    """Read-only view of a coordinate array as a sequence of LatticePoint."""

    __slots__ = ("_coords",)

    def __init__(self, coords: np.ndarray) -> None:
        self._coords = coords

    def __len__(self) -> int:
        return self._coords.shape[0]

    def __getitem__(self, m: int) -> LatticePoint:
        return LatticePoint(tuple(int(c) for c in self._coords[m]))

    def __iter__(self) -> Iterator[LatticePoint]:
        for row in self._coords:
            yield LatticePoint(tuple(int(c) for c in row))


class WalkPath:
    """A realized trajectory S_0..S_n on Z^d.

    ``coords`` is the (n+1, d) int64 position array; it is marked read-only so
    paths can be shared freely across threads.  ``seed`` and ``stream`` record
    how the path was generated (they are provenance, not re-derivable from the
    positions).
    """

    __slots__ = ("d", "coords", "seed", "stream")

    def __init__(self, coords: np.ndarray, seed: int = 0, stream: int = 0) -> None:
        coords = np.ascontiguousarray(coords, dtype=np.int64)
        if coords.ndim != 2:
            raise ValueError("coords must be a 2-d array of shape (n+1, d)")
        d = _check_dimension(coords.shape[1])
        if coords.shape[0] < 1:
            raise ValueError("a path must contain at least the starting position")
        if np.any(coords[0] != 0):
            raise ValueError("paths start at the origin")
        if coords.shape[0] > 1:
            step_norms = np.abs(np.diff(coords, axis=0)).sum(axis=1)
            if np.any(step_norms != 1):
                bad = int(np.argmax(step_norms != 1))
                raise ValueError(f"non unit step between positions {bad} and {bad + 1}")
        coords.setflags(write=False)
        self.coords = coords
        self.d = d
        self.seed = _check_u64(seed, "seed")
        self.stream = _check_u64(stream, "stream")

    @property
    def n(self) -> int:
        """Number of steps (positions minus one)."""
        return self.coords.shape[0] - 1

    @property
    def steps(self) -> _StepSequence:
        """Positions S_0..S_n as a sequence of LatticePoint."""
        return _StepSequence(self.coords)

    def point(self, m: int) -> LatticePoint:
        return self.steps[m]

    def segment(self, a: int, b: int) -> "SegmentView":
        return SegmentView(self, a, b)

    def __repr__(self) -> str:
        return (
            f"WalkPath(d={self.d}, n={self.n}, seed={self.seed}, "
            f"stream={self.stream})"
        )


@dataclass(frozen=True)
class SegmentView:
    """The time window [a, b] of a path, cheap to create (no copy)."""

    path: WalkPath
    a: int
    b: int

    def __post_init__(self) -> None:
        a, b = int(self.a), int(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not 0 <= a <= b <= self.path.n:
            raise ValueError(
                f"segment [{a}, {b}] out of range for a path of {self.path.n} steps"
            )

    @property
    def coords(self) -> np.ndarray:
        """Positions S_a..S_b as an (b-a+1, d) view."""
        return self.path.coords[self.a : self.b + 1]

    @property
    def length(self) -> int:
        return self.b - self.a


def simulate_walk(d: int, n: int, seed: int = 0, stream: int = 0) -> WalkPath:
    """Simulate n steps of the simple random walk on Z^d.

    Each step moves one unit along a uniformly chosen signed axis (2d equally
    likely moves).  The same (d, n, seed, stream) always produces the same
    path, bit for bit.
    """
    d = _check_dimension(d)
    n = int(n)
    if n < 1:
        raise ValueError(f"step count must be at least 1, got {n}")
    rng = stream_generator(seed, stream)
    moves = rng.integers(0, 2 * d, size=n)
    axis = moves >> 1
    sign = 1 - 2 * (moves & 1)
    increments = np.zeros((n, d), dtype=np.int64)
    increments[np.arange(n), axis] = sign
    coords = np.zeros((n + 1, d), dtype=np.int64)
    np.cumsum(increments, axis=0, out=coords[1:])
    return WalkPath(coords, seed=seed, stream=stream)


def reverse_translate(view: SegmentView) -> WalkPath:
    """Time-reverse a segment and translate it to start at the origin.

    Maps S_a..S_b to the path whose position i is S_{b-i} - S_b.  The result
    is a valid walk path; it carries the provenance of the generating walk.
    """
    coords = view.coords
    reversed_coords = coords[::-1] - coords[-1]
    return WalkPath(reversed_coords, seed=view.path.seed, stream=view.path.stream)


_HEADER = struct.Struct("<IQQQ")


def dump_path(path: WalkPath, fh: BinaryIO) -> None:
    """Write a path in the binary dump format.

    Layout: little-endian header (d: u32, n: u64, seed: u64, stream: u64)
    followed by (n+1)*d little-endian i64 coordinates in time-major order.
    """
    fh.write(_HEADER.pack(path.d, path.n, path.seed, path.stream))
    fh.write(np.ascontiguousarray(path.coords, dtype="<i8").tobytes())


def load_path(fh: BinaryIO) -> WalkPath:
    """Read a path written by :func:`dump_path`."""
    header = fh.read(_HEADER.size)
    if len(header) != _HEADER.size:
        raise ValueError("truncated path dump header")
    d, n, seed, stream = _HEADER.unpack(header)
    payload = fh.read((n + 1) * d * 8)
    if len(payload) != (n + 1) * d * 8:
        raise ValueError("truncated path dump payload")
    coords = np.frombuffer(payload, dtype="<i8").reshape(n + 1, d).astype(np.int64)
    return WalkPath(coords, seed=seed, stream=stream)
