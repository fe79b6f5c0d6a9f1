"""Observables on the range graph of a walk segment.

The range graph of a segment has the distinct visited lattice points as
vertices and the distinct traversed nearest-neighbour bonds as edges, with
multiplicities dropped.  Three observables measure how folded that graph is
between the segment's endpoints: the graph distance, the number of cut
points, and the effective resistance with unit conductance per edge.  Each
observable has a fast implementation and an independent slow one used to
cross-check it; the slow paths share no mechanism with the fast ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._kernels import pcg_grounded
from .parallel import map_stream_chunks
from .walks import LatticePoint, SegmentView, WalkPath, simulate_walk

_ID_FOLD_LIMIT = np.int64(2) ** 62


class ObservableKind(enum.Enum):
    """The three endpoint observables, with values used as CLI names."""

    GRAPH_DISTANCE = "distance"
    CUT_POINTS = "cut"
    RESISTANCE = "resistance"


@dataclass(frozen=True)
class ResistanceSolveConfig:
    """Controls for the conjugate-gradient resistance solve."""

    rel_tolerance: float = 1e-10
    max_iterations: int | None = None
    preconditioner: str = "diagonal"

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tolerance <= 1e-4:
            raise ValueError(
                f"rel_tolerance must lie in (0, 1e-4], got {self.rel_tolerance}"
            )
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive when given")
        if self.preconditioner not in ("diagonal", "none"):
            raise ValueError(
                f"preconditioner must be 'diagonal' or 'none', got {self.preconditioner!r}"
            )

    def iteration_cap(self, num_vertices: int) -> int:
        # range graphs are nearly one-dimensional, so CG can need on the
        # order of num_vertices iterations; the default cap stays linear
        if self.max_iterations is not None:
            return self.max_iterations
        return 4 * num_vertices + 100


class ResistanceSolveError(RuntimeError):
    """Raised when the resistance solve stops before reaching tolerance."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"resistance solve stalled at residual {residual:.3e} "
            f"after {iterations} iterations"
        )


def _vertex_ids(coords: np.ndarray) -> tuple[np.ndarray, int]:
    """Dense vertex id per row, ids ordered lexicographically by coordinates.

    Columns are folded into a single integer key one at a time, re-densifying
    after each fold so the running key stays far below the int64 range.
    """
    rows, d = coords.shape
    key = (coords[:, 0] - coords[:, 0].min()).astype(np.int64)
    for j in range(1, d):
        col = coords[:, j] - coords[:, j].min()
        width = np.int64(col.max()) + 1
        if (key.max() + 1) * width >= _ID_FOLD_LIMIT:
            raise OverflowError("segment too large to key vertices in int64")
        key = key * width + col
        if j < d - 1:
            _, key = np.unique(key, return_inverse=True)
    unique_keys, ids = np.unique(key, return_inverse=True)
    return ids.astype(np.int64), int(unique_keys.size)


class RangeGraph:
    """The deduplicated trace of a walk segment, in CSR adjacency form.

    Vertices are numbered in lexicographic coordinate order.  ``endpoints``
    are the vertex ids of the segment's first and last positions.
    """

    __slots__ = ("d", "coords", "indptr", "indices", "endpoints", "edge_count", "_index")

    def __init__(
        self,
        d: int,
        coords: np.ndarray,
        indptr: np.ndarray,
        indices: np.ndarray,
        endpoints: tuple[int, int],
        edge_count: int,
    ):
        self.d = d
        self.coords = coords
        self.indptr = indptr
        self.indices = indices
        self.endpoints = endpoints
        self.edge_count = edge_count
        self._index: dict[LatticePoint, int] | None = None

    @property
    def num_vertices(self) -> int:
        return self.indptr.size - 1

    @property
    def vertex_index(self) -> dict[LatticePoint, int]:
        """Lazily built map from lattice point to vertex id."""
        if self._index is None:
            self._index = {
                LatticePoint(tuple(int(c) for c in row)): i
                for i, row in enumerate(self.coords)
            }
        return self._index

    def neighbors(self, vertex: int) -> np.ndarray:
        return self.indices[self.indptr[vertex] : self.indptr[vertex + 1]]

    def degree(self, vertex: int) -> int:
        return int(self.indptr[vertex + 1] - self.indptr[vertex])


def build_range_graph(view: SegmentView | WalkPath) -> RangeGraph:
    """Build the range graph of a segment, collapsing repeated vertices and bonds."""
    view = _as_view(view)
    if view.length < 1:
        raise ValueError("range graph needs a segment with at least one step")
    coords = view.coords
    ids, num_vertices = _vertex_ids(coords)

    first_seen = np.zeros(num_vertices, dtype=np.int64)
    first_seen[ids[::-1]] = np.arange(coords.shape[0] - 1, -1, -1)
    vertex_coords = coords[first_seen].copy()
    vertex_coords.setflags(write=False)

    tail, head = ids[:-1], ids[1:]
    low = np.minimum(tail, head)
    high = np.maximum(tail, head)
    edge_keys = np.unique(low * np.int64(num_vertices) + high)
    low = edge_keys // num_vertices
    high = edge_keys % num_vertices

    src = np.concatenate([low, high])
    dst = np.concatenate([high, low])
    order = np.lexsort((dst, src))
    indices = np.ascontiguousarray(dst[order])
    counts = np.bincount(src, minlength=num_vertices)
    indptr = np.empty(num_vertices + 1, dtype=np.int64)
    indptr[0] = 0
    np.cumsum(counts, out=indptr[1:])
    indices.setflags(write=False)
    indptr.setflags(write=False)

    return RangeGraph(
        d=view.path.d,
        coords=vertex_coords,
        indptr=indptr,
        indices=indices,
        endpoints=(int(ids[0]), int(ids[-1])),
        edge_count=int(edge_keys.size),
    )


def _as_view(segment: SegmentView | WalkPath) -> SegmentView:
    if isinstance(segment, WalkPath):
        return segment.segment(0, segment.n)
    return segment


def graph_distance(graph: RangeGraph) -> int:
    """Breadth-first distance between the endpoint vertices."""
    source, target = graph.endpoints
    if source == target:
        return 0
    indptr, indices = graph.indptr, graph.indices
    seen = np.zeros(graph.num_vertices, dtype=bool)
    seen[source] = True
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        local = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        neighbors = indices[np.repeat(starts, counts) + local]
        neighbors = neighbors[~seen[neighbors]]
        if neighbors.size == 0:
            break
        frontier = np.unique(neighbors)
        seen[frontier] = True
        if seen[target]:
            return level
    raise RuntimeError("endpoints are disconnected; a range graph is always connected")


def graph_distance_dijkstra(graph: RangeGraph) -> int:
    """Endpoint distance via shortest paths on the sparse adjacency matrix.

    Slow reference for :func:`graph_distance`; shares none of its machinery.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    nv = graph.num_vertices
    matrix = csr_matrix(
        (np.ones(graph.indices.size), graph.indices, graph.indptr), shape=(nv, nv)
    )
    source, target = graph.endpoints
    dist = dijkstra(matrix, indices=source)
    if not np.isfinite(dist[target]):
        raise RuntimeError("endpoints are disconnected; a range graph is always connected")
    return int(round(dist[target]))


def cut_point_count(view: SegmentView | WalkPath) -> int:
    """Number of times i in (a, b] splitting the segment into disjoint ranges.

    A time i counts when the points visited on [a, i-1] and those visited on
    [i, b] share nothing.  Equivalently, no vertex's first visit is before i
    while its last visit is at or after i; the count comes from a coverage
    sweep over the (first, last] interval of every vertex.
    """
    view = _as_view(view)
    if view.length < 1:
        raise ValueError("cut points need a segment with at least one step")
    coords = view.coords
    rows = coords.shape[0]
    ids, num_vertices = _vertex_ids(coords)

    positions = np.arange(rows, dtype=np.int64)
    first = np.zeros(num_vertices, dtype=np.int64)
    first[ids[::-1]] = positions[::-1]
    last = np.zeros(num_vertices, dtype=np.int64)
    last[ids] = positions

    coverage = np.zeros(rows + 1, dtype=np.int64)
    coverage[first + 1] += 1
    coverage[last + 1] -= 1
    covered = np.cumsum(coverage[:rows])
    return int(np.count_nonzero(covered[1:] == 0))


def cut_point_count_naive(view: SegmentView | WalkPath) -> int:
    """Literal past/future disjointness test at each split; quadratic time.

    Slow reference for :func:`cut_point_count`.
    """
    view = _as_view(view)
    if view.length < 1:
        raise ValueError("cut points need a segment with at least one step")
    points = [tuple(int(c) for c in row) for row in view.coords]
    count = 0
    for i in range(1, len(points)):
        if set(points[:i]).isdisjoint(points[i:]):
            count += 1
    return count


def resistance_between(
    graph: RangeGraph,
    source: int,
    sink: int,
    config: ResistanceSolveConfig | None = None,
) -> float:
    """Effective resistance between two vertices, unit conductance per edge."""
    config = config or ResistanceSolveConfig()
    nv = graph.num_vertices
    for vertex in (source, sink):
        if not 0 <= vertex < nv:
            raise ValueError(f"vertex {vertex} out of range for {nv} vertices")
    if source == sink:
        return 0.0
    potentials, residual, iterations, converged = pcg_grounded(
        graph.indptr,
        graph.indices,
        source,
        sink,
        config.rel_tolerance,
        config.iteration_cap(nv),
        config.preconditioner == "diagonal",
    )
    if not converged:
        raise ResistanceSolveError(residual=float(residual), iterations=int(iterations))
    return float(potentials[source])


def effective_resistance(
    graph: RangeGraph, config: ResistanceSolveConfig | None = None
) -> float:
    """Effective resistance between the segment's endpoint vertices."""
    source, sink = graph.endpoints
    return resistance_between(graph, source, sink, config)


def resistance_between_dense(graph: RangeGraph, source: int, sink: int) -> float:
    """Direct dense solve of the grounded Laplacian system.

    Slow reference for :func:`resistance_between`; refuses graphs with more
    than 2000 vertices, where the dense factorization stops being sensible.
    """
    nv = graph.num_vertices
    if nv > 2000:
        raise ValueError(f"dense solve limited to 2000 vertices, got {nv}")
    for vertex in (source, sink):
        if not 0 <= vertex < nv:
            raise ValueError(f"vertex {vertex} out of range for {nv} vertices")
    if source == sink:
        return 0.0
    laplacian = np.zeros((nv, nv))
    for v in range(nv):
        row = graph.neighbors(v)
        laplacian[v, v] = row.size
        laplacian[v, row] = -1.0
    keep = np.arange(nv) != sink
    reduced = laplacian[np.ix_(keep, keep)]
    rhs = np.zeros(nv - 1)
    source_idx = source if source < sink else source - 1
    rhs[source_idx] = 1.0
    potentials = np.linalg.solve(reduced, rhs)
    return float(potentials[source_idx])


def effective_resistance_dense(graph: RangeGraph) -> float:
    """Dense-solve counterpart of :func:`effective_resistance`."""
    source, sink = graph.endpoints
    return resistance_between_dense(graph, source, sink)


def observable(
    segment: SegmentView | WalkPath,
    kind: ObservableKind,
    config: ResistanceSolveConfig | None = None,
) -> float:
    """Evaluate one observable on a segment; an empty segment scores zero."""
    view = _as_view(segment)
    if view.length == 0:
        return 0.0
    if kind is ObservableKind.CUT_POINTS:
        return float(cut_point_count(view))
    graph = build_range_graph(view)
    if kind is ObservableKind.GRAPH_DISTANCE:
        return float(graph_distance(graph))
    if kind is ObservableKind.RESISTANCE:
        return effective_resistance(graph, config)
    raise ValueError(f"unknown observable kind: {kind!r}")


def edge_list_text(graph: RangeGraph) -> str:
    """Render the undirected edge list, one 'u v' line per edge with u < v."""
    lines = []
    for u in range(graph.num_vertices):
        for v in graph.neighbors(u):
            if u < v:
                lines.append(f"{u} {v}")
    return "\n".join(lines) + ("\n" if lines else "")


def _observable_chunk(args: tuple, start: int, stop: int) -> np.ndarray:
    kind_value, d, n, seed, stream_base, cfg_fields = args
    kind = ObservableKind(kind_value)
    config = ResistanceSolveConfig(*cfg_fields) if cfg_fields else None
    out = np.empty(stop - start)
    for j in range(start, stop):
        path = simulate_walk(d, n, seed=seed, stream=stream_base + j)
        out[j - start] = observable(path, kind, config)
    return out


def sample_observable_values(
    kind: ObservableKind,
    d: int,
    n: int,
    samples: int,
    seed: int = 0,
    config: ResistanceSolveConfig | None = None,
    stream_base: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """Observable values over independent walks on streams base..base+samples-1.

    The result depends only on (kind, d, n, seed, stream_base, config); the
    worker count changes the schedule, never the numbers.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    cfg_fields = (
        (config.rel_tolerance, config.max_iterations, config.preconditioner)
        if config is not None
        else None
    )
    args = (kind.value, d, n, seed, stream_base, cfg_fields)
    return map_stream_chunks(_observable_chunk, args, samples, workers)
