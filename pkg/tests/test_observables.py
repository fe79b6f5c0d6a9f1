"""Tests for range graphs and the three observables with their oracles."""

import numpy as np
import pytest

from rwrange_lab.observables import (
    ObservableKind,
    ResistanceSolveConfig,
    ResistanceSolveError,
    build_range_graph,
    cut_point_count,
    cut_point_count_naive,
    edge_list_text,
    effective_resistance,
    effective_resistance_dense,
    graph_distance,
    graph_distance_dijkstra,
    observable,
    resistance_between,
    resistance_between_dense,
)
from rwrange_lab.walks import LatticePoint, SegmentView, WalkPath, simulate_walk, stream_generator

D4 = 4


def make_path(*points):
    coords = np.array([list(p) for p in points], dtype=np.int64)
    return WalkPath(coords)


def straight_path(n, d=D4):
    coords = np.zeros((n + 1, d), dtype=np.int64)
    coords[:, 0] = np.arange(n + 1)
    return WalkPath(coords)


# Path 0, e1, e1+e2, e2, 0 then a repeated step to e2: the deduplicated edge
# set is exactly the 4-cycle on those four vertices.
CYCLE_WITH_TAIL = (
    (0, 0, 0, 0),
    (1, 0, 0, 0),
    (1, 1, 0, 0),
    (0, 1, 0, 0),
    (0, 0, 0, 0),
    (0, 1, 0, 0),
)


def bfs_reachable_count(graph):
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in graph.neighbors(u):
                if int(v) not in seen:
                    seen.add(int(v))
                    nxt.append(int(v))
        frontier = nxt
    return len(seen)


def test_build_straight_path_counts():
    graph = build_range_graph(SegmentView(straight_path(2), 0, 2))
    assert graph.num_vertices == 3
    assert graph.edge_count == 2


def test_build_dedupes_retraced_edges():
    path = make_path((0, 0, 0, 0), (1, 0, 0, 0), (0, 0, 0, 0), (1, 0, 0, 0))
    graph = build_range_graph(SegmentView(path, 0, 3))
    assert graph.num_vertices == 2
    assert graph.edge_count == 1


def test_build_rejects_empty_segment():
    path = straight_path(4)
    with pytest.raises(ValueError):
        build_range_graph(SegmentView(path, 2, 2))


@pytest.mark.parametrize("stream", range(12))
def test_random_graph_structural_bounds(stream):
    path = simulate_walk(4, 64, seed=13, stream=stream)
    graph = build_range_graph(SegmentView(path, 0, 64))
    assert graph.edge_count <= 64
    assert graph.num_vertices <= 65
    assert bfs_reachable_count(graph) == graph.num_vertices


def test_adjacency_is_symmetric_sorted_loop_free():
    path = simulate_walk(5, 200, seed=3, stream=1)
    graph = build_range_graph(SegmentView(path, 0, 200))
    for u in range(graph.num_vertices):
        nbrs = graph.neighbors(u)
        assert np.all(np.diff(nbrs) > 0)
        assert u not in nbrs
        assert graph.degree(u) <= 2 * 5
        for v in nbrs:
            assert u in graph.neighbors(int(v))


def test_endpoints_resolve_to_segment_ends():
    path = simulate_walk(4, 50, seed=8, stream=0)
    graph = build_range_graph(SegmentView(path, 5, 37))
    start = LatticePoint(tuple(int(c) for c in path.coords[5]))
    end = LatticePoint(tuple(int(c) for c in path.coords[37]))
    assert graph.endpoints[0] == graph.vertex_index[start]
    assert graph.endpoints[1] == graph.vertex_index[end]


def test_graph_distance_straight_path():
    graph = build_range_graph(SegmentView(straight_path(9), 0, 9))
    assert graph_distance(graph) == 9


def test_graph_distance_cycle_shortcut():
    # Around the 4-cycle the walk takes three steps to reach e2, but the
    # closing edge {e2, 0} brings the graph distance down to 1.
    path = make_path(*CYCLE_WITH_TAIL)
    graph = build_range_graph(SegmentView(path, 0, 5))
    assert graph.num_vertices == 4
    assert graph.edge_count == 4
    assert graph_distance(graph) == 1
    assert graph_distance_dijkstra(graph) == 1


@pytest.mark.parametrize("d", [4, 5, 6, 7, 8])
def test_bfs_matches_dijkstra_on_random_paths(d):
    lengths = stream_generator(31, d).integers(2, 257, size=40)
    for i, n in enumerate(lengths):
        path = simulate_walk(d, int(n), seed=31, stream=d * 1000 + i)
        graph = build_range_graph(SegmentView(path, 0, int(n)))
        assert graph_distance(graph) == graph_distance_dijkstra(graph)


def test_cut_points_straight_path():
    path = straight_path(12)
    assert cut_point_count(SegmentView(path, 0, 12)) == 12
    assert cut_point_count_naive(SegmentView(path, 0, 12)) == 12


def test_cut_points_loop_agrees_with_oracle():
    # Hand counts on loops are error-prone; the naive oracle is the referee.
    path = make_path(
        (0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 0, 0)
    )
    view = SegmentView(path, 0, 4)
    assert cut_point_count(view) == cut_point_count_naive(view)


@pytest.mark.parametrize("d", [4, 5, 6, 7])
def test_cut_sweep_matches_naive_on_random_paths(d):
    lengths = stream_generator(47, d).integers(1, 257, size=60)
    for i, n in enumerate(lengths):
        path = simulate_walk(d, int(n), seed=47, stream=d * 1000 + i)
        view = SegmentView(path, 0, int(n))
        assert cut_point_count(view) == cut_point_count_naive(view)


def test_cut_sweep_matches_naive_on_sub_segments():
    path = simulate_walk(4, 200, seed=99, stream=5)
    bounds = stream_generator(99, 1).integers(0, 201, size=(30, 2))
    for a, b in bounds:
        a, b = int(min(a, b)), int(max(a, b))
        if a == b:
            continue
        view = SegmentView(path, a, b)
        assert cut_point_count(view) == cut_point_count_naive(view)


def test_resistance_straight_path_series_law():
    graph = build_range_graph(SegmentView(straight_path(8), 0, 8))
    assert effective_resistance(graph) == pytest.approx(8.0, abs=1e-9)
    assert effective_resistance_dense(graph) == pytest.approx(8.0, abs=1e-12)


def test_resistance_cycle_parallel_law():
    # Opposite corners of the 4-cycle: two 2-edge branches in parallel.
    path = make_path(
        (0, 0, 0, 0),
        (1, 0, 0, 0),
        (1, 1, 0, 0),
        (0, 1, 0, 0),
        (0, 0, 0, 0),
        (0, 1, 0, 0),
        (1, 1, 0, 0),
    )
    graph = build_range_graph(SegmentView(path, 0, 6))
    assert graph.edge_count == 4
    assert effective_resistance(graph) == pytest.approx(1.0, abs=1e-9)
    assert effective_resistance_dense(graph) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("offset", range(60))
def test_cg_matches_dense_on_random_graphs(offset):
    d = 4 + (offset % 5)
    n = int(stream_generator(53, offset).integers(8, 200))
    path = simulate_walk(d, n, seed=53, stream=7000 + offset)
    graph = build_range_graph(SegmentView(path, 0, n))
    assert graph.num_vertices <= 200
    r_iterative = effective_resistance(graph)
    r_dense = effective_resistance_dense(graph)
    if r_dense == 0.0:
        assert abs(r_iterative) <= 1e-10
    else:
        assert abs(r_iterative - r_dense) / r_dense <= 1e-8


@pytest.mark.parametrize("stream", [0, 1])
def test_cg_converges_on_graphs_needing_many_iterations(stream):
    # these graphs are nearly one-dimensional, so CG needs on the order of
    # |V| iterations; the default iteration cap must leave room for that
    path = simulate_walk(5, 2048, seed=0, stream=stream)
    graph = build_range_graph(SegmentView(path, 0, 2048))
    assert graph.num_vertices > 1500
    r_iterative = effective_resistance(graph)
    r_dense = effective_resistance_dense(graph)
    assert abs(r_iterative - r_dense) / r_dense <= 1e-8


def test_resistance_nonconvergence_raises_with_residual():
    path = simulate_walk(4, 400, seed=2, stream=0)
    graph = build_range_graph(SegmentView(path, 0, 400))
    config = ResistanceSolveConfig(rel_tolerance=1e-10, max_iterations=2)
    with pytest.raises(ResistanceSolveError) as info:
        effective_resistance(graph, config)
    assert info.value.residual > 0.0
    assert info.value.iterations == 2


def test_solve_config_validation():
    with pytest.raises(ValueError):
        ResistanceSolveConfig(rel_tolerance=0.0)
    with pytest.raises(ValueError):
        ResistanceSolveConfig(rel_tolerance=1e-3)
    with pytest.raises(ValueError):
        ResistanceSolveConfig(max_iterations=0)
    with pytest.raises(ValueError):
        ResistanceSolveConfig(preconditioner="ilu")
    # default cap grows linearly with graph size: these nearly
    # one-dimensional graphs can need on the order of |V| CG iterations
    assert ResistanceSolveConfig().iteration_cap(100) == 500
    assert ResistanceSolveConfig(max_iterations=7).iteration_cap(100) == 7


def test_resistance_between_validates_vertices():
    graph = build_range_graph(SegmentView(straight_path(3), 0, 3))
    with pytest.raises(ValueError):
        resistance_between(graph, 0, 99)
    assert resistance_between(graph, 2, 2) == 0.0
    assert resistance_between_dense(graph, 0, 2) == pytest.approx(2.0, abs=1e-12)


def test_dense_oracle_size_guard():
    path = simulate_walk(7, 2600, seed=1, stream=0)
    graph = build_range_graph(SegmentView(path, 0, 2600))
    if graph.num_vertices > 2000:
        with pytest.raises(ValueError):
            effective_resistance_dense(graph)


def test_coincident_endpoints_score_zero():
    # A closed loop has S_a = S_b: distance 0 and resistance 0 by convention.
    path = make_path(
        (0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 0, 0)
    )
    view = SegmentView(path, 0, 4)
    graph = build_range_graph(view)
    assert graph_distance(graph) == 0
    assert effective_resistance(graph) == 0.0
    assert observable(view, ObservableKind.GRAPH_DISTANCE) == 0.0
    assert observable(view, ObservableKind.RESISTANCE) == 0.0


def test_distance_zero_iff_resistance_zero_on_random_paths():
    for stream in range(25):
        n = int(stream_generator(61, stream).integers(2, 120))
        path = simulate_walk(4, n, seed=61, stream=stream)
        graph = build_range_graph(SegmentView(path, 0, n))
        distance = graph_distance(graph)
        resistance = effective_resistance(graph)
        assert (distance == 0) == (resistance <= 1e-12)
        assert (distance == 0) == (graph.endpoints[0] == graph.endpoints[1])


def test_observables_coincide_on_straight_path():
    view = SegmentView(straight_path(8), 0, 8)
    assert observable(view, ObservableKind.CUT_POINTS) == 8.0
    assert observable(view, ObservableKind.GRAPH_DISTANCE) == 8.0
    assert observable(view, ObservableKind.RESISTANCE) == pytest.approx(8.0, abs=1e-9)


def test_observable_empty_segment_is_zero():
    path = straight_path(5)
    for kind in ObservableKind:
        assert observable(SegmentView(path, 3, 3), kind) == 0.0


@pytest.mark.parametrize("d", [4, 5, 6, 7])
def test_observable_ordering_per_realization(d):
    # Cut points <= resistance <= graph distance, with float slack for the
    # iterative resistance value.
    for stream in range(40):
        path = simulate_walk(d, 256, seed=17, stream=stream)
        view = SegmentView(path, 0, 256)
        cuts = observable(view, ObservableKind.CUT_POINTS)
        resistance = observable(view, ObservableKind.RESISTANCE)
        distance = observable(view, ObservableKind.GRAPH_DISTANCE)
        assert cuts <= resistance + 1e-6
        assert resistance <= distance + 1e-6


def test_mean_distance_per_step_stabilizes():
    # E[X^1_n]/n settles at d=7: consecutive grid ratios within 5%.
    ratios = []
    for n in (512, 1024, 2048):
        total = 0.0
        samples = 300
        for stream in range(samples):
            path = simulate_walk(7, n, seed=29, stream=n * 100 + stream)
            total += observable(SegmentView(path, 0, n), ObservableKind.GRAPH_DISTANCE)
        ratios.append(total / samples / n)
    assert max(ratios) / min(ratios) <= 1.05


def test_rayleigh_monotonicity_on_nested_segments():
    # Extending the segment adds edges and vertices, which can only lower
    # the resistance between the original endpoint pair.
    config = ResistanceSolveConfig()
    for stream in range(15):
        path = simulate_walk(4, 240, seed=43, stream=stream)
        inner = build_range_graph(SegmentView(path, 80, 160))
        outer = build_range_graph(SegmentView(path, 0, 240))
        x = LatticePoint(tuple(int(c) for c in path.coords[80]))
        y = LatticePoint(tuple(int(c) for c in path.coords[160]))
        r_inner = resistance_between(inner, inner.vertex_index[x], inner.vertex_index[y], config)
        r_outer = resistance_between(outer, outer.vertex_index[x], outer.vertex_index[y], config)
        assert r_outer <= r_inner + 1e-8


def test_edge_list_text_format():
    graph = build_range_graph(SegmentView(straight_path(2), 0, 2))
    text = edge_list_text(graph)
    lines = text.strip().splitlines()
    assert len(lines) == graph.edge_count
    for line in lines:
        u, v = map(int, line.split())
        assert u < v
