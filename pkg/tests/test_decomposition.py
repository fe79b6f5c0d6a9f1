"""Tests for cross terms and the dyadic decomposition identity."""

import numpy as np
import pytest

from rwrange_lab.decomposition import (
    CROSS_TERM_CSV_COLUMNS,
    CrossTerm,
    DyadicDecomposition,
    cross_term,
    cross_term_tail_samples,
    decomposition_rows,
    dyadic_decompose,
    tail_sample_rows,
    write_cross_term_csv,
)
from rwrange_lab.observables import ObservableKind, observable
from rwrange_lab.tables import read_csv
from rwrange_lab.walks import SegmentView, WalkPath, simulate_walk

ALL_KINDS = (
    ObservableKind.GRAPH_DISTANCE,
    ObservableKind.CUT_POINTS,
    ObservableKind.RESISTANCE,
)


def straight_path(n, d=4):
    coords = np.zeros((n + 1, d), dtype=np.int64)
    coords[:, 0] = np.arange(n + 1)
    return WalkPath(coords)


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("split,end", [(1, 16), (8, 16), (5, 11)])
def test_cross_term_zero_on_straight_path(kind, split, end):
    term = cross_term(straight_path(16), kind, split, end)
    assert term.value == pytest.approx(0.0, abs=1e-8)
    assert term.n_left == split
    assert term.n_right == end - split


def test_cross_term_agrees_with_direct_observables():
    coords = np.array(
        [
            [0, 0, 0, 0],
            [1, 0, 0, 0],
            [1, 1, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 0],
            [0, -1, 0, 0],
        ],
        dtype=np.int64,
    )
    path = WalkPath(coords)
    term = cross_term(path, ObservableKind.GRAPH_DISTANCE, 3, 5)
    direct = (
        observable(SegmentView(path, 0, 3), ObservableKind.GRAPH_DISTANCE)
        + observable(SegmentView(path, 3, 5), ObservableKind.GRAPH_DISTANCE)
        - observable(SegmentView(path, 0, 5), ObservableKind.GRAPH_DISTANCE)
    )
    assert term.value == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("split,end", [(0, 8), (8, 8), (9, 8), (4, 99)])
def test_cross_term_rejects_degenerate_split(split, end):
    with pytest.raises(ValueError):
        cross_term(straight_path(16), ObservableKind.CUT_POINTS, split, end)


def test_cross_term_type_rejects_negative_value():
    with pytest.raises(ValueError):
        CrossTerm(kind=ObservableKind.CUT_POINTS, n_left=4, n_right=4, value=-0.5)
    with pytest.raises(ValueError):
        CrossTerm(kind=ObservableKind.CUT_POINTS, n_left=0, n_right=4, value=1.0)


def test_equal_split_sample_statistics():
    # 2000 draws of the equal-split cross term at half-length 256, d=7: the
    # mean is finite and nonnegative and the event {E >= 1} has a
    # nondegenerate frequency.
    values = cross_term_tail_samples(7, 256, ObservableKind.CUT_POINTS, 2000, seed=0)
    assert values.shape == (2000,)
    assert np.all(values >= 0)
    assert np.isfinite(values.mean())
    frac = float(np.mean(values >= 1))
    assert 0.0 < frac < 1.0


def test_deep_tail_has_positive_mass_at_d5():
    values = cross_term_tail_samples(5, 1024, ObservableKind.CUT_POINTS, 10_000, seed=0)
    assert float(np.mean(values >= 256)) > 0.0


def test_tail_samples_are_worker_count_invariant():
    serial = cross_term_tail_samples(6, 64, ObservableKind.CUT_POINTS, 700, seed=3)
    pooled = cross_term_tail_samples(
        6, 64, ObservableKind.CUT_POINTS, 700, seed=3, workers=2
    )
    assert np.array_equal(serial, pooled)


def test_tail_samples_validate_count():
    with pytest.raises(ValueError):
        cross_term_tail_samples(6, 64, ObservableKind.CUT_POINTS, 0, seed=3)


@pytest.mark.parametrize("levels", [1, 2, 4])
@pytest.mark.parametrize("kind", ALL_KINDS)
def test_dyadic_straight_path_all_errors_vanish(levels, kind):
    dec = dyadic_decompose(straight_path(64), kind, levels)
    assert len(dec.leaves) == 2**levels
    assert sum(len(level) for level in dec.errors) == 2**levels - 1
    assert all(v == pytest.approx(0.0, abs=1e-8) for level in dec.errors for v in level)
    assert sum(dec.leaves) == pytest.approx(64.0, abs=1e-8)


@pytest.mark.parametrize("kind", [ObservableKind.GRAPH_DISTANCE, ObservableKind.CUT_POINTS])
@pytest.mark.parametrize("d,levels,seed", [(4, 1, 0), (5, 3, 1), (7, 5, 2)])
def test_dyadic_identity_exact_for_integer_observables(kind, d, levels, seed):
    path = simulate_walk(d, 512, seed=seed, stream=31)
    dec = dyadic_decompose(path, kind, levels)
    assert dec.identity_discrepancy() == 0.0
    assert dec.total == observable(SegmentView(path, 0, 512), kind)
    assert float(dec.total).is_integer()
    for level in dec.errors:
        for value in level:
            assert value >= 0.0 and float(value).is_integer()


@pytest.mark.parametrize("d,seed", [(4, 3), (6, 4), (8, 5)])
def test_dyadic_identity_bounded_drift_for_resistance(d, seed):
    path = simulate_walk(d, 512, seed=seed, stream=77)
    dec = dyadic_decompose(path, ObservableKind.RESISTANCE, 4)
    assert abs(dec.identity_discrepancy()) <= dec.identity_tolerance()
    for level in dec.errors:
        for value in level:
            assert value >= -1e-6


def test_dyadic_error_levels_match_split_structure():
    # errors[k][l] must equal the cross term of the level-(k+1) halves of
    # the level-k interval (k < levels).
    path = simulate_walk(5, 256, seed=9, stream=2)
    dec = dyadic_decompose(path, ObservableKind.CUT_POINTS, 3)
    n = 256
    for k in range(3):
        width = n // 2**k
        for l in range(2**k):
            lo = l * width
            spliced = (
                observable(SegmentView(path, lo, lo + width // 2), dec.kind)
                + observable(SegmentView(path, lo + width // 2, lo + width), dec.kind)
                - observable(SegmentView(path, lo, lo + width), dec.kind)
            )
            assert dec.errors[k][l] == pytest.approx(spliced, abs=1e-12)


def test_dyadic_rejects_bad_shapes():
    path = simulate_walk(4, 100, seed=0)
    with pytest.raises(ValueError):
        dyadic_decompose(path, ObservableKind.CUT_POINTS, 3)  # 100 not divisible by 8
    with pytest.raises(ValueError):
        dyadic_decompose(path, ObservableKind.CUT_POINTS, 0)


def test_decomposition_type_validates_identity():
    with pytest.raises(ValueError):
        DyadicDecomposition(
            kind=ObservableKind.CUT_POINTS,
            n=8,
            levels=1,
            leaves=(3.0, 3.0),
            errors=((1.0,),),
            total=9.0,  # 3 + 3 - 1 = 5 != 9
        )


def test_same_level_disjoint_terms_are_uncorrelated():
    # Cross terms at one level with disjoint parent intervals come from
    # disjoint walk increments; their covariance sits inside a 3 sigma
    # Monte Carlo band around zero.
    first, last = [], []
    for stream in range(600):
        path = simulate_walk(7, 512, seed=103, stream=stream)
        dec = dyadic_decompose(path, ObservableKind.CUT_POINTS, 3)
        first.append(dec.errors[2][0])
        last.append(dec.errors[2][3])
    a = np.array(first) - np.mean(first)
    b = np.array(last) - np.mean(last)
    products = a * b
    covariance = float(np.mean(products))
    std_error = float(np.std(products, ddof=1) / np.sqrt(len(products)))
    assert abs(covariance) <= 3.0 * std_error


def test_per_level_error_sums_grow_with_length():
    # Second moments of per-level cross-term sums at d=6 stay inside a broad
    # linear-in-n envelope; the estimator is heavy-tailed, so this is a
    # coarse order-of-growth check (the tail and variance suites carry the
    # sharp d=6 statements).
    for n in (2048, 4096):
        level_sums = {k: [] for k in range(4)}
        for stream in range(500):
            path = simulate_walk(6, n, seed=101, stream=n * 10 + stream)
            dec = dyadic_decompose(path, ObservableKind.CUT_POINTS, 4)
            for k in range(4):
                total = sum(dec.errors[k])
                assert total >= 0.0
                level_sums[k].append(total)
        for k in range(4):
            second_moment = float(np.mean(np.square(level_sums[k])))
            assert 0.003 * n <= second_moment <= 3.0 * n


def test_csv_rows_and_round_trip(tmp_path):
    values = cross_term_tail_samples(4, 32, ObservableKind.CUT_POINTS, 5, seed=1)
    rows = tail_sample_rows(4, 32, ObservableKind.CUT_POINTS, values, seed=1)
    path = simulate_walk(5, 64, seed=2, stream=8)
    dec = dyadic_decompose(path, ObservableKind.CUT_POINTS, 2)
    rows += decomposition_rows(dec, 5, seed=2, stream=8)
    target = write_cross_term_csv(tmp_path / "cross.csv", rows)
    columns, parsed = read_csv(target)
    assert columns == list(CROSS_TERM_CSV_COLUMNS)
    assert len(parsed) == len(rows)
    assert [r[0] for r in parsed[:5]] == ["cut"] * 5
    tail_row = parsed[0]
    assert tail_row[1:5] == ["4", "32", "0", "0"]
    assert float(tail_row[5]) == values[0]
