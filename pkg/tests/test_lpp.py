import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornergrowth.lpp import (
    E1,
    E2,
    UpRightPath,
    brute_force_lpp,
    check_crossing,
    check_monotone_increments,
    geodesic,
    lpp,
    lpp_table,
    profile_to_column,
    reversed_lpp,
    reversed_profile_to_column,
    superadditivity_gap,
)
from cornergrowth.weights import ArrayField, Seed, WeightField

SMALL = ArrayField(np.array([[1.0, 3.0], [2.0, 4.0]]))  # w(0,0)=1, w(1,0)=2, w(0,1)=3, w(1,1)=4


def random_field(seed, shape, origin=(0, 0)):
    return ArrayField(np.random.default_rng(seed).exponential(size=shape), origin=origin)


def test_small_example():
    assert lpp(SMALL, (0, 0), (1, 1)) == 8.0
    assert brute_force_lpp(SMALL, (0, 0), (1, 1)) == 8.0
    assert reversed_lpp(SMALL, (1, 1), (0, 0)) == 8.0
    assert [tuple(p) for p in geodesic(SMALL, (0, 0), (1, 1)).points()] == [(0, 0), (0, 1), (1, 1)]


def test_single_vertex_and_row():
    f = WeightField(Seed(1))
    assert lpp(f, (3, 4), (3, 4)) == f.weight_at((3, 4))
    assert reversed_lpp(f, (3, 4), (3, 4)) == f.weight_at((3, 4))
    row = sum(f.weight_at((i, 2)) for i in range(-1, 5))
    assert lpp(f, (-1, 2), (4, 2)) == pytest.approx(row, rel=1e-12)
    assert brute_force_lpp(f, (-1, 2), (4, 2)) == pytest.approx(row, rel=1e-12)


def test_constant_field_tie_rule():
    f = ArrayField(np.ones((3, 3)))
    path = geodesic(f, (0, 0), (2, 2))
    assert path.steps == (E1, E1, E2, E2)


def test_unordered_points_rejected():
    with pytest.raises(ValueError):
        lpp(SMALL, (1, 0), (0, 1))
    with pytest.raises(ValueError):
        lpp(SMALL, (0, 0), (0.5, 1))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 4), st.integers(0, 4))
def test_brute_force_agrees_with_dp(seed, a, b):
    f = random_field(seed, (a + 1, b + 1), origin=(-2, 3))
    y = (-2 + a, 3 + b)
    assert lpp(f, (-2, 3), y) == pytest.approx(brute_force_lpp(f, (-2, 3), y), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 9), st.integers(0, 9))
def test_geodesic_weight_and_reversed_value(seed, a, b):
    f = WeightField(Seed(seed))
    u, y = (-4, 1), (-4 + a, 1 + b)
    g = lpp(f, u, y)
    path = geodesic(f, u, y)
    assert path.start == u and path.end == y and len(path) == a + b
    assert path.weight(f) == pytest.approx(g, rel=1e-12)
    assert reversed_lpp(f, y, u) == pytest.approx(g, rel=1e-12)


def test_path_geometry():
    p = UpRightPath((1, 1), (E1, E2, E2, E1))
    pts = p.points()
    assert np.all(np.abs(np.diff(pts, axis=0)).sum(axis=1) == 1)
    assert p.end == (3, 3)
    assert list(p.column(2)) == [1, 2, 3]
    assert (2, 2) in p and (1, 2) not in p
    with pytest.raises(ValueError):
        UpRightPath((0, 0), (3,))


def test_table_matches_pointwise_values():
    f = WeightField(Seed(9))
    t = lpp_table(f, (0, 0), (4, 5))
    assert t[3, 2] == pytest.approx(lpp(f, (0, 0), (3, 2)), rel=1e-12)


def test_profile_matches_pointwise_and_increases():
    f = WeightField(Seed(4))
    prof = profile_to_column(f, (-3, -5), 2, (-2, 6))
    for n in (-2, 0, 6):
        assert prof.at(n) == pytest.approx(lpp(f, (-3, -5), (2, n)), rel=1e-12)
    assert np.all(np.diff(prof.values) > 0)
    row = profile_to_column(f, (-3, -5), 1, (-1, 4), axis="row")
    assert row.at(4) == pytest.approx(lpp(f, (-3, -5), (4, 1)), rel=1e-12)
    rev = reversed_profile_to_column(f, (4, 7), 1, (-2, 3))
    assert rev.at(0) == pytest.approx(lpp(f, (1, 0), (4, 7)), rel=1e-12)
    assert np.all(np.diff(rev.values) < 0)
    with pytest.raises(IndexError):
        prof.at(7)


@pytest.mark.parametrize("seed", range(100))
def test_column_split_recovers_passage_time(seed):
    rng = np.random.default_rng(seed)
    u = (-int(rng.integers(0, 6)), -int(rng.integers(0, 6)))
    v = (int(rng.integers(1, 6)), int(rng.integers(0, 6)))
    f = WeightField(Seed(seed))
    a = profile_to_column(f, u, 0, (u[1], v[1])).values
    b = reversed_profile_to_column(f, v, 1, (u[1], v[1])).values
    assert np.max(a + b) == pytest.approx(lpp(f, u, v), rel=1e-12)


def test_crossing_examples():
    f = random_field(3, (8, 8))
    assert check_crossing(f, (0, 0), (6, 6)) == (True, True, True, True)
    assert check_crossing(f, (0, 0), (1, 1)) == (True, True, True, True)
    with pytest.raises(ValueError):
        check_crossing(f, (0, 0), (0, 3))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 6), st.integers(1, 6))
def test_crossing_property(seed, a, b):
    f = random_field(seed, (a + 2, b + 2), origin=(2, -1))
    assert all(check_crossing(f, (2, -1), (2 + a, -1 + b)))


def test_monotone_increments_examples():
    w = np.random.default_rng(0).exponential(size=(6, 6))
    f = ArrayField(w)
    assert check_monotone_increments(f, f, (0, 0), (5, 5))
    raised = w.copy()
    raised[2, 0] += 1.0
    assert check_monotone_increments(ArrayField(raised), f, (0, 0), (5, 5))
    g, gr = lpp_table(f, (0, 0), (5, 5)), lpp_table(ArrayField(raised), (0, 0), (5, 5))
    assert np.all(np.diff(gr, axis=0) >= np.diff(g, axis=0) - 1e-12)
    bulk = w.copy()
    bulk[3, 3] += 1.0
    with pytest.raises(ValueError):
        check_monotone_increments(ArrayField(bulk), f, (0, 0), (5, 5))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 7), st.integers(1, 7))
def test_monotone_increments_property(seed, a, b):
    rng = np.random.default_rng(seed)
    w = rng.exponential(size=(a + 1, b + 1))
    wt = w.copy()
    wt[1:, 0] *= rng.uniform(size=a)
    wt[0, 1:] += rng.exponential(size=b)
    assert check_monotone_increments(ArrayField(w), ArrayField(wt), (0, 0), (a, b))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 5), st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
def test_superadditivity(seed, a, b, c, d):
    f = WeightField(Seed(seed))
    gap = superadditivity_gap(f, (0, 0), (a, b), (a + c, b + d))
    assert gap >= -1e-12 * max(1.0, lpp(f, (0, 0), (a + c, b + d)))


def test_brute_force_refuses_huge_boxes():
    with pytest.raises(ValueError):
        brute_force_lpp(WeightField(Seed(0)), (0, 0), (10, 10))
    assert math.comb(20, 10) > 10_000
