import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornergrowth.lpp import lpp
from cornergrowth.stationary import (
    FORWARD,
    REVERSED,
    StationaryBoundary,
    a_factor,
    boundary_point_to_rho,
    bulk_exit_point,
    characteristic_point,
    exit_point,
    increments,
    induced_boundary_process,
    induced_exit_point,
    reversed_stationary,
    rho_to_xi,
    stationary_exit_by_backtracking,
    stationary_geodesic_first_step,
    stationary_lpp,
    stationary_table,
    stationary_with_exit,
    xi_to_rho,
)
from cornergrowth.weights import Seed, WeightField, derive_seed


def forward(seed, rho=0.5, m=8, n=8, base=(0, 0)):
    return StationaryBoundary.independent(base, rho, m, n, Seed(seed))


def test_characteristic_direction():
    assert rho_to_xi(0.5) == pytest.approx((0.5, 0.5))
    assert rho_to_xi(1 / 3)[0] == pytest.approx(0.8, abs=1e-12)
    rng = np.random.default_rng(0)
    for rho in rng.uniform(0.01, 0.99, size=100):
        assert xi_to_rho(rho_to_xi(rho)) == pytest.approx(rho, abs=1e-12)
    with pytest.raises(ValueError):
        rho_to_xi(1.0)


def test_a_factor():
    assert a_factor(0.5) == pytest.approx(2.0)
    assert a_factor(1e-9) == pytest.approx(1.0, abs=1e-6)
    for rho in np.random.default_rng(1).uniform(0.01, 0.99, size=100):
        assert 1.0 <= a_factor(rho) <= 2.0


def test_boundary_point_density():
    assert boundary_point_to_rho((-64, -64)) == pytest.approx(0.5)
    assert boundary_point_to_rho((-4, -1)) == pytest.approx(1 / 3)
    rho = boundary_point_to_rho((-4, -1))
    xi = rho_to_xi(rho)
    assert xi[0] / xi[1] == pytest.approx(4.0)
    with pytest.raises(ValueError):
        boundary_point_to_rho((3, -1))


def test_characteristic_point_lies_on_the_ray():
    m, n = characteristic_point(1 / 3, 100)
    assert (m, n) == (80, 20)


def test_boundary_sums_and_one_step():
    f = WeightField(Seed(3))
    b = forward(3)
    assert stationary_lpp(f, b, (3, 0)) == pytest.approx(b.I[:3].sum(), rel=1e-12)
    assert stationary_lpp(f, b, (0, 2)) == pytest.approx(b.J[:2].sum(), rel=1e-12)
    one = max(b.I[0], b.J[0]) + f.weight_at((1, 1))
    assert stationary_lpp(f, b, (1, 1)) == pytest.approx(one, rel=1e-12)
    assert exit_point(f, b, (1, 1)) == (1 if b.I[0] > b.J[0] else -1)


def test_exit_symmetry_at_the_first_cell():
    pos = [exit_point(WeightField(Seed(s)), forward(s, m=1, n=1), (1, 1)) >= 1 for s in range(10_000)]
    assert np.mean(pos) == pytest.approx(0.5, abs=0.016)


@pytest.mark.parametrize("seed", range(50))
def test_exit_point_matches_backtracking(seed):
    f = WeightField(Seed(seed))
    b = forward(seed, rho=0.3 + 0.008 * seed, m=9, n=7, base=(-2, 1))
    x = (5, 6)
    z = exit_point(f, b, x)
    assert z == stationary_exit_by_backtracking(f, b, x)
    assert (z > 0) == (stationary_geodesic_first_step(f, b, x) == 1)
    assert z != 0


def test_exit_needs_interior_target():
    with pytest.raises(ValueError):
        exit_point(WeightField(Seed(0)), forward(0), (3, 0))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 7), st.integers(1, 7), st.floats(0.05, 0.95))
def test_burke_min_identity(seed, m, n, rho):
    f = WeightField(Seed(seed))
    b = forward(seed, rho=rho, m=m, n=n)
    g = stationary_table(f, b, (m, n))
    I = g[1:, 1:] - g[:-1, 1:]
    J = g[1:, 1:] - g[1:, :-1]
    assert np.allclose(np.minimum(I, J), f.block((1, 1), (m, n)), rtol=0, atol=1e-12 * g[-1, -1])


@pytest.mark.parametrize("seed", range(100))
def test_reversed_equals_forward_under_reflection(seed):
    f = WeightField(Seed(seed))
    top = (4, 3)
    rb = StationaryBoundary.independent(top, 0.4, 6, 7, Seed(seed), orientation=REVERSED)
    fb = StationaryBoundary(tuple(-c for c in top), 0.4, rb.I, rb.J)
    x = (-1, -2)
    g, z = reversed_stationary(f, rb, x)
    g2, z2 = stationary_with_exit(f.reflected(), fb, (1, 2))
    assert g == pytest.approx(g2, rel=1e-12)
    assert z == z2


def test_reversed_boundary_sum():
    f = WeightField(Seed(1))
    rb = StationaryBoundary.independent((0, 0), 0.5, 3, 3, Seed(1), orientation=REVERSED)
    assert reversed_stationary(f, rb, (0, -2)) == (pytest.approx(rb.J[0] + rb.J[1], rel=1e-12), 0)
    with pytest.raises(ValueError):
        reversed_stationary(f, forward(1), (0, -2))


def test_increment_marginals_and_independence():
    I_, J_, cross = [], [], []
    path = [(0, 3), (1, 3), (1, 2), (2, 2)]
    for s in range(10_000):
        f = WeightField(Seed(derive_seed(5, s)))
        b = StationaryBoundary.independent((0, 0), 0.5, 4, 4, Seed(derive_seed(6, s)))
        I, J = increments(f, b, path)
        I_.append(I[0])
        J_.append(J[0])
        cross.append(I[1])
    I_, J_, cross = map(np.asarray, (I_, J_, cross))
    assert I_.mean() == pytest.approx(2.0, abs=0.06)
    assert J_.mean() == pytest.approx(2.0, abs=0.06)
    assert abs(np.corrcoef(J_, cross)[0, 1]) < 4 / np.sqrt(len(J_))


def test_increments_reject_bad_paths():
    with pytest.raises(ValueError):
        increments(WeightField(Seed(0)), forward(0), [(0, 0), (1, 1)])


def test_scaled_boundary_dominates_bulk():
    f = WeightField(Seed(8))
    b = StationaryBoundary.scaled_from_bulk(f, (0, 0), 0.3, 6, 6)
    assert np.all(b.I >= f.block((1, 0), (6, 0))[:, 0])
    assert np.all(b.J >= f.block((0, 1), (0, 6))[0, :])
    g = stationary_table(f, b, (6, 6))
    bulk = np.array([[lpp(f, (0, 0), (i, j)) for j in range(7)] for i in range(7)])
    assert np.all(g >= bulk - f.weight_at((0, 0)) - 1e-12)


def test_coupled_pair_ordering():
    f = WeightField(Seed(2))
    b_rho, b_lam = StationaryBoundary.coupled_pair(f, (0, 0), 0.6, 0.4, 5, 5, Seed(9))
    assert b_rho.mode == "queue-coupled-pair" and b_lam.partner_rho == 0.6
    g_r = stationary_table(f, b_rho, (5, 5))
    g_l = stationary_table(f, b_lam, (5, 5))
    # the lower density has larger vertical and smaller horizontal increments
    assert np.all(np.diff(g_l, axis=1) >= np.diff(g_r, axis=1) - 1e-12)
    assert np.all(np.diff(g_l, axis=0) <= np.diff(g_r, axis=0) + 1e-12)
    with pytest.raises(ValueError):
        StationaryBoundary.coupled_pair(f, (0, 0), 0.4, 0.6, 2, 2, Seed(0))


def test_coupled_pair_marginals():
    Jr, Jl, Ir, Il = [], [], [], []
    for s in range(2000):
        f = WeightField(Seed(derive_seed(1, s)))
        b_r, b_l = StationaryBoundary.coupled_pair(f, (0, 0), 0.6, 0.3, 2, 2, Seed(derive_seed(2, s)))
        Jr.append(b_r.J[0])
        Jl.append(b_l.J[0])
        Ir.append(b_r.I[0])
        Il.append(b_l.I[0])
    se = lambda x: np.std(x) / np.sqrt(len(x))  # noqa: E731
    for x, mean in ((Jr, 1 / 0.6), (Jl, 1 / 0.3), (Ir, 1 / 0.4), (Il, 1 / 0.7)):
        assert abs(np.mean(x) - mean) < 4 * se(x)


def test_induced_process_examples():
    f = WeightField(Seed(4))
    assert induced_boundary_process(f, (1, 1), (1, 1), (5, 4)) == pytest.approx(
        lpp(f, (1, 1), (5, 4)) - f.weight_at((1, 1)), rel=1e-12
    )
    assert bulk_exit_point(f, (0, 0), (8, 9)) == 3
    assert induced_exit_point(f, (0, 0), (2, 0), (8, 9)) == 1


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 6), st.integers(0, 6), st.integers(0, 6), st.integers(0, 6))
def test_decomposition_identity(seed, a, b, c, d):
    f = WeightField(Seed(seed))
    y = (a + c, b + d)
    split = lpp(f, (0, 0), (a, b)) + induced_boundary_process(f, (0, 0), (a, b), y)
    assert split == pytest.approx(lpp(f, (0, 0), y), abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 9), st.integers(1, 9), st.data())
def test_shift_property(seed, p1, p2, data):
    k = data.draw(st.integers(1, p1 - 1))
    f = WeightField(Seed(seed))
    z = bulk_exit_point(f, (0, 0), (p1, p2))
    zk = induced_exit_point(f, (0, 0), (k, 0), (p1, p2))
    for m in range(1, p1 - k + 1):
        assert (z == k + m) == (zk == m)


def test_orientation_validation():
    with pytest.raises(ValueError):
        StationaryBoundary((0, 0), 0.5, [1.0], [1.0], orientation="sideways")
    with pytest.raises(ValueError):
        StationaryBoundary((0, 0), 0.5, [0.0], [1.0])
    assert FORWARD != REVERSED


def test_increments_at_shifted_vertices_match_the_boundary():
    rho = 0.4
    far_I, far_J, near_I, near_J = [], [], [], []
    for s in range(10_000):
        f = WeightField(Seed(derive_seed(12, s)))
        b = StationaryBoundary.independent((0, 0), rho, 5, 5, Seed(derive_seed(13, s)))
        g = stationary_table(f, b, (5, 5))
        near_I.append(g[1, 0] - g[0, 0])
        near_J.append(g[0, 1] - g[0, 0])
        far_I.append(g[4, 5] - g[3, 5])
        far_J.append(g[5, 4] - g[5, 3])
    for far, near in ((far_I, near_I), (far_J, near_J)):
        far, near = np.asarray(far), np.asarray(near)
        for k in (1, 2):
            a, b = far**k, near**k
            se = np.sqrt(a.var() / a.size + b.var() / b.size)
            assert abs(a.mean() - b.mean()) < 4 * se


def test_coupled_pair_increments_below_and_above_are_uncorrelated():
    below, above = [], []
    for s in range(2000):
        f = WeightField(Seed(derive_seed(14, s)))
        b_r, b_l = StationaryBoundary.coupled_pair(f, (0, 0), 0.6, 0.3, 2, 3, Seed(derive_seed(15, s)))
        g_r = stationary_table(f, b_r, (2, 3))
        g_l = stationary_table(f, b_l, (2, 3))
        below.append(g_l[2, 2] - g_l[2, 1])
        above.append(g_r[2, 3] - g_r[2, 2])
    r = np.corrcoef(below, above)[0, 1]
    assert abs(r) < 4 / np.sqrt(len(below))
