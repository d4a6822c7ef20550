"""Geodesic events around the origin of the box [-N, N]^2.

The south-west arc consists of the left and bottom sides of the box cut off
at distance eps*N from the axes; the north-east arc is its mirror image.
The central question is whether any geodesic between the two arcs passes
through the origin.  All decisions compare passage times at a relative
tolerance ``RTOL``; with continuous weights exact ties have probability
zero, and every detector here is cross-checked against path backtracking
in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _kernels as K
from ._util import ceil_tol, floor_tol, power
from .lpp import (
    as_point,
    geodesic,
    profile_to_column,
    require_ordered,
    reversed_profile_to_column,
)
from .stationary import StationaryBoundary, boundary_point_to_rho

RTOL = 1e-9


# ---------------------------------------------------------------- arcs


@dataclass(frozen=True, eq=False)
class BoundaryArcs:
    N: int
    epsilon: float
    sw: np.ndarray
    ne: np.ndarray

    @property
    def cut(self) -> int:
        """Smallest distance from the axes allowed on the arcs, ceil(eps*N)."""
        return ceil_tol(self.epsilon * self.N)


def boundary_arcs(N: int, epsilon: float) -> BoundaryArcs:
    """South-west and north-east boundary arcs of [-N, N]^2.

    The south-west points run down the left side from ``(-N, -c)`` to the
    corner and then right along the bottom to ``(-c, -N)``, where
    ``c = ceil(eps*N)``; the north-east points are their negatives.
    """
    N = int(N)
    epsilon = float(epsilon)
    if N < 1 or not 0 < epsilon < 1:
        raise ValueError(f"need N >= 1 and 0 < epsilon < 1, got N={N}, epsilon={epsilon}")
    if floor_tol(epsilon * N) < 1:
        raise ValueError(f"epsilon*N = {epsilon * N} < 1 leaves the arcs empty")
    c = ceil_tol(epsilon * N)
    left = [(-N, h) for h in range(-c, -N - 1, -1)]
    bottom = [(k, -N) for k in range(-N + 1, -c + 1)]
    sw = np.array(left + bottom, dtype=np.int64)
    return BoundaryArcs(N, epsilon, sw, -sw)


def arc_point_rho(p) -> float:
    """Density attached to a boundary point through its direction from the origin."""
    p1, p2 = as_point(p)
    return boundary_point_to_rho((-abs(p1), -abs(p2)))


# ---------------------------------------------------------------- origin crossing


def origin_on_geodesic(field, u, v) -> bool:
    """Whether the geodesic from u to v passes through the origin (u <= 0 <= v)."""
    u, v = as_point(u), as_point(v)
    require_ordered(u, (0, 0), "u <= 0")
    require_ordered((0, 0), v, "0 <= v")
    w = field.block(u, v)
    g = K.lpp_table(w)
    o = (-u[0], -u[1])
    g_0v = K.lpp_value(w[o[0] :, o[1] :])
    total = g[-1, -1]
    return bool(total - (g[o] + g_0v - w[o]) <= RTOL * abs(total))


def origin_on_geodesic_by_path(field, u, v) -> bool:
    return (0, 0) in geodesic(field, u, v)


@dataclass(frozen=True, eq=False)
class CrossingWalk:
    """Two-sided walk comparing vertical increments left and right of the e2-axis.

    ``heights`` runs over the walk range; ``S[k]`` is the partial sum at
    ``heights[k]`` with ``S = 0`` at height 0, and ``steps[k]`` is the step
    into ``heights[k + 1]``.
    """

    u: tuple[int, int]
    v: tuple[int, int]
    heights: np.ndarray
    steps: np.ndarray
    S: np.ndarray
    anchor: float

    def at(self, n: int) -> float:
        return float(self.S[int(n) - int(self.heights[0])])

    def argmax_height(self) -> int:
        """Lowest height at which the walk attains its maximum."""
        return int(self.heights[int(np.argmax(self.S))])

    def passage_time(self) -> float:
        """G(u, v) recovered as the anchor plus the walk maximum."""
        return float(self.anchor + np.max(self.S))


def crossing_walk(field, u, v, n_range=None) -> CrossingWalk:
    """Walk with steps J^u_j - J^v_j built from the column-0 and column-1 profiles.

    ``J^u_j = G(u, (0, j)) - G(u, (0, j-1))`` and
    ``J^v_j = G((1, j-1), v) - G((1, j), v)``.  The default range is the full
    admissible one, ``[u2, v2]``, over which the walk's argmax is the height
    where the geodesic from u to v steps from column 0 to column 1.
    """
    u, v = as_point(u), as_point(v)
    if not (u[0] <= 0 < v[0]):
        raise ValueError(f"need u1 <= 0 < v1, got u={u}, v={v}")
    if not (u[1] <= 0 <= v[1]):
        raise ValueError(f"need u2 <= 0 <= v2 so the walk can be anchored at 0, got u={u}, v={v}")
    lo, hi = (u[1], v[1]) if n_range is None else (int(n_range[0]), int(n_range[1]))
    if lo < u[1] or hi > v[1] or not lo <= 0 <= hi:
        raise ValueError(f"range [{lo}, {hi}] must contain 0 and lie inside [{u[1]}, {v[1]}]")
    a = profile_to_column(field, u, 0, (lo, hi)).values
    b = reversed_profile_to_column(field, v, 1, (lo, hi)).values
    k0 = -lo
    S = (a - a[k0]) + (b - b[k0])
    steps = np.diff(a) + np.diff(b)
    return CrossingWalk(u, v, np.arange(lo, hi + 1), steps, S, float(a[k0] + b[k0]))


def crossing_height_by_path(field, u, v) -> int:
    """Height of the geodesic's step from column 0 to column 1 (backtracking oracle)."""
    pts = geodesic(field, u, v).points()
    k = int(np.flatnonzero(pts[:, 0] == 0)[-1])
    return int(pts[k, 1])


# ---------------------------------------------------------------- W detection


@njit(cache=True)
def _sw_profiles(w, N, sw):
    L = 2 * N + 1
    out = np.full((sw.shape[0], L), -np.inf)
    for k in range(sw.shape[0]):
        u1, u2 = sw[k, 0], sw[k, 1]
        col = K.lpp_last_column(w[u1 + N : N + 1, u2 + N : L])
        out[k, u2 + N : L] = col
    return out


@njit(cache=True)
def _ne_profiles(w, N, ne):
    L = 2 * N + 1
    out = np.full((ne.shape[0], L), -np.inf)
    for k in range(ne.shape[0]):
        v1, v2 = ne[k, 0], ne[k, 1]
        col = K.reversed_first_column(w[N + 1 : v1 + N + 1, 0 : v2 + N + 1])
        out[k, 0 : v2 + N + 1] = col
    return out


@njit(cache=True)
def _w_scan(w, N, A, B, sw, ne, rtol):
    w0 = w[N, N]
    cum = np.empty(N + 1)
    acc = 0.0
    for n in range(N + 1):
        acc += w[N, N + n]
        cum[n] = acc
    g0v = np.empty(ne.shape[0])
    for k in range(ne.shape[0]):
        best = -np.inf
        for n in range(ne[k, 1] + 1):
            val = cum[n] + B[k, n + N]
            if val > best:
                best = val
        g0v[k] = best
    for iu in range(sw.shape[0]):
        gu0 = A[iu, N]
        lo = sw[iu, 1] + N
        for iv in range(ne.shape[0]):
            hi = ne[iv, 1] + N
            best = -np.inf
            for n in range(lo, hi + 1):
                val = A[iu, n] + B[iv, n]
                if val > best:
                    best = val
            via = gu0 + g0v[iv] - w0
            if best - via <= rtol * abs(best):
                return iu, iv
    return -1, -1


@dataclass(frozen=True)
class WResult:
    occurred: bool
    witness_u: tuple[int, int] | None = None
    witness_v: tuple[int, int] | None = None


def detect_W(field, N: int, epsilon: float, arcs: BoundaryArcs | None = None) -> WResult:
    """Whether some geodesic from the south-west arc to the north-east arc visits the origin.

    One forward DP per south-west point gives its passage times to column
    0; one reversed DP per north-east point gives passage times back to
    column 1.  A pair's passage time is the best split over the height of
    the crossing, and the origin is on the geodesic exactly when routing
    through it loses nothing.  The first witness in arc order is returned.
    """
    arcs = boundary_arcs(N, epsilon) if arcs is None else arcs
    N = arcs.N
    w = field.block((-N, -N), (N, N))
    A = _sw_profiles(w, N, arcs.sw)
    B = _ne_profiles(w, N, arcs.ne)
    iu, iv = _w_scan(w, N, A, B, arcs.sw, arcs.ne, RTOL)
    if iu < 0:
        return WResult(False)
    return WResult(True, tuple(int(c) for c in arcs.sw[iu]), tuple(int(c) for c in arcs.ne[iv]))


def detect_W_exhaustive(field, N: int, epsilon: float) -> WResult:
    """All-pairs oracle: a full DP and backtracked geodesic for every pair."""
    arcs = boundary_arcs(N, epsilon)
    for u in arcs.sw:
        for v in arcs.ne:
            u_, v_ = tuple(int(c) for c in u), tuple(int(c) for c in v)
            if origin_on_geodesic_by_path(field, u_, v_):
                return WResult(True, u_, v_)
    return WResult(False)


# ---------------------------------------------------------------- coarse blocks


@dataclass(frozen=True, eq=False)
class CoarseBlock:
    N: int
    epsilon: float
    o: tuple[int, int]
    d: tuple[float, float]
    members: np.ndarray
    corner: tuple[int, int]
    mirror: tuple[int, int]
    mirror_members: np.ndarray
    mirror_corner: tuple[int, int]
    far: np.ndarray


def _minimal(points: np.ndarray, sign: int) -> tuple[int, int]:
    c = (int(sign * np.max(sign * points[:, 0])), int(sign * np.max(sign * points[:, 1])))
    if not np.any((points[:, 0] == c[0]) & (points[:, 1] == c[1])):
        raise ValueError("block has no extremal member")
    return c


def coarse_block(o, d, N: int, epsilon: float = 0.25) -> CoarseBlock:
    """Block of south-west arc points within d1 N^(2/3) / 2 of o, and its mirror block.

    The mirror block is centred at -o on the north-east arc with radius
    d2 N^(2/3) / 2; ``far`` is the rest of that arc.
    """
    o = as_point(o)
    d1, d2 = float(d[0]), float(d[1])
    arcs = boundary_arcs(N, epsilon)
    if not np.any((arcs.sw[:, 0] == o[0]) & (arcs.sw[:, 1] == o[1])):
        raise ValueError(f"{o} is not on the south-west arc")
    h = power(N, 2.0 / 3.0)
    dist = np.abs(arcs.sw - np.array(o)).sum(axis=1)
    members = arcs.sw[dist <= d1 * h / 2 + 1e-9]
    mirror = (-o[0], -o[1])
    mdist = np.abs(arcs.ne - np.array(mirror)).sum(axis=1)
    inside = mdist <= d2 * h / 2 + 1e-9
    return CoarseBlock(
        N=arcs.N,
        epsilon=arcs.epsilon,
        o=o,
        d=(d1, d2),
        members=members,
        corner=_minimal(members, -1),
        mirror=mirror,
        mirror_members=arcs.ne[inside],
        mirror_corner=_minimal(arcs.ne[inside], 1),
        far=arcs.ne[~inside],
    )


@njit(cache=True)
def _edge_any(A, B, N, lo_u, hi_v, rows, cols, rtol):
    # does any pair (rows[i], cols[j]) have its column crossing at height 0?
    for a in range(rows.shape[0]):
        iu = rows[a]
        for b in range(cols.shape[0]):
            iv = cols[b]
            best = -np.inf
            for n in range(lo_u[iu] + N, hi_v[iv] + N + 1):
                val = A[iu, n] + B[iv, n]
                if val > best:
                    best = val
            if best - (A[iu, N] + B[iv, N]) <= rtol * abs(best):
                return True
    return False


def block_connection_events(field, block: CoarseBlock) -> tuple[bool, bool]:
    """Whether some geodesic from the block uses the edge (0,0)-(1,0).

    Returns the indicator for targets in the mirror block and for targets
    in the far set.
    """
    N = block.N
    w = field.block((-N, -N), (N, N))
    ne = np.concatenate([block.mirror_members, block.far]) if len(block.far) else block.mirror_members
    A = _sw_profiles(w, N, block.members)
    B = _ne_profiles(w, N, ne)
    rows = np.arange(len(block.members))
    near = np.arange(len(block.mirror_members))
    far = np.arange(len(block.mirror_members), len(ne))
    lo_u = block.members[:, 1].copy()
    hi_v = ne[:, 1].copy()
    hit_near = _edge_any(A, B, N, lo_u, hi_v, rows, near, RTOL)
    hit_far = bool(len(far)) and _edge_any(A, B, N, lo_u, hi_v, rows, far, RTOL)
    return bool(hit_near), bool(hit_far)


# ---------------------------------------------------------------- sandwich


@dataclass(frozen=True)
class SandwichResult:
    """Outcome of one sandwich check.

    ``occurred_*`` says whether the exit-point event happened and ``held_*``
    whether the increment inequalities held (vacuously true if not).
    ``occurred_*_extended`` repeats the event with the outer target moved one
    step further out, to the lowest point the increments actually touch.
    """

    occurred_a: bool
    held_a: bool
    occurred_b: bool
    held_b: bool
    occurred_a_extended: bool
    occurred_b_extended: bool
    max_excess_a: float
    max_excess_b: float
    rho: float
    lam: float
    feasible: bool


def sandwich_parameters(N: int, r: float, epsilon: float) -> dict:
    h = power(N, 1.0 / 3.0)
    return {
        "shift": r / h,
        "r_max": math.sqrt(epsilon) / (2.0 * (1.0 + math.sqrt(epsilon))) * h,
    }


def _shifted(rho, shift):
    lo, hi = rho - shift, rho + shift
    if not (0.0 < lo and hi < 1.0):
        raise ValueError(f"shifted densities ({lo}, {hi}) leave (0, 1)")
    return lo, hi


def _stationary_column(field, base, rho, top, targets):
    """Column-0 passage times and exit points of the scaled stationary process at ``base``."""
    m, n = -base[0], top - base[1]
    bd = StationaryBoundary.scaled_from_bulk(field, base, rho, m, n)
    w = np.empty((m + 1, n + 1))
    w[0, 0] = 0.0
    w[1:, 0] = bd.I
    w[0, 1:] = bd.J
    w[1:, 1:] = field.block((base[0] + 1, base[1] + 1), (0, top))
    g, lab = K.corner_table_labels(w)
    col = g[m, :]
    exits = {t: int(lab[m, t - base[1]]) for t in targets}
    return col, exits


def sandwich_event_check(field, o, d, r: float, N: int, epsilon: float = 0.25) -> SandwichResult:
    """Check the increment sandwich on the exit-point events around block o.

    For the south-west block with minimal corner o_c and density
    rho = rho(o_c), two stationary processes at o_c with densities
    rho -/+ r N^(-1/3) share the field through scaled boundary weights.  If
    the lower one exits the vertical axis above d1 N^(2/3) (target
    (0, -ceil(N^(2/3)))) and the upper one the horizontal axis beyond
    d1 N^(2/3) (target (0, ceil(N^(2/3)))), every member u must satisfy

        J^{upper}_j <= J^u_j <= J^{lower}_j   for |j| <= N^(2/3)

    where J are vertical increments on column 0.  The same is checked for
    the mirror block with reversed processes and increments on column 1.
    """
    block = coarse_block(o, d, N, epsilon)
    N = block.N
    h = power(N, 2.0 / 3.0)
    half = floor_tol(h)
    top = ceil_tol(h)
    d1, d2 = block.d
    params = sandwich_parameters(N, r, epsilon)
    feasible = bool(r <= params["r_max"] and 1 <= min(d1, d2) and max(d1, d2) <= 0.5 * epsilon * power(N, 1 / 3))
    if np.max(block.members[:, 1]) > -half - 1:
        raise ValueError("block too close to the axis for increments at the bottom of the window")
    if np.min(block.mirror_members[:, 1]) < half + 1:
        raise ValueError("mirror block too close to the axis for increments at the top of the window")

    # south-west side, increments on column 0 at heights -half-1 .. half
    oc = block.corner
    rho = boundary_point_to_rho(oc)
    rho_lo, rho_hi = _shifted(rho, params["shift"])
    ext = -half - 1
    col_lo, z_lo = _stationary_column(field, oc, rho_lo, top, (-top, ext))
    col_hi, z_hi = _stationary_column(field, oc, rho_hi, top, (top,))
    k0 = ext - oc[1]
    J_lo = np.diff(col_lo[k0 : half - oc[1] + 1])
    J_hi = np.diff(col_hi[k0 : half - oc[1] + 1])
    occurred_a = z_lo[-top] < -d1 * h and z_hi[top] > d1 * h
    occurred_a_ext = z_lo[ext] < -d1 * h and z_hi[top] > d1 * h
    excess_a = 0.0
    if occurred_a:
        for u in block.members:
            Ju = np.diff(profile_to_column(field, tuple(u), 0, (ext, half)).values)
            tol = RTOL * max(1.0, float(np.max(np.abs(col_lo))))
            excess_a = max(excess_a, float(np.max(J_hi - Ju)) - tol, float(np.max(Ju - J_lo)) - tol)

    # north-east side via the reflected field: reversed processes become forward ones
    rf = field.reflected()
    vc = block.mirror_corner
    lam = arc_point_rho(vc)
    lam_lo, lam_hi = _shifted(lam, params["shift"])
    base = (-vc[0], -vc[1])
    # reflected column -1 holds the original column 1; heights flip sign
    # original heights -half-1 .. half  <->  reflected heights -half .. half+1
    top_r = max(top, half + 1)
    col_lo_r, zb_lo = _stationary_reflected(rf, base, lam_lo, top_r, (top,))
    col_hi_r, zb_hi = _stationary_reflected(rf, base, lam_hi, top_r, (-top, ext))
    occurred_b = zb_lo[top] < -d2 * h and zb_hi[-top] > d2 * h
    occurred_b_ext = zb_lo[top] < -d2 * h and zb_hi[ext] > d2 * h
    # hat J_j = hatG(1, j-1) - hatG(1, j) = G_r(-1, -j+1) - G_r(-1, -j)
    heights = np.arange(-half, half + 1)
    idx = lambda col, n: col[n - base[1]]  # noqa: E731
    Jb_lo = np.array([idx(col_lo_r, -j + 1) - idx(col_lo_r, -j) for j in heights])
    Jb_hi = np.array([idx(col_hi_r, -j + 1) - idx(col_hi_r, -j) for j in heights])
    excess_b = 0.0
    if occurred_b:
        for v in block.mirror_members:
            prof = reversed_profile_to_column(field, tuple(v), 1, (ext, half)).values
            Jv = prof[:-1] - prof[1:]
            tol = RTOL * max(1.0, float(np.max(np.abs(col_lo_r))))
            excess_b = max(excess_b, float(np.max(Jb_hi - Jv)) - tol, float(np.max(Jv - Jb_lo)) - tol)

    return SandwichResult(
        occurred_a=bool(occurred_a),
        held_a=bool(excess_a <= 0.0),
        occurred_b=bool(occurred_b),
        held_b=bool(excess_b <= 0.0),
        occurred_a_extended=bool(occurred_a_ext),
        occurred_b_extended=bool(occurred_b_ext),
        max_excess_a=excess_a,
        max_excess_b=excess_b,
        rho=rho,
        lam=lam,
        feasible=feasible,
    )


def _stationary_reflected(rf, base, rho, top, targets):
    """Column -1 passage times and exit points of a forward process in the reflected field.

    ``targets`` are heights t of the original column-1 points (1, t); in the
    reflected field they sit at (-1, -t).
    """
    m, n = -1 - base[0], top - base[1]
    bd = StationaryBoundary.scaled_from_bulk(rf, base, rho, m, n)
    w = np.empty((m + 1, n + 1))
    w[0, 0] = 0.0
    w[1:, 0] = bd.I
    w[0, 1:] = bd.J
    w[1:, 1:] = rf.block((base[0] + 1, base[1] + 1), (-1, top))
    g, lab = K.corner_table_labels(w)
    col = g[m, :]
    exits = {t: int(lab[m, -t - base[1]]) for t in targets}
    return col, exits


# ---------------------------------------------------------------- cylinders and deviations


@njit(cache=True)
def _column_span(g, i):
    """Lowest and highest heights of the backtracked path at column index i."""
    steps = K.backtrack(g, g.shape[0] - 1, g.shape[1] - 1)
    x = 0
    y = 0
    lo = -1
    hi = -1
    if i == 0:
        lo = 0
    for s in steps:
        if s == K.E1:
            x += 1
        else:
            y += 1
        if x == i:
            if lo < 0:
                lo = y
            hi = y
    if i == 0 and hi < 0:
        hi = 0
    return lo, hi


def geodesic_column_span(field, u, y, m: int) -> tuple[int, int]:
    """Lowest and highest heights at which the geodesic from u to y visits column m."""
    u, y = require_ordered(u, y)
    if not u[0] <= m <= y[0]:
        raise ValueError(f"column {m} outside [{u[0]}, {y[0]}]")
    g = K.lpp_table(field.block(u, y))
    lo, hi = _column_span(g, m - u[0])
    return lo + u[1], hi + u[1]


def _lattice_gap(lo: int, hi: int, c: float) -> float:
    """Distance from height c to the nearest integer height in [lo, hi]."""
    return abs(min(max(round(c), lo), hi) - c)


def _direction(xi) -> tuple[float, float]:
    if np.ndim(xi) == 0:
        xi1 = float(xi)
        return xi1, 1.0 - xi1
    s = float(xi[0]) + float(xi[1])
    return float(xi[0]) / s, float(xi[1]) / s


def cylinder_target(xi, N: int) -> tuple[int, int]:
    xi1, xi2 = _direction(xi)
    return floor_tol(N * xi1), floor_tol(N * xi2)


def cylinder_check_args(xi, N, i, epsilon, delta):
    xi1, xi2 = _direction(xi)
    if not epsilon / (1 + epsilon) - 1e-12 <= xi1 <= 1 / (1 + epsilon) + 1e-12:
        raise ValueError(f"xi1 = {xi1} outside [eps/(1+eps), 1/(1+eps)]")
    if not ceil_tol(delta * N * xi1) <= i <= floor_tol((1 - delta) * N * xi1):
        raise ValueError(f"column {i} outside [delta N xi1, (1 - delta) N xi1]")
    return xi1, xi2


def cylinder_distance(field, xi, N: int, i: int) -> float:
    """Vertical distance, in units of N^(2/3), from the geodesic at column i to the xi-ray."""
    xi1, xi2 = _direction(xi)
    lo, hi = geodesic_column_span(field, (0, 0), cylinder_target(xi, N), i)
    return _lattice_gap(lo, hi, i * xi2 / xi1) / power(N, 2.0 / 3.0)


def cylinder_intersect(field, xi, N: int, i: int, r: float, epsilon: float = 0.25, delta: float = 0.25) -> bool:
    """Whether the geodesic from 0 to floor(N xi) meets {i} x {y : |i xi2/xi1 - y| <= r N^(2/3)}."""
    cylinder_check_args(xi, N, i, epsilon, delta)
    return bool(cylinder_distance(field, xi, N, i) <= r * (1 + 1e-12))


def geodesic_deviation(field, u, v, m: int, t: float) -> bool:
    """Whether every visit of the geodesic u -> v to column m is farther than t from the chord."""
    u, v = require_ordered(u, v)
    if not u[0] <= m <= v[0]:
        raise ValueError(f"column {m} outside [{u[0]}, {v[0]}]")
    if u[0] == v[0]:
        raise ValueError("chord is vertical; need u1 < v1")
    chord = u[1] + (v[1] - u[1]) / (v[0] - u[0]) * (m - u[0])
    lo, hi = geodesic_column_span(field, u, v, m)
    return bool(_lattice_gap(lo, hi, chord) > t)
