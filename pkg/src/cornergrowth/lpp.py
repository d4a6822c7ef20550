"""Bulk last-passage times, geodesics, passage profiles and comparison checks.

Points are pairs ``(x1, x2)``.  ``G(u, y)`` is the maximum over up-right
paths from u to y of the sum of the vertex weights, both endpoints
included.  A field is anything with ``block(lo, hi)`` returning the
weights on a box (see :mod:`cornergrowth.weights`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K

E1 = K.E1
E2 = K.E2


def as_point(x) -> tuple[int, int]:
    x1, x2 = x
    if int(x1) != x1 or int(x2) != x2:
        raise ValueError(f"lattice points need integer coordinates, got {x}")
    return int(x1), int(x2)


def leq(u, y) -> bool:
    return u[0] <= y[0] and u[1] <= y[1]


def require_ordered(u, y, what="u <= y"):
    u, y = as_point(u), as_point(y)
    if not leq(u, y):
        raise ValueError(f"need {what} coordinatewise, got {u} and {y}")
    return u, y


@dataclass(frozen=True)
class UpRightPath:
    """Nearest-neighbor up-right path stored as a start point and step codes (1 = e1, 2 = e2)."""

    start: tuple[int, int]
    steps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "start", as_point(self.start))
        steps = tuple(int(s) for s in self.steps)
        if any(s not in (E1, E2) for s in steps):
            raise ValueError("steps must be 1 (e1) or 2 (e2)")
        object.__setattr__(self, "steps", steps)

    @property
    def end(self) -> tuple[int, int]:
        n1 = sum(1 for s in self.steps if s == E1)
        return (self.start[0] + n1, self.start[1] + len(self.steps) - n1)

    def points(self) -> np.ndarray:
        moves = np.zeros((len(self.steps) + 1, 2), dtype=np.int64)
        codes = np.asarray(self.steps, dtype=np.int64)
        moves[1:, 0] = codes == E1
        moves[1:, 1] = codes == E2
        return np.cumsum(moves, axis=0) + np.asarray(self.start)

    def weight(self, field) -> float:
        pts = self.points()
        lo = pts[0]
        w = field.block(tuple(lo), tuple(pts[-1]))
        return float(np.sum(w[pts[:, 0] - lo[0], pts[:, 1] - lo[1]]))

    def column(self, m: int) -> np.ndarray:
        """Heights at which the path visits column ``m`` (possibly empty)."""
        pts = self.points()
        return pts[pts[:, 0] == m, 1]

    def __contains__(self, x) -> bool:
        x = as_point(x)
        pts = self.points()
        return bool(np.any((pts[:, 0] == x[0]) & (pts[:, 1] == x[1])))

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class PassageProfile:
    """Passage times from (or, if reversed, back to) ``source`` along one column or row.

    ``values[k]`` belongs to free coordinate ``start + k``.
    """

    source: tuple[int, int]
    axis: str
    coordinate: int
    start: int
    values: np.ndarray
    reversed: bool = False

    @property
    def stop(self) -> int:
        return self.start + len(self.values) - 1

    def at(self, n: int) -> float:
        k = int(n) - self.start
        if not 0 <= k < len(self.values):
            raise IndexError(f"{n} outside profile range [{self.start}, {self.stop}]")
        return float(self.values[k])

    def point(self, n: int) -> tuple[int, int]:
        return (self.coordinate, int(n)) if self.axis == "column" else (int(n), self.coordinate)


def lpp(field, u, y) -> float:
    """Last-passage time G(u, y)."""
    u, y = require_ordered(u, y)
    return float(K.lpp_value(field.block(u, y)))


def lpp_table(field, u, y) -> np.ndarray:
    """Full table ``T[i, j] = G(u, u + (i, j))`` over the box [u, y]."""
    u, y = require_ordered(u, y)
    return K.lpp_table(field.block(u, y))


def geodesic(field, u, y) -> UpRightPath:
    """Maximizing path from u to y; exact ties go through the lower predecessor."""
    u, y = require_ordered(u, y)
    table = K.lpp_table(field.block(u, y))
    steps = K.backtrack(table, y[0] - u[0], y[1] - u[1])
    return UpRightPath(u, tuple(steps.tolist()))


def brute_force_lpp(field, u, y, max_paths: int = 10_000) -> float:
    """G(u, y) by enumerating every up-right path; a test oracle for small boxes."""
    u, y = require_ordered(u, y)
    a, b = y[0] - u[0], y[1] - u[1]
    count = math.comb(a + b, a)
    if count > max_paths:
        raise ValueError(f"{count} paths exceed the enumeration limit {max_paths}")
    w = field.block(u, y)
    best = -math.inf
    for e1_positions in itertools.combinations(range(a + b), a):
        i = j = 0
        total = w[0, 0]
        e1_set = set(e1_positions)
        for k in range(a + b):
            if k in e1_set:
                i += 1
            else:
                j += 1
            total += w[i, j]
        best = max(best, total)
    return float(best)


def reversed_lpp(field, v, x) -> float:
    """Reversed passage time from v back down to x <= v; equals G(x, v)."""
    x, v = require_ordered(x, v, "x <= v")
    return float(K.reversed_value(field.block(x, v)))


def _free_range(n_range):
    lo, hi = (int(n_range[0]), int(n_range[1]))
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    return lo, hi


def profile_to_column(field, u, m: int, n_range, axis: str = "column") -> PassageProfile:
    """G(u, (m, n)) for n in the inclusive range, from a single DP sweep.

    With ``axis="row"`` the roles swap: G(u, (n, m)) along row m.
    """
    u = as_point(u)
    lo, hi = _free_range(n_range)
    m = int(m)
    if axis == "column":
        if m < u[0] or lo < u[1]:
            raise ValueError(f"column {m}, rows [{lo}, {hi}] not reachable from {u}")
        g = K.lpp_last_column(field.block(u, (m, hi)))
        values = g[lo - u[1] :]
    elif axis == "row":
        if m < u[1] or lo < u[0]:
            raise ValueError(f"row {m}, columns [{lo}, {hi}] not reachable from {u}")
        g = K.lpp_last_row(field.block(u, (hi, m)))
        values = g[lo - u[0] :]
    else:
        raise ValueError("axis must be 'column' or 'row'")
    return PassageProfile(u, axis, m, lo, np.ascontiguousarray(values))


def reversed_profile_to_column(field, v, m: int, n_range) -> PassageProfile:
    """Reversed passage times from v back to (m, n) for n in range, i.e. G((m, n), v)."""
    v = as_point(v)
    lo, hi = _free_range(n_range)
    m = int(m)
    if m > v[0] or hi > v[1]:
        raise ValueError(f"column {m}, rows [{lo}, {hi}] not below-left of {v}")
    g = K.reversed_first_column(field.block((m, lo), v))
    return PassageProfile(v, "column", m, lo, np.ascontiguousarray(g[: hi - lo + 1]), reversed=True)


def _close(a, b, scale):
    return bool(a <= b + 1e-12 * max(1.0, abs(scale)))


def check_crossing(field, o, x) -> tuple[bool, bool, bool, bool]:
    """Evaluate the four crossing inequalities for base o and target x.

    Returns, in order::

        G(o+e1, x+e2) - G(o+e1, x) <= G(o, x+e2) - G(o, x)
        G(o, x+e2) - G(o, x)       <= G(o+e2, x+e2) - G(o+e2, x)
        G(o+e2, x+e1) - G(o+e2, x) <= G(o, x+e1) - G(o, x)
        G(o, x+e1) - G(o, x)       <= G(o+e1, x+e1) - G(o+e1, x)
    """
    o, x = as_point(o), as_point(x)
    if not (x[0] >= o[0] + 1 and x[1] >= o[1] + 1):
        raise ValueError(f"need x >= o + (1, 1), got o={o}, x={x}")
    w = field.block(o, (x[0] + 1, x[1] + 1))
    a, b = x[0] - o[0], x[1] - o[1]
    g0 = K.lpp_table(w)
    g1 = K.lpp_table(w[1:, :])  # from o + e1
    g2 = K.lpp_table(w[:, 1:])  # from o + e2
    v_o = g0[a, b + 1] - g0[a, b]
    v_1 = g1[a - 1, b + 1] - g1[a - 1, b]
    v_2 = g2[a, b] - g2[a, b - 1]
    h_o = g0[a + 1, b] - g0[a, b]
    h_1 = g1[a, b] - g1[a - 1, b]
    h_2 = g2[a + 1, b - 1] - g2[a, b - 1]
    scale = g0[a + 1, b + 1]
    return (
        _close(v_1, v_o, scale),
        _close(v_o, v_2, scale),
        _close(h_2, h_o, scale),
        _close(h_o, h_1, scale),
    )


def check_monotone_increments(field, field_tilde, o, y_max) -> bool:
    """Edgewise comparison of G and G~ over the box [o, y_max].

    Hypothesis on the pair: ``field`` is at least ``field_tilde`` on the
    e1-axis through o, at most on the e2-axis, and equal in the open
    quadrant.  Checks that e1-increments of G dominate those of G~ and
    e2-increments are dominated, on every edge of the box.
    """
    o, y_max = require_ordered(o, y_max, "o <= y_max")
    w = field.block(o, y_max)
    wt = field_tilde.block(o, y_max)
    if not (
        np.all(w[1:, 0] >= wt[1:, 0])
        and np.all(w[0, 1:] <= wt[0, 1:])
        and np.array_equal(w[1:, 1:], wt[1:, 1:])
    ):
        raise ValueError("field pair does not satisfy the boundary ordering hypothesis")
    g, gt = K.lpp_table(w), K.lpp_table(wt)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(g))), float(np.max(np.abs(gt))))
    ok_h = np.all(np.diff(g, axis=0) >= np.diff(gt, axis=0) - tol)
    ok_v = np.all(np.diff(g, axis=1) <= np.diff(gt, axis=1) + tol)
    return bool(ok_h and ok_v)


def superadditivity_gap(field, u, v, y) -> float:
    """G(u, y) - (G(u, v) + G(v, y) - w_v), which is never negative."""
    u, v = require_ordered(u, v, "u <= v")
    v, y = require_ordered(v, y, "v <= y")
    w = field.block(u, y)
    g = K.lpp_table(w)
    a = (v[0] - u[0], v[1] - u[1])
    gv_y = K.lpp_value(w[a[0] :, a[1] :])
    return float(g[-1, -1] - (g[a] + gv_y - w[a]))
