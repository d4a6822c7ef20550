"""Increment-stationary last-passage processes with exponential boundary weights.

A process with base u and density rho puts weight 0 at u, Exp(1 - rho)
weights ``I[i]`` at ``u + i e1`` and Exp(rho) weights ``J[j]`` at
``u + j e2`` (i, j >= 1), and the bulk field everywhere in the open quadrant.
The reversed orientation mirrors this: base in the north-east corner,
``I[i]`` at ``u - i e1`` and ``J[j]`` at ``u - j e2``.

Exit points are signed: +k if the maximizing path leaves the horizontal
axis at its k-th boundary vertex, -k if it leaves the vertical one.  Exact
ties are resolved the same way as for geodesics, which sends them to the
positive side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels as K
from .lpp import as_point, require_ordered
from .queueing import BiSequence, WindowTooShort, depart
from .weights import (
    STREAM_I,
    STREAM_I_REV,
    STREAM_J,
    STREAM_J_REV,
    STREAM_QUEUE,
    Seed,
    exp_sequence,
)

MODES = ("independent", "scaled-from-bulk", "queue-coupled-pair")
FORWARD = "forward"
REVERSED = "reversed"


def check_density(rho: float, name: str = "rho") -> float:
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {rho}")
    return rho


def rho_to_xi(rho: float) -> tuple[float, float]:
    """Characteristic direction of density rho, normalized to xi1 + xi2 = 1."""
    rho = check_density(rho)
    p, q = (1.0 - rho) ** 2, rho**2
    return p / (p + q), q / (p + q)


def xi_to_rho(xi) -> float:
    """Inverse of :func:`rho_to_xi`; accepts xi1 or the pair (xi1, xi2)."""
    xi1 = float(xi[0] / (xi[0] + xi[1])) if np.ndim(xi) else float(xi)
    if not 0.0 < xi1 < 1.0:
        raise ValueError(f"direction must lie strictly between the axes, got xi1={xi1}")
    a, b = math.sqrt(xi1), math.sqrt(1.0 - xi1)
    return b / (a + b)


def a_factor(rho: float) -> float:
    """1 / ((1 - rho)^2 + rho^2), which lies in [1, 2]."""
    rho = check_density(rho)
    return 1.0 / ((1.0 - rho) ** 2 + rho**2)


def boundary_point_to_rho(o) -> float:
    """Density whose characteristic direction points from o to the origin."""
    o1, o2 = as_point(o)
    if o1 >= 0 or o2 >= 0:
        raise ValueError(f"need strictly negative coordinates, got {(o1, o2)}")
    a, b = math.sqrt(-o1), math.sqrt(-o2)
    return b / (a + b)


def characteristic_point(rho: float, n: int) -> tuple[int, int]:
    """floor(n * xi(rho)) coordinatewise."""
    xi1, xi2 = rho_to_xi(rho)
    return math.floor(n * xi1), math.floor(n * xi2)


@dataclass(frozen=True, eq=False)
class StationaryBoundary:
    """Boundary weights for one density on the two axes through ``base``.

    ``I[i-1]`` and ``J[j-1]`` are the weights i and j steps from the base.
    """

    base: tuple[int, int]
    rho: float
    I: np.ndarray
    J: np.ndarray
    mode: str = "independent"
    orientation: str = FORWARD
    partner_rho: float | None = None
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "base", as_point(self.base))
        object.__setattr__(self, "rho", check_density(self.rho))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.orientation not in (FORWARD, REVERSED):
            raise ValueError("orientation must be 'forward' or 'reversed'")
        for name in ("I", "J"):
            arr = np.array(getattr(self, name), dtype=np.float64).reshape(-1)
            if not np.all(arr > 0):
                raise ValueError(f"{name} weights must be positive")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def sign(self) -> int:
        return 1 if self.orientation == FORWARD else -1

    def axis_point(self, axis: int, k: int) -> tuple[int, int]:
        b, s = self.base, self.sign
        return (b[0] + s * k, b[1]) if axis == 1 else (b[0], b[1] + s * k)

    @classmethod
    def independent(cls, base, rho, m: int, n: int, seed: Seed, orientation: str = FORWARD):
        """Fresh i.i.d. boundary weights from two streams of ``seed``."""
        rho = check_density(rho)
        si, sj = (STREAM_I, STREAM_J) if orientation == FORWARD else (STREAM_I_REV, STREAM_J_REV)
        I = exp_sequence(seed.with_stream(si), 1, m, 1.0 - rho)
        J = exp_sequence(seed.with_stream(sj), 1, n, rho)
        return cls(base, rho, I, J, "independent", orientation)

    @classmethod
    def scaled_from_bulk(cls, field, base, rho, m: int, n: int, orientation: str = FORWARD):
        """Boundary weights w/(1 - rho) and w/rho built from the field's own axis weights.

        These dominate the bulk weights they replace, and two densities built
        from the same field are coupled monotonically.
        """
        rho = check_density(rho)
        b = as_point(base)
        if orientation == FORWARD:
            I = field.block((b[0] + 1, b[1]), (b[0] + m, b[1]))[:, 0] if m else np.empty(0)
            J = field.block((b[0], b[1] + 1), (b[0], b[1] + n))[0, :] if n else np.empty(0)
        else:
            I = field.block((b[0] - m, b[1]), (b[0] - 1, b[1]))[::-1, 0] if m else np.empty(0)
            J = field.block((b[0], b[1] - n), (b[0], b[1] - 1))[0, ::-1] if n else np.empty(0)
        return cls(b, rho, I / (1.0 - rho), J / rho, "scaled-from-bulk", orientation)

    @classmethod
    def coupled_pair(cls, field, base, rho, lam, m: int, n: int, seed: Seed, margin: int | None = None,
                     max_doublings: int = 6):
        """Jointly stationary boundaries for densities lam < rho sharing one bulk field.

        On the vertical axis the pair is (Y_rho, D(Y_lam, Y_rho)) for
        independent i.i.d. sequences.  Each horizontal weight at ``base + k e1``
        is the sojourn time at height 0 when the vertical increments of column
        k - 1 are served by the field's weights in column k below the base.
        Returns ``(boundary_rho, boundary_lam)``.
        """
        rho, lam = check_density(rho), check_density(lam, "lam")
        if not lam < rho:
            raise ValueError(f"need lam < rho, got lam={lam}, rho={rho}")
        b = as_point(base)
        n_out = max(int(n), 1)
        if margin is None:
            margin = math.ceil(40.0 * rho / (rho - lam)) + math.ceil(40.0 / (1.0 - rho)) * (int(m) + 1)
        for _ in range(max_doublings + 1):
            try:
                pair = _coupled_pair_once(field, b, rho, lam, int(m), n_out, seed, margin)
            except WindowTooShort:
                margin *= 2
                continue
            (I_r, J_r), (I_l, J_l) = pair
            meta = {"margin": margin}
            return (
                cls(b, rho, I_r, J_r[:n], "queue-coupled-pair", FORWARD, lam, meta),
                cls(b, lam, I_l, J_l[:n], "queue-coupled-pair", FORWARD, rho, meta),
            )
        raise WindowTooShort(f"coupled boundary not certified with burn-in up to {margin // 2}")


def _coupled_pair_once(field, b, rho, lam, m, n, seed, margin):
    lo = -margin
    y_rho = BiSequence.exponential(seed.with_stream(STREAM_QUEUE + 2), rho, lo, n)
    y_lam = BiSequence.exponential(seed.with_stream(STREAM_QUEUE + 3), lam, lo, n)
    j_lam = depart(y_lam, y_rho).departures
    if j_lam.start > 0:
        raise WindowTooShort("vertical boundary not certified at the base")
    out = []
    for alpha, col in ((rho, y_rho), (lam, j_lam)):
        J = np.array([col[j] for j in range(1, n + 1)])
        I = np.empty(m)
        cur = col.restrict(col.start, 0)
        for k in range(1, m + 1):
            s = field.block((b[0] + k, b[1] + cur.start), (b[0] + k, b[1]))[0, :]
            res = depart(cur, BiSequence(s, cur.start))
            if res.certified_from > 0:
                raise WindowTooShort(f"column {k} not certified at the base")
            I[k - 1] = res.sojourns[0]
            cur = res.departures
        out.append((I, J))
    return out


def _forward_weights(field, boundary: StationaryBoundary, x) -> np.ndarray:
    u = boundary.base
    a, b = x[0] - u[0], x[1] - u[1]
    if a > len(boundary.I) or b > len(boundary.J):
        raise ValueError(f"boundary arrays ({len(boundary.I)}, {len(boundary.J)}) too short for {x}")
    w = np.empty((a + 1, b + 1))
    w[0, 0] = 0.0
    w[1:, 0] = boundary.I[:a]
    w[0, 1:] = boundary.J[:b]
    if a and b:
        w[1:, 1:] = field.block((u[0] + 1, u[1] + 1), x)
    return w


def _reversed_weights(field, boundary: StationaryBoundary, x) -> np.ndarray:
    u = boundary.base
    a, b = u[0] - x[0], u[1] - x[1]
    if a > len(boundary.I) or b > len(boundary.J):
        raise ValueError(f"boundary arrays ({len(boundary.I)}, {len(boundary.J)}) too short for {x}")
    w = np.empty((a + 1, b + 1))
    w[a, b] = 0.0
    w[:a, b] = boundary.I[:a][::-1]
    w[a, :b] = boundary.J[:b][::-1]
    if a and b:
        w[:a, :b] = field.block(x, (u[0] - 1, u[1] - 1))
    return w


def _forward_target(boundary, x, strict=False):
    if boundary.orientation != FORWARD:
        raise ValueError("use reversed_stationary for reversed boundaries")
    x = as_point(x)
    require_ordered(boundary.base, x, "base <= x")
    if strict and not (x[0] > boundary.base[0] and x[1] > boundary.base[1]):
        raise ValueError(f"exit point needs x strictly inside the quadrant, got {x}")
    return x


def stationary_lpp(field, boundary: StationaryBoundary, x) -> float:
    """Passage time from the base to x (the base itself carries weight 0)."""
    x = _forward_target(boundary, x)
    return float(K.lpp_value(_forward_weights(field, boundary, x)))


def stationary_table(field, boundary: StationaryBoundary, x) -> np.ndarray:
    """``T[i, j]`` = passage time from the base to ``base + (i, j)`` over the box up to x."""
    x = _forward_target(boundary, x)
    return K.lpp_table(_forward_weights(field, boundary, x))


def exit_point(field, boundary: StationaryBoundary, x) -> int:
    return stationary_with_exit(field, boundary, x)[1]


def stationary_with_exit(field, boundary: StationaryBoundary, x) -> tuple[float, int]:
    """Passage time and signed exit point in one rolling sweep."""
    x = _forward_target(boundary, x, strict=True)
    g, z = K.corner_value_label(_forward_weights(field, boundary, x))
    return float(g), int(z)


def stationary_geodesic_first_step(field, boundary: StationaryBoundary, x) -> int:
    """1 or 2: direction of the first step of the maximizing path (by backtracking)."""
    x = _forward_target(boundary, x, strict=True)
    w = _forward_weights(field, boundary, x)
    steps = K.backtrack(K.lpp_table(w), w.shape[0] - 1, w.shape[1] - 1)
    return int(steps[0])


def stationary_exit_by_backtracking(field, boundary: StationaryBoundary, x) -> int:
    """Exit point read off the backtracked path; an oracle for :func:`exit_point`."""
    x = _forward_target(boundary, x, strict=True)
    w = _forward_weights(field, boundary, x)
    steps = K.backtrack(K.lpp_table(w), w.shape[0] - 1, w.shape[1] - 1)
    first = steps[0]
    k = 0
    while k < len(steps) and steps[k] == first:
        k += 1
    return k if first == K.E1 else -k


def reversed_stationary(field, boundary: StationaryBoundary, x) -> tuple[float, int]:
    """Passage time from x up to the north-east base, and the signed exit point.

    +k means the path enters the north axis at ``base - k e1``, -k the east
    axis at ``base - k e2``.  Targets on an axis get exit point 0.
    """
    if boundary.orientation != REVERSED:
        raise ValueError("boundary must have reversed orientation")
    x = as_point(x)
    require_ordered(x, boundary.base, "x <= base")
    w = _reversed_weights(field, boundary, x)
    if x[0] == boundary.base[0] or x[1] == boundary.base[1]:
        return float(K.reversed_value(w)), 0
    g, z = K.reversed_corner_value_label(w)
    return float(g), int(z)


def increments(field, boundary: StationaryBoundary, path) -> tuple[np.ndarray, np.ndarray]:
    """Increments along a down-right path of vertices.

    Each e1 step from y to y + e1 contributes ``G(y + e1) - G(y)`` to the
    first array; each -e2 step from y to y - e2 contributes ``G(y) - G(y - e2)``
    to the second.  Both come back in path order.
    """
    pts = [as_point(p) for p in path]
    if len(pts) < 2:
        raise ValueError("path needs at least two vertices")
    u = boundary.base
    for p, q in zip(pts, pts[1:]):
        step = (q[0] - p[0], q[1] - p[1])
        if step not in ((1, 0), (0, -1)):
            raise ValueError(f"{p} -> {q} is not a down-right step")
    for p in pts:
        require_ordered(u, p, "base <= path vertex")
    top = (max(p[0] for p in pts), max(p[1] for p in pts))
    g = stationary_table(field, boundary, top)
    I, J = [], []
    for p, q in zip(pts, pts[1:]):
        gp = g[p[0] - u[0], p[1] - u[1]]
        gq = g[q[0] - u[0], q[1] - u[1]]
        (I if q[0] > p[0] else J).append(gq - gp if q[0] > p[0] else gp - gq)
    return np.array(I), np.array(J)


def _eta_weights(field, u, v, y):
    u, v = require_ordered(u, v, "u <= v")
    v, y = require_ordered(v, y, "v <= y")
    w = field.block(u, y)
    g = K.lpp_table(w)
    a, b = v[0] - u[0], v[1] - u[1]
    eta = w[a:, b:].copy()
    eta[0, 0] = 0.0
    eta[1:, 0] = np.diff(g[a:, b])
    eta[0, 1:] = np.diff(g[a, b:])
    return eta, g


def induced_boundary_process(field, u, v, y) -> float:
    """Passage time from v to y with boundary weights taken from G(u, .) increments.

    The corner v gets weight 0 and the bulk keeps the field, so the result
    equals G(u, y) - G(u, v).
    """
    eta, _ = _eta_weights(field, u, v, y)
    return float(K.lpp_value(eta))


def induced_exit_point(field, u, v, p) -> int:
    """Exit point of the induced process based at v, targeting p."""
    eta, _ = _eta_weights(field, u, v, p)
    if eta.shape[0] < 2 or eta.shape[1] < 2:
        raise ValueError("target must lie strictly inside the quadrant of v")
    return int(K.corner_value_label(eta)[1])


def bulk_exit_point(field, u, p) -> int:
    """Exit point from the axes through u of the bulk geodesic from u to p."""
    u, p = require_ordered(u, p)
    if not (p[0] > u[0] and p[1] > u[1]):
        raise ValueError("target must lie strictly inside the quadrant of u")
    return int(K.corner_value_label(field.block(u, p))[1])
