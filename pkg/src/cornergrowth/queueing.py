"""Departure, sojourn and dual-service operators on two-sided sequences.

Customer j arrives ``a[j]`` after customer j-1 and needs service ``s[j]``.
With ``G`` any partial-sum sequence of ``a``, the operators are built from

    G~[j] = sup_{k <= j} ( G[k] + s[k] + ... + s[j] )

via ``d[j] = G~[j] - G~[j-1]``, ``t[j] = G~[j] - G[j]`` and
``s_dual[j] = min(a[j], t[j-1])``.  On a finite window the supremum can only
run over indices inside the window.  Internally everything runs through the
Lindley recursion ``t[j] = s[j] + max(0, t[j-1] - a[j])``, which needs no
anchor.  Outputs are reported only from the index where a run started empty
at the window edge and a run started empty halfway into the burn-in have
coalesced; from there on they are bitwise independent of either start.
This is a per-instance heuristic: the run from the infinite past carries more
workload than either, and callers that need more confidence compare results
across two window lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .weights import STREAM_QUEUE, Seed, exp_sequence


class WindowTooShort(RuntimeError):
    """A requested output still depends on where the window was truncated."""


class DriftViolation(WindowTooShort):
    """Mean service time is not below mean inter-arrival time on the burn-in prefix."""


@dataclass(frozen=True, eq=False)
class BiSequence:
    """Values indexed by the integers ``start, ..., start + len(values) - 1``."""

    values: np.ndarray
    start: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise ValueError("empty sequence")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("sequence values must be finite and nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", int(self.start))

    @property
    def stop(self) -> int:
        return self.start + len(self.values) - 1

    @property
    def window(self) -> tuple[int, int]:
        return self.start, self.stop

    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop + 1)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> float:
        k = int(j) - self.start
        if not 0 <= k < len(self.values):
            raise IndexError(f"index {j} outside window [{self.start}, {self.stop}]")
        return float(self.values[k])

    def restrict(self, lo: int, hi: int) -> BiSequence:
        if lo < self.start or hi > self.stop or lo > hi:
            raise IndexError(f"[{lo}, {hi}] not inside window [{self.start}, {self.stop}]")
        return BiSequence(self.values[lo - self.start : hi - self.start + 1], lo)

    @classmethod
    def exponential(cls, seed: Seed, rate: float, start: int, stop: int) -> BiSequence:
        return cls(exp_sequence(seed, start, stop - start + 1, rate), start)

    @classmethod
    def constant(cls, value: float, start: int, stop: int) -> BiSequence:
        return cls(np.full(stop - start + 1, float(value)), start)


@dataclass(frozen=True, eq=False)
class QueueOutputs:
    departures: BiSequence
    sojourns: BiSequence
    dual_services: BiSequence
    certified_from: int


@njit(cache=True)
def _lindley(a, s):
    n = a.shape[0]
    t = np.empty(n)
    d = np.full(n, np.nan)
    sd = np.full(n, np.nan)
    t[0] = s[0]
    for k in range(1, n):
        excess = t[k - 1] - a[k]
        if excess > 0.0:
            t[k] = s[k] + excess
            d[k] = s[k]
        else:
            t[k] = s[k]
            d[k] = s[k] - excess
        sd[k] = a[k] if a[k] < t[k - 1] else t[k - 1]
    return t, d, sd


def default_margin(mean_arrival: float, mean_service: float) -> int:
    """Burn-in length ceil(40 * sigma / (sigma - alpha)) in terms of the two means."""
    if not mean_service < mean_arrival:
        raise DriftViolation("service mean must be below arrival mean")
    # sigma / (sigma - alpha) = mean_arrival / (mean_arrival - mean_service)
    return math.ceil(40.0 * mean_arrival / (mean_arrival - mean_service))


def _common_window(a: BiSequence, s: BiSequence) -> tuple[int, int]:
    lo, hi = max(a.start, s.start), min(a.stop, s.stop)
    if lo > hi:
        raise ValueError("arrival and service windows do not overlap")
    return lo, hi


def depart(a: BiSequence, s: BiSequence, out_range=None) -> QueueOutputs:
    """Run the queue with inter-arrivals ``a`` and services ``s``.

    Inputs are cut to their common window.  If ``out_range = (lo, hi)`` is
    given, outputs are returned on exactly that range and the indices before
    ``lo`` serve as burn-in; otherwise all certified indices are returned.

    Raises :class:`DriftViolation` if services are not faster than arrivals on
    the burn-in prefix and :class:`WindowTooShort` if some requested index is
    not certified.
    """
    lo_w, hi_w = _common_window(a, s)
    av = a.values[lo_w - a.start : hi_w - a.start + 1]
    sv = s.values[lo_w - s.start : hi_w - s.start + 1]
    if out_range is None:
        burn = len(av)
    else:
        lo, hi = int(out_range[0]), int(out_range[1])
        if lo > hi or hi > hi_w:
            raise ValueError(f"output range [{lo}, {hi}] not inside window [{lo_w}, {hi_w}]")
        if lo <= lo_w:
            raise WindowTooShort(f"no burn-in before index {lo} (window starts at {lo_w})")
        burn = lo - lo_w
    if not np.mean(sv[:burn]) < np.mean(av[:burn]):
        raise DriftViolation(
            f"mean service {np.mean(sv[:burn]):.6g} >= mean inter-arrival "
            f"{np.mean(av[:burn]):.6g} on the burn-in prefix"
        )
    av, sv = np.ascontiguousarray(av), np.ascontiguousarray(sv)
    t, d, sd = _lindley(av, sv)
    # a second run starts empty halfway into the burn-in (or, without an
    # output range, where the first run first empties); outputs count as free
    # of the window edge only after the two runs coalesce
    if out_range is None:
        empty = np.flatnonzero(t[:-1] < av[1:])
        if empty.size == 0:
            raise WindowTooShort("the queue never empties inside the window")
        h = int(empty[0]) + 1
    else:
        h = max(burn // 2, 1)
    t_ref = _lindley(av[h:], sv[h:])[0]
    same = np.flatnonzero(t[h:] == t_ref)
    if same.size == 0:
        raise WindowTooShort("runs started at the window edge and halfway in never coalesce")
    first = lo_w + h + int(same[0]) + 1
    if out_range is None:
        lo, hi = first, hi_w
        if lo > hi:
            raise WindowTooShort("no certified outputs in the window")
    elif lo < first:
        raise WindowTooShort(f"outputs before index {first} depend on the window edge; requested {lo}")
    sl = slice(lo - lo_w, hi - lo_w + 1)
    return QueueOutputs(
        BiSequence(d[sl], lo), BiSequence(t[sl], lo), BiSequence(sd[sl], lo), first
    )


def departures(a: BiSequence, s: BiSequence, out_range=None) -> BiSequence:
    return depart(a, s, out_range).departures


def dual_services(a: BiSequence, s: BiSequence, out_range=None) -> BiSequence:
    return depart(a, s, out_range).dual_services


def sup_form(a: BiSequence, s: BiSequence, anchor: float = 0.0) -> QueueOutputs:
    """Quadratic-time evaluation straight from the supremum formula.

    Meant as an oracle for small windows: partial sums start from
    ``anchor``, and the supremum runs over the whole window.  Outputs are
    returned from the second index on.
    """
    lo_w, hi_w = _common_window(a, s)
    av = a.values[lo_w - a.start : hi_w - a.start + 1]
    sv = s.values[lo_w - s.start : hi_w - s.start + 1]
    n = len(av)
    g = anchor + np.cumsum(av)
    gt = np.empty(n)
    for j in range(n):
        gt[j] = max(g[k] + np.sum(sv[k : j + 1]) for k in range(j + 1))
    d = np.diff(gt)
    t = gt - g
    sd = np.minimum(av[1:], t[:-1])
    return QueueOutputs(BiSequence(d, lo_w + 1), BiSequence(t[1:], lo_w + 1), BiSequence(sd, lo_w + 1), lo_w + 1)


def queue_identity_check(b: BiSequence, a: BiSequence, s: BiSequence, out_range, atol: float = 1e-9) -> bool:
    """Compare D(D(b, a), s) with D(D(b, R(a, s)), D(a, s)) on ``out_range``.

    R is the dual-service operator.  Both sides are also evaluated on the
    second half of the window and must be unchanged; otherwise, and whenever
    an operator cannot certify its outputs, :class:`WindowTooShort` is raised.
    """
    def sides(b, a, s):
        lhs = departures(departures(b, a), s, out_range)
        inner = depart(a, s)
        rhs = departures(departures(b, inner.dual_services), inner.departures, out_range)
        return lhs.values, rhs.values

    lhs, rhs = sides(b, a, s)
    # both sides must already be insensitive to the first half of the window
    lo = max(b.start, a.start, s.start)
    half = lo + (int(out_range[0]) - lo) // 2
    lhs2, rhs2 = sides(*(x.restrict(half, x.stop) for x in (b, a, s)))
    if not (np.array_equal(lhs, lhs2) and np.array_equal(rhs, rhs2)):
        raise WindowTooShort("identity sides change when the window is halved")
    return bool(np.all(np.abs(lhs - rhs) <= atol))


def multiclass_arrivals(alpha1: float, alpha2: float, seed: Seed, window, margin: int | None = None,
                        max_doublings: int = 8) -> tuple[BiSequence, BiSequence]:
    """Coupled arrival pair ``(b1, D(b2, b1))`` on ``window = (lo, hi)``.

    ``b1`` and ``b2`` are independent i.i.d. Exp(alpha1) and Exp(alpha2)
    sequences drawn from two streams of ``seed``.  The burn-in doubles until
    the window is certified.
    """
    alpha1, alpha2 = float(alpha1), float(alpha2)
    if not alpha1 > alpha2 > 0:
        raise ValueError(f"need alpha1 > alpha2 > 0, got {alpha1}, {alpha2}")
    lo, hi = int(window[0]), int(window[1])
    if lo > hi:
        raise ValueError("empty window")
    if margin is None:
        margin = math.ceil(40.0 * alpha1 / (alpha1 - alpha2))
    s1, s2 = seed.with_stream(STREAM_QUEUE), seed.with_stream(STREAM_QUEUE + 1)
    for _ in range(max_doublings + 1):
        b1 = BiSequence.exponential(s1, alpha1, lo - margin, hi)
        b2 = BiSequence.exponential(s2, alpha2, lo - margin, hi)
        try:
            a2 = departures(b2, b1, (lo, hi))
        except WindowTooShort:
            margin *= 2
            continue
        return b1.restrict(lo, hi), a2
    raise WindowTooShort(f"no certified window with burn-in up to {margin // 2}")


@dataclass(frozen=True)
class FixedPointStats:
    alpha: float
    sigma: float
    n: int
    mean_departure: float
    se_departure: float
    mean_sojourn: float
    se_sojourn: float
    mean_dual: float
    se_dual: float
    var_departure: float
    var_sojourn: float
    var_dual: float
    autocorr: tuple[float, ...]
    se_autocorr: float

    def targets(self) -> dict:
        return {
            "mean_departure": 1.0 / self.alpha,
            "mean_sojourn": 1.0 / (self.sigma - self.alpha),
            "mean_dual": 1.0 / self.sigma,
        }


def batch_means_se(x: np.ndarray, batches: int = 100) -> float:
    """Standard error of the mean from non-overlapping batch means."""
    x = np.asarray(x, dtype=np.float64)
    size = len(x) // batches
    if size < 2:
        return float(np.std(x, ddof=1) / math.sqrt(len(x)))
    means = x[: size * batches].reshape(batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def autocorrelation(x: np.ndarray, lags) -> tuple[float, ...]:
    x = np.asarray(x, dtype=np.float64) - np.mean(x)
    denom = float(np.dot(x, x))
    return tuple(float(np.dot(x[:-k], x[k:]) / denom) for k in lags)


def fixedpoint_stats(alpha: float, sigma: float, n: int, seed: Seed, margin: int | None = None,
                     max_doublings: int = 8) -> FixedPointStats:
    """Statistics of the queue outputs driven by i.i.d. Exp(alpha) arrivals and Exp(sigma) services.

    The burn-in doubles until the output window is certified.
    """
    alpha, sigma, n = float(alpha), float(sigma), int(n)
    if not sigma > alpha > 0:
        raise ValueError(f"need sigma > alpha > 0, got alpha={alpha}, sigma={sigma}")
    if n < 10:
        raise ValueError("need at least 10 outputs")
    if margin is None:
        margin = math.ceil(40.0 * sigma / (sigma - alpha))
    for _ in range(max_doublings + 1):
        a = BiSequence.exponential(seed.with_stream(STREAM_QUEUE), alpha, -margin, n - 1)
        s = BiSequence.exponential(seed.with_stream(STREAM_QUEUE + 1), sigma, -margin, n - 1)
        try:
            out = depart(a, s, (0, n - 1))
        except WindowTooShort:
            margin *= 2
            continue
        break
    else:
        raise WindowTooShort(f"no certified window with burn-in up to {margin // 2}")
    d, t, sd = out.departures.values, out.sojourns.values, out.dual_services.values
    return FixedPointStats(
        alpha=alpha,
        sigma=sigma,
        n=n,
        mean_departure=float(d.mean()),
        se_departure=batch_means_se(d),
        mean_sojourn=float(t.mean()),
        se_sojourn=batch_means_se(t),
        mean_dual=float(sd.mean()),
        se_dual=batch_means_se(sd),
        var_departure=float(d.var(ddof=1)),
        var_sojourn=float(t.var(ddof=1)),
        var_dual=float(sd.var(ddof=1)),
        autocorr=autocorrelation(d, range(1, 6)),
        se_autocorr=1.0 / math.sqrt(n),
    )
