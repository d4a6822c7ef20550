"""Random-walk formulas, variance and exit-point experiments, and the Monte Carlo harness.

Every Monte Carlo routine takes a master seed and draws replica ``r`` from
``derive_seed(master, r)``, so results do not depend on how replicas are
split across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import _kernels as K
from ._util import floor_tol, power
from .stationary import check_density, rho_to_xi, xi_to_rho
from .weights import STREAM_BULK, STREAM_I, STREAM_J, STREAM_WALK, _as_signed, derive_seed, exp_at

# ---------------------------------------------------------------- harness


@dataclass(frozen=True)
class McSummary:
    n: int
    mean: float
    se: float
    ci95: tuple[float, float]

    def contains(self, value: float) -> bool:
        return self.ci95[0] <= value <= self.ci95[1]

    def z_score(self, value: float) -> float:
        if self.se == 0:
            return 0.0 if value == self.mean else math.copysign(math.inf, self.mean - value)
        return (self.mean - value) / self.se


def summarize(values, se: float | None = None) -> McSummary:
    """Mean, standard error (sample sd / sqrt n unless given) and 95% interval."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    mean = float(np.mean(x))
    if se is None:
        se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return McSummary(int(x.size), mean, float(se), (mean - 1.96 * se, mean + 1.96 * se))


@dataclass(frozen=True)
class TailFit:
    points: list[tuple[float, float]]
    slope: float
    intercept: float
    r_squared: float


def fit_loglog(x, y) -> TailFit:
    """Least-squares line through (log x, log y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need at least two matching points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive coordinates")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if sst == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / sst)
    return TailFit([(float(a), float(b)) for a, b in zip(lx, ly)], float(slope), float(intercept), r2)


def replica_seeds(master: int, count: int, start: int = 0) -> np.ndarray:
    """Signed 64-bit seeds for replicas ``start .. start+count-1``."""
    return np.array([_as_signed(derive_seed(master, i)) for i in range(start, start + count)], dtype=np.int64)


def map_replicas(kernel, seeds: np.ndarray, threads: int = 1, chunk: int | None = None):
    """Apply ``kernel`` to chunks of seeds and stitch the results back in replica order.

    ``kernel`` maps a seed array to an array (or tuple of arrays) with one
    row per seed.
    """
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    n = len(seeds)
    if chunk is None:
        chunk = max(1, -(-n // (4 * threads)))
    pieces = [seeds[i : i + chunk] for i in range(0, n, chunk)]
    if threads == 1 or len(pieces) == 1:
        results = [kernel(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(kernel, pieces))
    if isinstance(results[0], tuple):
        return tuple(np.concatenate([r[k] for r in results]) for k in range(len(results[0])))
    return np.concatenate(results)


# ---------------------------------------------------------------- random walks


@dataclass(frozen=True)
class RwParams:
    """Walk with steps Exp(alpha) - Exp(beta)."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")

    def require_negative_drift(self):
        if not self.alpha > self.beta:
            raise ValueError(f"need alpha > beta, got alpha={self.alpha}, beta={self.beta}")
        return self

    @property
    def decay(self) -> float:
        """1 - ((alpha - beta) / (alpha + beta))^2."""
        a, b = self.alpha, self.beta
        return 1.0 - ((a - b) / (a + b)) ** 2


def _log_first_passage(a: float, b: float, n: int) -> float:
    # log of C_{n-1} a^n b^(n-1) / (a+b)^(2n-1)
    log_cat = math.lgamma(2 * n - 1) - math.lgamma(n) - math.lgamma(n + 1)
    return log_cat + n * math.log(a) + (n - 1) * math.log(b) - (2 * n - 1) * math.log(a + b)


def _require_n(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return int(n)


def rw_first_passage_exact(p: RwParams, n: int) -> float:
    """P(S_1 > 0, ..., S_{n-1} > 0, S_n < 0) via the Catalan formula."""
    p.require_negative_drift()
    return math.exp(_log_first_passage(p.alpha, p.beta, _require_n(n)))


def _tail_sum(a: float, b: float, n: int) -> float:
    # sum over k > n of the first-passage probabilities with parameters (a, b)
    total = 0.0
    k = n + 1
    while True:
        term = math.exp(_log_first_passage(a, b, k))
        total += term
        if term < 1e-18 * max(total, 1e-300) or term == 0.0:
            return total
        k += 1


def rw_never_negative_limit(p: RwParams) -> float:
    """(alpha - beta) / alpha, the probability that the walk stays below 0 forever."""
    p.require_negative_drift()
    return (p.alpha - p.beta) / p.alpha


def rw_stay_positive_exact(p: RwParams, n: int) -> float:
    """P(S_1 > 0, ..., S_n > 0) as the tail of the first-passage series."""
    p.require_negative_drift()
    return _tail_sum(p.alpha, p.beta, _require_n(n))


def rw_stay_negative_exact(p: RwParams, n: int) -> float:
    """P(S_1 < 0, ..., S_n < 0): the swapped-parameter tail plus the never-nonnegative limit."""
    p.require_negative_drift()
    return _tail_sum(p.beta, p.alpha, _require_n(n)) + rw_never_negative_limit(p)


@njit(cache=True, nogil=True)
def _rw_exit_times(seeds, alpha, beta, horizon, sign):
    """First k <= horizon with sign*S_k < 0, or horizon + 1 if there is none."""
    out = np.empty(seeds.shape[0], dtype=np.int64)
    for r in range(seeds.shape[0]):
        s = seeds[r]
        acc = 0.0
        t = horizon + 1
        for k in range(1, horizon + 1):
            acc += exp_at(s, STREAM_WALK, k, 0, alpha) - exp_at(s, STREAM_WALK + 1, k, 0, beta)
            if sign * acc < 0.0:
                t = k
                break
        out[r] = t
    return out


def rw_exit_times(p: RwParams, horizon: int, replicas: int, seed: int, sign: int = 1, threads: int = 1) -> np.ndarray:
    """Per-replica first time the walk leaves the positive (sign=1) or negative (sign=-1) side."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    seeds = replica_seeds(seed, int(replicas))
    h = int(horizon)
    return map_replicas(lambda s: _rw_exit_times(s, p.alpha, p.beta, h, float(sign)), seeds, threads)


def rw_first_passage_mc(p: RwParams, n_values, replicas: int, seed: int, threads: int = 1) -> dict[int, McSummary]:
    """Direct simulation of the first-passage events for each n."""
    n_values = [_require_n(n) for n in n_values]
    times = rw_exit_times(p, max(n_values), replicas, seed, 1, threads)
    return {n: summarize(times == n) for n in n_values}


@dataclass(frozen=True)
class NeverNegativeCheck:
    limit: float
    estimate: McSummary
    horizon: int
    horizon_bias: float

    @property
    def z_score(self) -> float:
        """Deviation of the estimate from the finite-horizon probability, in SE."""
        return self.estimate.z_score(self.limit + self.horizon_bias)


def rw_never_negative_mc(p: RwParams, horizon: int, replicas: int, seed: int, threads: int = 1) -> NeverNegativeCheck:
    """Long-horizon estimate of the stay-negative probability against its limit.

    The finite horizon overestimates the limit by exactly the stay-negative
    first-passage tail beyond it, which is reported as the bias.
    """
    limit = rw_never_negative_limit(p)
    times = rw_exit_times(p, horizon, replicas, seed, -1, threads)
    bias = rw_stay_negative_exact(p, horizon) - limit
    return NeverNegativeCheck(limit, summarize(times > horizon), int(horizon), bias)


@dataclass(frozen=True)
class StayBoundRecord:
    n: int
    positive: McSummary
    negative: McSummary
    exact_positive: float
    exact_negative: float
    bound_positive: float
    bound_negative: float


def rw_stay_bound_check(p: RwParams, n: int, replicas: int = 10_000, seed: int = 0, threads: int = 1) -> StayBoundRecord:
    """Stay-positive and stay-negative probabilities at n with the bound shapes.

    The bounds carry an unknown absolute constant, so only their shapes
    ``decay^n / sqrt(n)`` (and that plus the limit for the negative side)
    are reported.
    """
    p.require_negative_drift()
    n = _require_n(n)
    pos = rw_exit_times(p, n, replicas, seed, 1, threads)
    neg = rw_exit_times(p, n, replicas, seed, -1, threads)
    shape = p.decay**n / math.sqrt(n)
    return StayBoundRecord(
        n=n,
        positive=summarize(pos > n),
        negative=summarize(neg > n),
        exact_positive=rw_stay_positive_exact(p, n),
        exact_negative=rw_stay_negative_exact(p, n),
        bound_positive=shape,
        bound_negative=shape + rw_never_negative_limit(p),
    )


def stay_positive_decay_rate(p: RwParams, n_lo: int = 200, n_hi: int = 400) -> float:
    """Slope of log P(stay positive up to n) in n between two large n."""
    a = math.log(rw_stay_positive_exact(p, n_lo))
    b = math.log(rw_stay_positive_exact(p, n_hi))
    return (b - a) / (n_hi - n_lo)


# ---------------------------------------------------------------- stationary kernels


@njit(cache=True, nogil=True)
def _stationary_chunk(seeds, rho, m, n):
    """Passage time, exit point and boundary sum up to Z+ for a corner at 0 and target (m, n)."""
    R = seeds.shape[0]
    G = np.empty(R)
    Z = np.empty(R, dtype=np.int64)
    S = np.empty(R)
    w = np.empty((m + 1, n + 1))
    for r in range(R):
        s = seeds[r]
        w[0, 0] = 0.0
        for i in range(1, m + 1):
            w[i, 0] = exp_at(s, STREAM_I, i, 0, 1.0 - rho)
        for j in range(1, n + 1):
            w[0, j] = exp_at(s, STREAM_J, j, 0, rho)
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                w[i, j] = exp_at(s, STREAM_BULK, i, j, 1.0)
        g, z = K.corner_value_label(w)
        acc = 0.0
        for i in range(1, max(z, 0) + 1):
            acc += w[i, 0]
        G[r] = g
        Z[r] = z
        S[r] = acc
    return G, Z, S


def stationary_samples(rho: float, m: int, n: int, replicas: int, seed: int, threads: int = 1):
    """Arrays (G, Z, S) over replicas of the stationary process with independent boundaries.

    Replica r uses the weights of ``StationaryBoundary.independent`` and
    ``WeightField`` with seed ``derive_seed(seed, r)``.
    """
    check_density(rho)
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise ValueError(f"need m, n >= 1, got ({m}, {n})")
    seeds = replica_seeds(seed, int(replicas))
    return map_replicas(lambda s: _stationary_chunk(s, float(rho), m, n), seeds, threads)


@dataclass(frozen=True)
class VarianceCheck:
    rho: float
    m: int
    n: int
    replicas: int
    lhs: float
    rhs: float
    se_lhs: float
    se_rhs: float
    se_diff: float

    @property
    def z_score(self) -> float:
        return (self.lhs - self.rhs) / self.se_diff if self.se_diff > 0 else 0.0


def variance_rhs_constant(rho: float, m: int, n: int) -> float:
    return -m / (1 - rho) ** 2 + n / rho**2


def variance_formula_check(rho: float, m: int, n: int, replicas: int, seed: int, threads: int = 1) -> VarianceCheck:
    """Both sides of the stationary variance identity from the same replicas.

    lhs = Var G(0, (m, n)); rhs = -m/(1-rho)^2 + n/rho^2 + 2/(1-rho) E[S],
    where S sums the e1-boundary weights up to the positive part of the
    exit point.  ``se_diff`` is the standard error of lhs - rhs from the
    paired influence values (G - mean)^2 - 2/(1-rho) S.
    """
    G, _, S = stationary_samples(rho, m, n, replicas, seed, threads)
    R = G.size
    if R < 2:
        raise ValueError("need at least two replicas")
    c = 2.0 / (1.0 - rho)
    dev2 = (G - G.mean()) ** 2
    lhs = float(dev2.sum() / (R - 1))
    rhs = variance_rhs_constant(rho, m, n) + c * float(S.mean())
    root = math.sqrt(R)
    return VarianceCheck(
        rho=float(rho),
        m=int(m),
        n=int(n),
        replicas=R,
        lhs=lhs,
        rhs=rhs,
        se_lhs=float(np.std(dev2, ddof=1) / root),
        se_rhs=float(c * np.std(S, ddof=1) / root),
        se_diff=float(np.std(dev2 - c * S, ddof=1) / root),
    )


def characteristic_target(rho: float, N: int) -> tuple[int, int]:
    xi1, xi2 = rho_to_xi(rho)
    return floor_tol(N * xi1), floor_tol(N * xi2)


@dataclass(frozen=True)
class ExitExperiment:
    rho: float
    sizes: list[int]
    mean_abs: list[McSummary]
    fit: TailFit
    t_grid: list[float]
    tail: dict[int, list[float]]
    samples: dict[int, np.ndarray] = field(repr=False)

    def tail_fit(self, N: int) -> TailFit | None:
        """Log-log fit of the tail at size N over the t values with positive probability."""
        t = np.asarray(self.t_grid)
        p = np.asarray(self.tail[N])
        keep = p > 0
        if keep.sum() < 2:
            return None
        return fit_loglog(t[keep], p[keep])


DEFAULT_T_GRID = tuple(float(t) for t in np.round(np.arange(1.0, 4.0001, 0.25), 2))


def exit_exponent_experiment(
    rho: float, sizes, replicas: int, seed: int, t_grid=DEFAULT_T_GRID, threads: int = 1
) -> ExitExperiment:
    """Exit points of the stationary process to floor(N xi(rho)) for several N.

    Fits log E|Z| against log N and tabulates P(|Z| >= t N^(2/3)).  Each
    size uses its own replica stream (seed offset by the size).
    """
    check_density(rho)
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise ValueError(f"need at least 3 sizes, got {len(sizes)}")
    if sorted(set(sizes)) != sizes:
        raise ValueError("sizes must be strictly increasing")
    means, tail, samples = [], {}, {}
    for N in sizes:
        m, n = characteristic_target(rho, N)
        _, Z, _ = stationary_samples(rho, m, n, replicas, derive_seed(seed, N, salt=0x5A), threads)
        absz = np.abs(Z).astype(float)
        samples[N] = Z
        means.append(summarize(absz))
        scale = power(N, 2.0 / 3.0)
        tail[N] = [float(np.mean(absz >= t * scale)) for t in t_grid]
    fit = fit_loglog(sizes, [s.mean for s in means])
    return ExitExperiment(float(rho), sizes, means, fit, [float(t) for t in t_grid], tail, samples)


# ---------------------------------------------------------------- no-axis divergence


def axis_difference(field, w) -> float:
    """G(0, w) - G(e2, w) for a point w >= e2."""
    w = (int(w[0]), int(w[1]))
    if w[0] < 0 or w[1] < 1:
        raise ValueError(f"need w >= e2, got {w}")
    block = field.block((0, 0), w)
    return float(K.lpp_value(block) - K.lpp_value(block[:, 1:]))


@njit(cache=True, nogil=True)
def _no_axis_chunk(seeds, targets, width, height):
    R = seeds.shape[0]
    nk = targets.shape[0]
    out = np.empty((R, nk))
    w = np.empty((width, height))
    for r in range(R):
        s = seeds[r]
        for i in range(width):
            for j in range(height):
                w[i, j] = exp_at(s, STREAM_BULK, i, j, 1.0)
        g0 = K.lpp_table(w)
        g2 = K.lpp_table(w[:, 1:])
        for k in range(nk):
            best = -np.inf
            for q in range(targets.shape[1]):
                a = targets[k, q, 0]
                b = targets[k, q, 1]
                d = g0[a, b] - g2[a, b - 1]
                if d > best:
                    best = d
            out[r, k] = best
    return out


@dataclass(frozen=True)
class NoAxisResult:
    eta: list[float]
    n_values: list[int]
    medians: list[float]
    sups: np.ndarray = field(repr=False)

    @property
    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.medians, self.medians[1:]))


def no_axis_targets(eta_list, n_values) -> np.ndarray:
    return np.array(
        [[(floor_tol(n * e), n - floor_tol(n * e)) for n in n_values] for e in eta_list], dtype=np.int64
    )


def no_axis_divergence(eta_list, n_values, replicas: int, seed: int, threads: int = 1) -> NoAxisResult:
    """Median over replicas of sup_n [G(0, w(n,k)) - G(e2, w(n,k))] for each direction eta_k.

    ``w(n, k) = (floor(n eta_k), n - floor(n eta_k))``; all directions and
    n share one weight field per replica.
    """
    eta = [float(e) for e in eta_list]
    if not eta or any(not 0 < e < 1 for e in eta):
        raise ValueError("eta values must lie in (0, 1)")
    if any(b <= a for a, b in zip(eta, eta[1:])):
        raise ValueError("eta values must be strictly increasing")
    n_values = [int(n) for n in n_values]
    if not n_values or min(n_values) < 1:
        raise ValueError("n values must be positive")
    targets = no_axis_targets(eta, n_values)
    width = int(targets[:, :, 0].max()) + 1
    height = int(targets[:, :, 1].max()) + 1
    seeds = replica_seeds(seed, int(replicas))
    sups = map_replicas(lambda s: _no_axis_chunk(s, targets, width, height), seeds, threads)
    return NoAxisResult(eta, n_values, [float(np.median(sups[:, k])) for k in range(len(eta))], sups)


# ---------------------------------------------------------------- shape functions


def shape_function(a: float, b: float) -> float:
    """Limit shape (sqrt a + sqrt b)^2 of exponential last-passage percolation."""
    if a < 0 or b < 0:
        raise ValueError(f"shape function needs a, b >= 0, got ({a}, {b})")
    return (math.sqrt(a) + math.sqrt(b)) ** 2


def stationary_shape(eta1: float, lam: float) -> float:
    """Limit of G^lam / n in direction (eta1, 1 - eta1): eta1/(1-lam) + (1-eta1)/lam."""
    check_density(lam, "lam")
    return eta1 / (1 - lam) + (1 - eta1) / lam


def forced_step_shape(eta1: float, lam: float, grid: int = 20_001) -> tuple[float, float]:
    """sup over s in [0, 1-eta1] of s/lam + g(eta1, 1-eta1-s), and the maximizing s.

    Evaluated on a grid and refined with the closed-form stationary point.
    """
    check_density(lam, "lam")
    top = 1.0 - eta1
    s = np.linspace(0.0, top, grid)
    vals = s / lam + (np.sqrt(eta1) + np.sqrt(top - s)) ** 2
    k = int(np.argmax(vals))
    best, arg = float(vals[k]), float(s[k])
    # d/ds: 1/lam - 1 - sqrt(eta1 / (top - s)) = 0
    if lam < 1:
        ratio = (1 / lam - 1) ** 2
        s_star = top - eta1 / ratio
        if 0 <= s_star <= top:
            v = s_star / lam + shape_function(eta1, top - s_star)
            if v > best:
                best, arg = v, s_star
    return best, arg


def variational_gap(eta1: float, lam: float) -> float:
    """Stationary shape minus g(eta1, 1-eta1); positive exactly when lam != rho(eta)."""
    return stationary_shape(eta1, lam) - shape_function(eta1, 1 - eta1)


def direction_rho(eta1: float) -> float:
    """Characteristic density of the direction (eta1, 1 - eta1)."""
    return xi_to_rho((eta1, 1 - eta1))
