"""Randomized checks of the deterministic last-passage and queueing identities.

Each check draws one random instance from a numpy generator and returns
True when the identity holds.  Instances are small so that ten thousand of
each run in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lpp import check_crossing, check_monotone_increments, lpp
from .queueing import BiSequence, WindowTooShort, queue_identity_check
from .stationary import (
    StationaryBoundary,
    bulk_exit_point,
    induced_boundary_process,
    induced_exit_point,
    stationary_table,
)
from .weights import ArrayField, Seed

REL = 1e-12


def _field(rng, shape, origin=(0, 0)):
    return ArrayField(rng.exponential(size=shape), origin=origin)


def check_crossing_instance(rng) -> bool:
    x = tuple(int(c) for c in rng.integers(1, 7, size=2))
    F = _field(rng, (x[0] + 2, x[1] + 2))
    return all(check_crossing(F, (0, 0), x))


def check_monotone_instance(rng) -> bool:
    a, b = (int(c) for c in rng.integers(1, 9, size=2))
    w = rng.exponential(size=(a + 1, b + 1))
    wt = w.copy()
    wt[1:, 0] *= rng.uniform(size=a)
    wt[0, 1:] += rng.exponential(size=b)
    return check_monotone_increments(ArrayField(w), ArrayField(wt), (0, 0), (a, b))


def check_decomposition_instance(rng) -> bool:
    y = tuple(int(c) for c in rng.integers(0, 9, size=2))
    v = (int(rng.integers(0, y[0] + 1)), int(rng.integers(0, y[1] + 1)))
    F = _field(rng, (y[0] + 1, y[1] + 1))
    total = lpp(F, (0, 0), y)
    split = lpp(F, (0, 0), v) + induced_boundary_process(F, (0, 0), v, y)
    return abs(total - split) <= REL * max(1.0, total)


def check_shift_instance(rng) -> bool:
    p = (int(rng.integers(2, 10)), int(rng.integers(1, 10)))
    k = int(rng.integers(1, p[0]))
    F = _field(rng, (p[0] + 1, p[1] + 1))
    z = bulk_exit_point(F, (0, 0), p)
    zk = induced_exit_point(F, (0, 0), (k, 0), p)
    if z > k and zk != z - k:
        return False
    if zk > 0 and z != k + zk:
        return False
    return True


def check_queue_identity_instance(rng, window: int = 20, margin: int = 400) -> bool:
    rate_s = 1.0
    rate_a = float(rng.uniform(0.5, 0.8))
    rate_b = float(rng.uniform(0.2, 0.9 * rate_a))
    for _ in range(4):
        lo = -margin
        b = BiSequence(rng.exponential(1 / rate_b, size=margin + window), lo)
        a = BiSequence(rng.exponential(1 / rate_a, size=margin + window), lo)
        s = BiSequence(rng.exponential(1 / rate_s, size=margin + window), lo)
        try:
            return queue_identity_check(b, a, s, (window // 2, window - 1))
        except WindowTooShort:
            margin *= 2
    raise WindowTooShort("queue identity instance never certified")


def check_burke_min_instance(rng) -> bool:
    m, n = (int(c) for c in rng.integers(1, 9, size=2))
    rho = float(rng.uniform(0.05, 0.95))
    seed = Seed(int(rng.integers(0, 2**63)))
    bd = StationaryBoundary.independent((0, 0), rho, m, n, seed)
    F = _field(rng, (m + 1, n + 1))
    g = stationary_table(F, bd, (m, n))
    w = F.block((1, 1), (m, n))
    I = g[1:, 1:] - g[:-1, 1:]
    J = g[1:, 1:] - g[1:, :-1]
    return bool(np.all(np.abs(np.minimum(I, J) - w) <= REL * max(1.0, float(g[-1, -1]))))


CHECKS = {
    "crossing": check_crossing_instance,
    "increment-monotonicity": check_monotone_instance,
    "decomposition": check_decomposition_instance,
    "shift": check_shift_instance,
    "queue-identity": check_queue_identity_instance,
    "burke-min": check_burke_min_instance,
}


@dataclass(frozen=True)
class CheckTally:
    name: str
    instances: int
    violations: int
    first_failure: int | None


def run_check(name: str, instances: int, seed: int) -> CheckTally:
    """Run one check on ``instances`` independent instances; instance k uses generator (seed, k)."""
    fn = CHECKS[name]
    bad, first = 0, None
    salt = list(CHECKS).index(name)
    for k in range(int(instances)):
        rng = np.random.default_rng([int(seed), salt, k])
        if not fn(rng):
            bad += 1
            first = k if first is None else first
    return CheckTally(name, int(instances), bad, first)


def property_suite(instances: int = 10_000, seed: int = 0, names=None) -> list[CheckTally]:
    names = list(CHECKS) if names is None else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}")
    return [run_check(n, instances, seed) for n in names]
