"""Acceptance gate: one test per criterion, each printing a PASS or FAIL line.

The lines are collected in ``conftest.ACCEPTANCE_LINES`` and printed in the
pytest terminal summary.  Tolerances, sizes and replica counts are the
contract values; none is relaxed here.
"""

import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from cornergrowth.analysis import (
    RwParams,
    fit_loglog,
    rw_first_passage_exact,
    rw_first_passage_mc,
    rw_never_negative_mc,
    variance_formula_check,
    variance_rhs_constant,
)
from cornergrowth.events import detect_W, detect_W_exhaustive, sandwich_event_check
from cornergrowth.experiments import csv_text, resolve_config, run_experiment
from cornergrowth.lpp import brute_force_lpp, lpp
from cornergrowth.stationary import rho_to_xi
from cornergrowth.suite import property_suite
from cornergrowth.weights import ArrayField, Seed, WeightField, derive_seed

pytestmark = pytest.mark.slow


def report(k: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_dp_matches_path_enumeration():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        a = int(rng.integers(0, 9))
        b = int(rng.integers(0, 9 - a))
        u = (int(rng.integers(-20, 20)), int(rng.integers(-20, 20)))
        y = (u[0] + a, u[1] + b)
        f = ArrayField(rng.exponential(size=(a + 1, b + 1)), origin=u)
        g, h = lpp(f, u, y), brute_force_lpp(f, u, y)
        worst = max(worst, abs(g - h) / abs(h))
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-12 and elapsed < 5, f"max relative gap {worst:.2e} on 1000 rectangles, {elapsed:.2f} s")


def test_criterion_2_deterministic_identities():
    t0 = time.perf_counter()
    tallies = property_suite(10_000, seed=2)
    elapsed = time.perf_counter() - t0
    bad = {t.name: t.violations for t in tallies}
    ok = all(v == 0 for v in bad.values()) and elapsed < 60
    report(2, ok, f"violations {bad} over 10^4 instances each, {elapsed:.1f} s")


def test_criterion_3_queue_fixed_point():
    t0 = time.perf_counter()
    res = run_experiment(resolve_config({"experiment": "queue-fixedpoint", "seed": 3}))
    elapsed = time.perf_counter() - t0
    z = res.summary["z_scores"]
    ok = res.summary["within_4se"] and elapsed < 30
    worst = max(z, key=lambda k: abs(z[k]))
    report(3, ok, f"largest |z| = {abs(z[worst]):.2f} ({worst}), {elapsed:.1f} s")


def test_criterion_4_ballot_formula_and_never_negative_limit():
    t0 = time.perf_counter()
    p = RwParams(2.0, 1.0)
    est = rw_first_passage_mc(p, [1, 2, 3, 5, 8], 100_000, seed=4)
    zs = {n: s.z_score(rw_first_passage_exact(p, n)) for n, s in est.items()}
    exact3 = rw_first_passage_exact(p, 3)
    nn = rw_never_negative_mc(p, horizon=10_000, replicas=100_000, seed=5)
    elapsed = time.perf_counter() - t0
    ok = (
        all(abs(z) < 4 for z in zs.values())
        and math.isclose(exact3, 16 / 243, rel_tol=1e-12)
        and abs(nn.z_score) < 4
        and elapsed < 60
    )
    report(
        4,
        ok,
        f"max |z| over n = {max(abs(z) for z in zs.values()):.2f}, P(B_3) = {exact3:.12f}, "
        f"never-negative {nn.estimate.mean:.4f} vs {nn.limit} (z = {nn.z_score:.2f}), {elapsed:.1f} s",
    )


def test_criterion_5_variance_identity():
    t0 = time.perf_counter()
    # closed form at (1/2, 1, 1): the constant part vanishes and 4 E[I; I > J] = 6
    exact_rhs = variance_rhs_constant(0.5, 1, 1) + 4 * 1.5
    small = variance_formula_check(0.5, 1, 1, 100_000, seed=51)
    xi = rho_to_xi(0.3)
    m, n = math.floor(40 * xi[0]), math.floor(40 * xi[1])
    checks = [small, variance_formula_check(0.5, 25, 25, 100_000, seed=52),
              variance_formula_check(0.3, m, n, 100_000, seed=53)]
    elapsed = time.perf_counter() - t0
    z6 = ((small.lhs - 6) / small.se_lhs, (small.rhs - 6) / small.se_rhs)
    ok = (
        exact_rhs == 6.0
        and all(abs(z) < 4 for z in z6)
        and all(abs(c.z_score) < 4 for c in checks)
        and elapsed < 600
    )
    zs = ", ".join(f"({c.rho:g},{c.m},{c.n}) z = {c.z_score:.2f}" for c in checks)
    report(5, ok, f"(1/2,1,1) against 6: z = {z6[0]:.2f}, {z6[1]:.2f}; lhs-rhs: {zs}; {elapsed:.1f} s")


def test_criterion_6_wandering_exponent():
    t0 = time.perf_counter()
    res = run_experiment(resolve_config({"experiment": "exit-exponent", "seed": 6}))
    elapsed = time.perf_counter() - t0
    s = res.summary
    tail = [r["estimate"] for r in res.rows if r["quantity"] == "tail" and r["N"] == 256]
    t = [r["t"] for r in res.rows if r["quantity"] == "tail" and r["N"] == 256]
    keep = [k for k, q in enumerate(tail) if q > 0]
    fit = fit_loglog([t[k] for k in keep], [tail[k] for k in keep])
    decreasing = all(b <= a for a, b in zip(tail, tail[1:]))
    ok = 0.55 <= s["slope"] <= 0.80 and decreasing and fit.slope <= -1.5 and elapsed < 900
    report(
        6,
        ok,
        f"E|Z| slope {s['slope']:.3f}; N=256 tail non-increasing: {decreasing}, "
        f"tail slope {fit.slope:.2f} over t in [{t[keep[0]]:g}, {t[keep[-1]]:g}]; {elapsed:.1f} s",
    )


def test_criterion_7_cylinder_miss_probability():
    t0 = time.perf_counter()
    res = run_experiment(resolve_config({"experiment": "cylinder", "seed": 7}))
    elapsed = time.perf_counter() - t0
    s = res.summary
    slope = s["slope"]
    ok = s["strictly_decreasing"] and slope is not None and slope <= -1.5 and elapsed < 900
    probs = ", ".join(f"{q:.4f}" for q in s["p_miss"])
    report(7, ok, f"P(miss) over r = 1,2,4,8: [{probs}], slope {slope}; {elapsed:.1f} s")


def test_criterion_8_w_event():
    t0 = time.perf_counter()
    agree = 0
    for k in range(100):
        N = 4 + k % 5
        f = WeightField(Seed(derive_seed(8, k)))
        agree += detect_W(f, N, 0.25).occurred == detect_W_exhaustive(f, N, 0.25).occurred
    res = run_experiment(resolve_config({"experiment": "w-event", "seed": 8}))
    elapsed = time.perf_counter() - t0
    s = res.summary
    ok = agree == 100 and s["non_increasing_within_ci"] and elapsed < 1800
    probs = ", ".join(f"{q:.4f}" for q in s["probabilities"])
    report(8, ok, f"oracle agreement {agree}/100; P(W) at N = 32,64,128: [{probs}]; {elapsed:.1f} s")


def test_criterion_9_sandwich_implication():
    N = 64
    r, d = N ** (2 / 15), (1.0, N ** (1 / 8))
    t0 = time.perf_counter()
    qualifying = violations = sampled = 0
    feasible = None
    while qualifying < 100 and sampled < 2000:
        res = sandwich_event_check(WeightField(Seed(derive_seed(9, sampled))), (-N, -N), d, r, N)
        sampled += 1
        feasible = res.feasible
        if res.occurred_a:
            qualifying += 1
            violations += (not res.held_a) + (res.occurred_b and not res.held_b)
    elapsed = time.perf_counter() - t0
    ok = qualifying >= 100 and violations == 0 and elapsed < 600
    report(
        9,
        ok,
        f"{violations} violations in {qualifying} qualifying of {sampled} sampled instances "
        f"(parameter feasibility flag {feasible}); {elapsed:.1f} s",
    )


def test_criterion_10_no_axis_divergence():
    t0 = time.perf_counter()
    res = run_experiment(resolve_config({"experiment": "no-axis", "seed": 10}))
    elapsed = time.perf_counter() - t0
    med = res.summary["medians"]
    ok = res.summary["strictly_increasing"] and elapsed < 600
    report(10, ok, f"medians over eta1 = 0.6, 0.75, 0.9: {[round(m, 4) for m in med]}; {elapsed:.1f} s")


REPRO = {
    "w-event": {"sizes": "16,24", "replicas": "40"},
    "exit-exponent": {"sizes": "16,32,64", "replicas": "200"},
    "variance-check": {"m": "10", "n": "10", "replicas": "2000"},
    "queue-fixedpoint": {"n": "10000"},
    "queue-identity": {"replicas": "100"},
    "cylinder": {"N": "64", "replicas": "200"},
    "block-connection": {"N": "32", "replicas": "100"},
    "rw-exact": {"n": "1,2,3,5,8", "mc_replicas": "2000"},
    "no-axis": {"n_max": "64", "replicas": "50"},
    "property-suite": {"instances": "20"},
}


def test_criterion_11_reproducible_csv():
    t0 = time.perf_counter()
    identical = []
    for name, params in REPRO.items():
        texts = {
            csv_text(run_experiment(resolve_config({"experiment": name, "seed": 11, "threads": th, **params})))
            for th in (1, 1, 2, 4)
        }
        identical.append(len(texts) == 1)
    elapsed = time.perf_counter() - t0
    report(
        11,
        all(identical),
        f"{sum(identical)}/{len(identical)} experiments byte-identical across reruns and 1, 2, 4 threads; {elapsed:.1f} s",
    )
