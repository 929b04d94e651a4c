"""The ten acceptance criteria, at their stated tolerances.

Each test prints one PASS/FAIL line (also collected in the terminal summary).
Criterion 9 is known to miss its tolerances; its two halves are strict xfails
that still run the full check and report the numbers.
"""

import math
import time

import numpy as np
import pytest

from qve import arith, eisenstein, euler_products as ep, maass, specfun, variance as qv

EVEN = ("even1", "even2")
D_POINTS = [(1, 1, 1), (1, 1.2, 1.5), (1.5, 0.8, 1 + 0.7j), (1 + 0.5j, 1, 1.3), (1.2 + 0.3j, 1 + 0.5j, 1)]


def test_criterion_01_unfolding(record):
    worst, slowest = 0.0, 0.0
    for label in EVEN:
        f = maass.load_bundled(label)
        for t in (1.0, 3.0, 5.0):
            t0 = time.perf_counter()
            d = eisenstein.mu_direct(f, t)
            slowest = max(slowest, time.perf_counter() - t0)
            c = eisenstein.mu_closed(f, t)
            worst = max(worst, abs(d - c) / abs(c))
    ok = worst <= 1e-3 and slowest <= 300
    record(1, ok, f"mu_direct vs mu_closed, worst rel err {worst:.2e} (tol 1e-3), slowest point {slowest:.1f}s")
    assert ok


def test_criterion_02_factorisation(record, even1, even2):
    worst = {"same": 0.0, "mixed": 0.0}
    slowest = 0.0
    for key, (phi, psi) in (("same", (even1, even1)), ("mixed", (even1, even2))):
        for pt in D_POINTS:
            t0 = time.perf_counter()
            prm = ep.EulerParams(*pt)
            D = ep.D_bruteforce(phi, psi, prm).value
            F = ep.D_factorized(phi, psi, prm)
            slowest = max(slowest, time.perf_counter() - t0)
            worst[key] = max(worst[key], abs(D - F) / abs(F))
    ok = worst["same"] <= 1e-6 and worst["mixed"] <= 1e-5 and slowest <= 60
    record(
        2, ok,
        f"brute-force D vs L H / zeta at {len(D_POINTS)} points: phi=psi {worst['same']:.2e} (tol 1e-6), "
        f"phi!=psi {worst['mixed']:.2e} (tol 1e-5), slowest {slowest:.1f}s",
    )
    assert ok


def test_criterion_03_a_vs_A(record, even1, even2):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    primes = arith.primes_upto(100)
    for _ in range(20):
        prm = ep.EulerParams(*(rng.uniform(0, 1, 3) + 1j * rng.uniform(-2, 2, 3)))
        for p in primes:
            a = ep.local_factor(even1, even2, int(p), prm, form="a")
            b = ep.local_factor(even1, even2, int(p), prm, form="A")
            worst = max(worst, abs(a - b) / abs(b))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 1
    record(3, ok, f"a-form vs A-form, 20 triples, p <= 100: worst {worst:.1e} (tol 1e-12) in {dt:.2f}s")
    assert ok


def test_criterion_04_constant_assembly(record):
    # a fresh load so that nothing (H_phi, L-values) is cached
    f = maass.ingest(maass.data_dir() / "even1.json")
    t0 = time.perf_counter()
    rep = qv.constant_assembly(f)
    dt = time.perf_counter() - t0
    ok = rep.rel_err <= 1e-10 and dt < 1
    record(
        4, ok,
        f"C L^2 V = {rep.computed.real:.10g} vs chain {rep.reference.real:.10g}, rel err {rep.rel_err:.1e} "
        f"(tol 1e-10) in {dt:.2f}s; divisor 4 in the Gamma argument would give {rep.metadata['divisor4_variant']:.3g}",
    )
    assert ok


@pytest.mark.slow
def test_criterion_05_second_moment(record):
    parts, ok, total = [], True, 0.0
    for label in EVEN:
        lad = qv.second_moment_ladder(maass.load_bundled(label), (100, 200, 400))
        total += lad.trend.runtime_seconds
        ok &= lad.trend.passed
        parts.append(f"{label} slope {lad.trend.computed.real:.4f} vs {lad.trend.reference.real:.4f} "
                     f"({lad.trend.rel_err:.1%})")
    ok &= total <= 1200
    record(5, ok, "; ".join(parts) + f" (tol 25%), {total:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_06_weighted_variance(record):
    parts, ok, total = [], True, 0.0
    for label in EVEN:
        f = maass.load_bundled(label)
        mid = qv.weighted_variance(f, qv.GridSpec(200, 0.02))
        lad = qv.weighted_variance_ladder(f, (125, 250, 500))
        r = lad.trend.metadata["ratios"]
        total += mid.runtime_seconds + lad.trend.runtime_seconds
        ok &= 0.5 <= mid.metadata["ratio"] <= 1.5 and abs(r[-1] - 1) < abs(r[0] - 1)
        parts.append(f"{label} ratio {mid.metadata['ratio']:.3f} at T=200, {r[0]:.3f} -> {r[-1]:.3f} (T=125 -> 500)")
    ok &= total <= 1800
    record(6, ok, "; ".join(parts) + f", {total:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_07_off_diagonal(record, even1, even2):
    lad = qv.qe_ladder(even1, even2, (100, 200, 400))
    vals = lad.trend.metadata["values"]
    ok = vals[1] <= 0.3 and vals[0] > vals[1] > vals[2]
    record(7, ok, "normalized |Q(even1, even2)| at T=100/200/400: " + ", ".join(f"{v:.3f}" for v in vals)
           + " (<= 0.3 at T=200, decreasing)")
    assert ok


@pytest.mark.slow
def test_criterion_08_expected_value(record, odd1):
    parts, ok = [], True
    for label in EVEN:
        lad = qv.expected_value_ladder(maass.load_bundled(label), (100, 200, 400))
        sc = lad.trend.metadata["scaled"]
        ok &= lad.trend.passed
        parts.append(f"{label} |E| sqrt(T) = " + "/".join(f"{v:.3f}" for v in sc))
    odd = qv.expected_value(odd1, qv.GridSpec(100)).computed
    odd_mu = eisenstein.mu_closed(odd1, np.linspace(10, 500, 50))
    ok &= odd == 0 and bool(np.all(odd_mu == 0))
    record(8, ok, "; ".join(parts) + f" (20% slack); odd form gives {abs(odd):g}")
    assert ok


@pytest.mark.xfail(strict=True, reason="smoothed 1/zeta^2 sum misses 0.05 at (50, 50) and is not monotone in x")
def test_criterion_09a_inverse_zeta_squared(record):
    target = 1 / complex(specfun.zeta(1 + 100j)) ** 2
    errs = {x: abs(arith.afe_inv_zeta_sq(50.0, x) - target) for x in (20, 50, 200, 1000)}
    ok = errs[50] <= 0.05 and errs[20] > errs[50] > errs[200] >= errs[1000]
    record("9a", ok, "1/zeta(1+2it)^2 smoothed sum at t=50, error by x: "
           + ", ".join(f"x={x}: {e:.3f}" for x, e in errs.items()) + " (tol 0.05 at x=50, improving)")
    assert ok


@pytest.mark.xfail(strict=True, reason="large-t weights: 1.8e-2 at t=20 and table truncation at t=80")
def test_criterion_09b_paired_afe(record, even1):
    disc = []
    for t in (20.0, 40.0, 80.0):
        ref = abs(maass.L_critical(even1, 2 * t)) ** 2
        disc.append(abs(maass.afe_pair(even1, even1, t) - ref) / ref)
    ok = max(disc) <= 1e-2 and disc[0] > disc[1] > disc[2]
    record("9b", ok, "paired AFE vs |L(1/2+2it)|^2 at t=20/40/80: " + ", ".join(f"{d:.1e}" for d in disc)
           + " (tol 1e-2, decreasing)")
    assert ok


def test_criterion_10_floor(record):
    rng = np.random.default_rng(10)
    s = rng.uniform(0.02, 0.98, 200) + 1j * rng.uniform(-50, 50, 200)
    xi_err = float(np.max(np.abs(np.expm1(specfun.log_xi_direct(s) - specfun.log_xi_direct(1 - s)))))
    env = 0.0
    for rho in (0.5, 1.0, 2.0, 5.0):
        for z in (50.0, 80.0, 150.0, 400.0):
            nu = 1j * rho
            d = abs(specfun.bessel_jplus(nu, z) - specfun.bessel_jplus_asymptotic(nu, z))
            env = max(env, d / (10 * (1 + abs(nu) ** 6) / z**3))
    hecke = max(maass.hecke_residual(maass.load_bundled(lab).lam)[0] for lab in maass.BUNDLED)
    ok = xi_err <= 1e-9 and env <= 1 and hecke <= 1e-8
    record(10, ok, f"xi symmetry {xi_err:.1e} (tol 1e-9); J+ error / envelope {env:.3f} (<= 1); "
           f"Hecke residual {hecke:.1e} (tol 1e-8)")
    assert ok
