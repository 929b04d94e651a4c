import cmath
import json
import math

import numpy as np
import pytest

from qve import arith, maass, specfun
from qve import euler_products as ep
from qve.euler_products import EulerParams
from qve.errors import ConvergenceRegionError, DomainError, TailTooLargeError

ALPHA = arith.alpha_sieve(2**12).values


def _satake(form, p):
    """lambda(p^k) from the Satake pair alpha + beta = lambda(p), alpha beta = 1."""
    lp = complex(form.lam[p])
    a = (lp + cmath.sqrt(lp * lp - 4)) / 2
    b = 1 / a

    def lam(k):
        if abs(a - b) < 1e-12:
            return (k + 1) * a**k
        return (a ** (k + 1) - b ** (k + 1)) / (a - b)

    return lam


def _local_D_oracle(phi, psi, p, s, s1, s2, depth=40):
    """p-part of the gcd-reduced double series of D, divided by the local Rankin-Selberg factor."""
    lf, lg = _satake(phi, p), _satake(psi, p)
    X = p ** (-(1 + 2 * s))
    ea, eb, eY = 1.5 + s + s1, 1.5 + s + s2, 2 + s1 + s2

    def al(k):
        return ALPHA[2**k]  # alpha(p^k) does not depend on p

    total = 0j
    for e in range(4):
        for i in range(4):
            for m in range(4):
                if min(i, m) > 0:
                    continue
                w = al(i + e) * al(m + e)
                if w == 0:
                    continue
                inner = sum(lf(m + j) * lg(i + j) * X**j for j in range(depth))
                total += w * p ** (-(i * ea + m * eb + e * eY)) * inner
    rs = sum(lf(j) * lg(j) * X**j for j in range(depth))
    return total / rs


POINTS = [(0.3, 0.2, 0.1), (1.0, 1.0, 1.0), (0.2 + 0.4j, 0.1, 0.3 - 0.2j)]


# ---------------------------------------------------------------------------
# local pieces
# ---------------------------------------------------------------------------

def test_prime_power_coeffs_match_table_and_recursion(even1):
    pp = ep.prime_power_coeffs(even1, 3, 14)
    lam = _satake(even1, 3)
    for k in range(15):
        assert pp[k] == pytest.approx(lam(k).real, abs=1e-8)
    assert pp[10] == even1.lam[3**10]


@pytest.mark.parametrize("shift", [0, 1, 2])
def test_local_j_sum_against_satake_series(even1, even2, shift):
    lf, lg = _satake(even1, 5), _satake(even2, 5)
    s = 0.2 + 0.3j
    X = 5 ** (-(1 + 2 * s))
    ref = sum(lf(j) * lg(j + shift) * X**j for j in range(80))
    assert ep.local_j_sum(even1, even2, 5, shift, s) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("p", [2, 3, 101, 997])
def test_quartic_inverts_diagonal_j_sum(even1, odd1, p):
    s = 0.3
    assert ep.local_j_sum(even1, odd1, p, 0, s) * ep._quartic(even1, odd1, p, s) == pytest.approx(1.0, abs=1e-10)


def test_local_j_sum_region(even1):
    with pytest.raises(ConvergenceRegionError):
        ep.local_j_sum(even1, even1, 2, 0, -0.45)
    with pytest.raises(DomainError):
        ep.local_j_sum(even1, even1, 2, 3, 0.0)


@pytest.mark.parametrize("pt", POINTS)
@pytest.mark.parametrize("p", [2, 3, 7, 101])
def test_local_factor_against_double_series(even1, even2, pt, p):
    params = EulerParams(*pt)
    ref = _local_D_oracle(even1, even2, p, params.s, params.s1, params.s2)
    assert ep.local_factor(even1, even2, p, params) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("pt", POINTS)
def test_a_and_A_forms_agree(even1, odd1, pt):
    params = EulerParams(*pt)
    for p in (2, 3, 5, 499):
        a = ep.local_factor(even1, odd1, p, params, "a")
        A = ep.local_factor(even1, odd1, p, params, "A")
        assert a == pytest.approx(A, rel=1e-13)


@pytest.mark.parametrize("pt", POINTS + [(0, 0, 0)])
def test_vectorised_local_factors(even1, odd1, pt):
    params = EulerParams(*pt)
    primes = arith.primes_upto(3000)
    vec = ep.local_factors(even1, odd1, primes, params)
    ref = np.array([ep.local_factor(even1, odd1, int(p), params) for p in primes])
    assert np.max(np.abs(vec - ref) / np.abs(ref)) < 1e-14


def test_a_factors_large_p_limit(even1, even2):
    params = EulerParams(0.3, 0.2, 0.1)
    p = 99991
    assert ep.a_factor(even1, even2, p, 1, params) == pytest.approx(-2 * even2.lam[p], abs=20 / p)
    assert ep.a_factor(even1, even2, p, 2, params) == pytest.approx(even2.lam[p] ** 2 - 1, abs=20 / p)


def test_factor_argument_checks(even1):
    params = EulerParams()
    with pytest.raises(DomainError):
        ep.a_factor(even1, even1, 2, 3, params)
    with pytest.raises(DomainError):
        ep.local_factor(even1, even1, 2, params, form="b")


@pytest.mark.parametrize(
    "pt", [(-0.5, 0, 0), (0, -0.6, -0.6), (-0.2, -0.3, 0.0)]
)
def test_params_outside_region(pt):
    with pytest.raises(ConvergenceRegionError):
        EulerParams(*pt)


def test_params_coerce_to_complex():
    p = EulerParams(1, 0.5, 2)
    assert isinstance(p.s, complex) and p.Y == 4.5


# ---------------------------------------------------------------------------
# H and C(phi)
# ---------------------------------------------------------------------------

def test_H_real_on_real_diagonal(even1):
    v = ep.H(even1, even1, EulerParams(0.1, 0.2, 0.3))
    assert abs(v.imag) < 1e-14 and v.real > 0


def test_H_swap_symmetry(even1, even2):
    a = ep.H(even1, even2, EulerParams(0.3, 0.2, 0.1))
    b = ep.H(even2, even1, EulerParams(0.3, 0.1, 0.2))
    assert a == pytest.approx(b, rel=1e-13)


def test_H_approaches_one_far_right(even1, even2):
    v = ep.H(even1, even2, EulerParams(10, 10, 10, p_max=100))
    assert v == pytest.approx(1.0, abs=1e-6)


def _doc_head():
    doc = json.loads((maass.data_dir() / "even1.json").read_text())
    doc.pop("coefficients")
    return doc


def test_H_p_max_beyond_table():
    small = maass.from_json(
        {**_doc_head(), "coefficients": [str(x) for x in maass.load_bundled("even1").lam[1:500]]}, check=False
    )
    with pytest.raises(DomainError):
        ep.H(small, small, EulerParams(p_max=1000))


def test_H_doubling_within_reported_tail(even1):
    a = ep.H(even1, even1, EulerParams(p_max=25_000), full=True)
    b = ep.H(even1, even1, EulerParams(p_max=50_000), full=True)
    assert abs(a.corrected - b.corrected) <= 3 * a.tail_rms
    # the uncorrected product moves by the alpha-density tail
    assert abs(a.value - b.value) > abs(a.corrected - b.corrected)


def test_H_phi_frozen_value(even1):
    h = ep.H_phi(even1)
    assert h.p_max == even1.N
    assert h.corrected.real == pytest.approx(0.51279698, abs=5 * h.tail_rms)
    assert h.tail_rms < 1e-5


def test_C_phi_distinguishes_forms(even1, even2):
    c1, c2 = ep.C_phi(even1), ep.C_phi(even2)
    assert c1 == pytest.approx(12 * math.log(2) * ep.H_phi(even1).corrected.real, rel=1e-15)
    assert c1 > 0 and c2 > 0
    assert abs(c1 - c2) > 1


# ---------------------------------------------------------------------------
# brute force against factorisation
# ---------------------------------------------------------------------------

def test_D_bruteforce_degenerate_single_term(even1, even2):
    # K = d_max = 1 leaves sum_n lambda_phi(n) lambda_psi(n) n^{-1-2s}
    r = ep.D_bruteforce(even1, even2, EulerParams(1, 1, 1), K=1, d_max=1)
    ref = maass.rankin_selberg_L(even1, even2, 1) / specfun.zeta(6.0)
    assert r.value == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("pt", [(1, 1, 1), (1, 1.2, 1.5)])
def test_D_bruteforce_matches_factorized(even1, even2, pt):
    params = EulerParams(*pt)
    r = ep.D_bruteforce(even1, even2, params)
    f = ep.D_factorized(even1, even2, params)
    assert abs(r.value - f) <= max(r.tail_estimate, 1e-9)
    assert abs(r.value - f) <= 1e-6 * abs(f)


def test_D_bruteforce_tail_guard(even1):
    with pytest.raises(TailTooLargeError):
        ep.D_bruteforce(even1, even1, EulerParams(0.5, 0.5, 0.5), tol=1e-7)


def test_D_bruteforce_region(even1):
    with pytest.raises(ConvergenceRegionError):
        ep.D_bruteforce(even1, even1, EulerParams(0.05, 0.0, 0.0))


def test_D_factorized_p_max_override(even1, even2):
    params = EulerParams(1, 1, 1)
    a = ep.D_factorized(even1, even2, params, p_max=500)
    b = ep.D_factorized(even1, even2, params, p_max=1000)
    assert abs(a - b) < 1e-6 * abs(b)
    assert not np.isnan(a)
