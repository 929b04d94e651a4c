"""Local densities of the diagonal Dirichlet series D_{phi,psi}(s, s1, s2).

D = L(1+2s, phi x psi) / zeta(2+4s) * H(s, s1, s2), where H is an Euler
product whose local factors involve the j-sums
sum_j lambda_phi(p^j) lambda_psi(p^{j+shift}) p^{-j(1+2s)}.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from . import specfun
from .arith import alpha_sieve, moebius_sieve, primes_upto
from .errors import ConvergenceRegionError, DomainError, TailTooLargeError
from .maass import MaassForm, rankin_selberg_L

LOG2 = math.log(2)


@dataclass(frozen=True)
class EulerParams:
    s: complex = 0j
    s1: complex = 0j
    s2: complex = 0j
    p_max: int = 1000
    j_max: int = 400

    def __post_init__(self):
        for name in ("s", "s1", "s2"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        bound = -25 / 64
        ok = (
            (self.s1 + self.s2).real > -1
            and self.s.real > bound
            and (self.s + self.s1).real > bound
            and (self.s + self.s2).real > bound
        )
        if not ok:
            raise ConvergenceRegionError(f"parameters outside the convergence region of H: {self}")

    @property
    def Y(self) -> complex:
        return 2 + self.s1 + self.s2


# ---------------------------------------------------------------------------
# local pieces
# ---------------------------------------------------------------------------

def prime_power_coeffs(form: MaassForm, p: int, kmax: int) -> np.ndarray:
    """lambda(p^k) for k <= kmax: table values while p^k <= N, Hecke recursion beyond."""
    out = np.empty(kmax + 1)
    out[0] = 1.0
    pk = 1
    for k in range(1, kmax + 1):
        pk *= p
        if pk <= form.N:
            out[k] = form.lam[pk]
        else:
            lp = form.lam[p] if p <= form.N else _missing(p, form)
            out[k] = lp * out[k - 1] - out[k - 2]
    return out


def _missing(p, form):
    raise DomainError(f"lambda({p}) is beyond the coefficient table of {form.label} (N={form.N})")


def local_j_sum(phi: MaassForm, psi: MaassForm, p: int, shift: int, s, j_max: int = 400) -> complex:
    """sum_{j>=0} lambda_phi(p^j) lambda_psi(p^{j+shift}) p^{-j(1+2s)}, truncated once terms fall below 1e-17."""
    s = complex(s)
    if shift not in (0, 1, 2):
        raise DomainError("shift must be 0, 1 or 2")
    if (1 + 2 * s).real <= 14 / 64:
        raise ConvergenceRegionError("local_j_sum needs Re(1+2s) > 14/64")
    decay = (1 + 2 * s).real * math.log(p)
    # polynomially bounded coefficients: stop when (j+1)(j+3) e^{-j decay} < 1e-17
    J = 1
    while J < j_max and math.log((J + 1) * (J + 3)) - J * decay > math.log(1e-17):
        J += 1
    lp = prime_power_coeffs(phi, p, J)
    lq = prime_power_coeffs(psi, p, J + shift)
    j = np.arange(J + 1)
    x = np.exp(-j * (1 + 2 * s) * math.log(p))
    return complex(np.sum(lp * lq[shift:] * x))


def _quartic(phi, psi, p, s):
    X = p ** (-(1 + 2 * s))
    lp, lq = phi.lam[p], psi.lam[p]
    lp2 = prime_power_coeffs(phi, p, 2)[2]
    lq2 = prime_power_coeffs(psi, p, 2)[2]
    return (1 - lp * lq * X + (lp2 + lq2) * X**2 - lp * lq * X**3 + X**4) / (1 - X**2)


def _alpha_local(p, Y):
    return 1 + 4 * p ** (-Y) + p ** (-2 * Y)


def a_factor(phi: MaassForm, psi: MaassForm, p: int, which: int, params: EulerParams) -> complex:
    """a_{phi,psi,which}(p), which in {1, 2}."""
    if which not in (1, 2):
        raise DomainError("which must be 1 or 2")
    s = params.s
    js = local_j_sum(phi, psi, p, which, s, params.j_max)
    out = js * _quartic(phi, psi, p, s)
    if which == 1:
        out *= -2 - 2 * p ** (-params.Y)
    return complex(out)


def A_factor(phi: MaassForm, psi: MaassForm, p: int, which: int, params: EulerParams) -> complex:
    """A_{phi,psi,which}(p): the same local data with the alpha-density divided out."""
    if which not in (1, 2):
        raise DomainError("which must be 1 or 2")
    s = params.s
    js = local_j_sum(phi, psi, p, which, s, params.j_max)
    out = js * _quartic(phi, psi, p, s) / _alpha_local(p, params.Y)
    if which == 1:
        out *= -2 - 2 * p ** (-params.Y)
    return complex(out)


def local_factor(phi, psi, p, params: EulerParams, form="a") -> complex:
    """Local factor of H at p, from the a-form or from the A-form (alpha-density times 1 + A-terms)."""
    s, s1, s2 = params.s, params.s1, params.s2
    e1 = p ** (-(1.5 + s + s1))
    e2 = p ** (-(1.5 + s + s2))
    if form == "a":
        return (
            _alpha_local(p, params.Y)
            + a_factor(phi, psi, p, 1, params) * e1
            + a_factor(phi, psi, p, 2, params) * e1**2
            + a_factor(psi, phi, p, 1, params) * e2
            + a_factor(psi, phi, p, 2, params) * e2**2
        )
    if form == "A":
        return _alpha_local(p, params.Y) * (
            1
            + A_factor(phi, psi, p, 1, params) * e1
            + A_factor(phi, psi, p, 2, params) * e1**2
            + A_factor(psi, phi, p, 1, params) * e2
            + A_factor(psi, phi, p, 2, params) * e2**2
        )
    raise DomainError(f"unknown form {form!r}")


def _prime_power_table(form: MaassForm, primes: np.ndarray, kmax: int) -> np.ndarray:
    """lambda(p^k), shape (len(primes), kmax + 1), as in prime_power_coeffs."""
    out = np.empty((len(primes), kmax + 1))
    out[:, 0] = 1.0
    out[:, 1] = form.lam[primes]
    pk = primes.astype(float)
    for k in range(2, kmax + 1):
        pk = pk * primes
        rec = out[:, 1] * out[:, k - 1] - out[:, k - 2]
        inside = pk <= form.N
        out[:, k] = rec
        out[inside, k] = form.lam[pk[inside].astype(np.int64)]
    return out


def local_factors(phi: MaassForm, psi: MaassForm, primes, params: EulerParams) -> np.ndarray:
    """local_factor(..., form="a") for an array of primes at once."""
    primes = np.asarray(primes, dtype=np.int64)
    s, s1, s2, Y = params.s, params.s1, params.s2, params.Y
    if (1 + 2 * s).real <= 14 / 64:
        raise ConvergenceRegionError("local factors need Re(1+2s) > 14/64")
    decay = (1 + 2 * s).real * math.log(int(primes.min()))
    J = 1
    while J < params.j_max and math.log((J + 1) * (J + 3)) - J * decay > math.log(1e-17):
        J += 1
    lp = _prime_power_table(phi, primes, J + 2)
    lq = _prime_power_table(psi, primes, J + 2)
    logp = np.log(primes.astype(float))
    X = np.exp(-(1 + 2 * s) * logp)
    xj = np.exp(-np.outer(logp, np.arange(J + 1)) * (1 + 2 * s))

    def jsum(a, b, shift):
        return np.sum(a[:, : J + 1] * b[:, shift : J + 1 + shift] * xj, axis=1)

    l1p, l1q = lp[:, 1], lq[:, 1]
    quart = (1 - l1p * l1q * X + (lp[:, 2] + lq[:, 2]) * X**2 - l1p * l1q * X**3 + X**4) / (1 - X**2)
    pY = np.exp(-Y * logp)
    alpha = 1 + 4 * pY + pY**2
    e1 = np.exp(-(1.5 + s + s1) * logp)
    e2 = np.exp(-(1.5 + s + s2) * logp)
    a1_pq = jsum(lp, lq, 1) * quart * (-2 - 2 * pY)
    a2_pq = jsum(lp, lq, 2) * quart
    a1_qp = jsum(lq, lp, 1) * quart * (-2 - 2 * pY)
    a2_qp = jsum(lq, lp, 2) * quart
    return alpha + a1_pq * e1 + a2_pq * e1**2 + a1_qp * e2 + a2_qp * e2**2


# ---------------------------------------------------------------------------
# the Euler product H and the constant C(phi)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HResult:
    value: complex  # finite product over p <= p_max
    corrected: complex  # times the integrated tail of the alpha-density part
    tail_alpha: complex  # log of that tail factor
    tail_rms: float  # RMS size of the neglected oscillating a-terms
    p_max: int


def _tail_integral(P, Y):
    """sum_{p > P} 4 p^{-Y} ~ int_P^inf 4 u^{-Y} du / log u = 4 E1((Y-1) log P)."""
    return complex(4 * special.exp1(complex((Y - 1) * math.log(P))))


def H(phi: MaassForm, psi: MaassForm, params: EulerParams, *, full=False):
    """H_{phi,psi}(s, s1, s2) as a product over p <= p_max.

    Returns the finite product, or with ``full`` an HResult that also carries the
    prime-number-theorem tail correction of the 4/p^Y part and an RMS estimate
    of the oscillating remainder.
    """
    P = min(params.p_max, phi.N, psi.N)
    if P < params.p_max:
        raise DomainError(f"p_max={params.p_max} exceeds the coefficient tables")
    primes = primes_upto(P)
    # small primes need long j-sums; the rest share a short one
    small = primes[primes < 50]
    logH = np.sum(np.log(local_factors(phi, psi, small, params).astype(complex)))
    if len(primes) > len(small):
        logH += np.sum(np.log(local_factors(phi, psi, primes[len(small) :], params).astype(complex)))
    val = complex(np.exp(logH))
    ta = _tail_integral(P, params.Y)
    sig = min((1.5 + params.s + params.s1).real, (1.5 + params.s + params.s2).real)
    # sum_{p>P} 4 * 2 / p^{2 sig} (two a1-terms of mean square ~4)
    rms = math.sqrt(8 * float(special.exp1((2 * sig - 1) * math.log(P))))
    res = HResult(val, val * complex(np.exp(ta)), ta, rms * abs(val), P)
    return res if full else res.value


def H_phi(phi: MaassForm, p_max: int | None = None) -> HResult:
    """H_phi = H_{phi,phi}(0,0,0) with the tail-corrected value."""
    p_max = p_max or phi.N
    key = ("H_phi", p_max)
    if key not in phi._cache:
        phi._cache[key] = H(phi, phi, EulerParams(0, 0, 0, p_max=p_max), full=True)
    return phi._cache[key]


def C_phi(phi: MaassForm, p_max: int | None = None) -> float:
    """C(phi) = 12 log 2 * H_phi (tail-corrected H)."""
    return 12 * LOG2 * H_phi(phi, p_max).corrected.real


# ---------------------------------------------------------------------------
# brute-force D
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DResult:
    value: complex
    tail_estimate: float
    n_tail_correction: complex
    cutoffs: tuple


def _hecke_shift_rows(form: MaassForm, ells, nmax, mu):
    """rows[i, n-1] = lambda(ell_i * n) for n <= nmax, via lambda(ln) = sum_{d|(l,n)} mu(d) lambda(l/d) lambda(n/d)."""
    n = np.arange(1, nmax + 1)
    rows = np.zeros((len(ells), nmax))
    need = max(max(ells), nmax)
    if need > form.N:
        raise DomainError(f"brute force needs lambda up to {need}; table has {form.N}")
    for i, ell in enumerate(ells):
        acc = np.zeros(nmax)
        for d in range(1, ell + 1):
            if ell % d or mu[d] == 0:
                continue
            sel = n % d == 0
            acc[sel] += mu[d] * form.lam[ell // d] * form.lam[n[sel] // d]
        rows[i] = acc
    return rows


def D_bruteforce(
    phi: MaassForm,
    psi: MaassForm,
    params: EulerParams,
    K: int = 200,
    d_max: int = 2000,
    n_max: int = 20000,
    *,
    tol: float | None = None,
) -> DResult:
    """Truncated gcd-reduced sum

        sum_{k,l <= K, (k,l)=1} sum_{d <= d_max} alpha(kd) alpha(ld) / (k^{3/2+s+s1} l^{3/2+s+s2} d^{2+s1+s2})
            * sum_{n <= n_max} lambda_phi(l n) lambda_psi(k n) / n^{1+2s}

    The n-tail is corrected with the empirical mean of the summand on
    [n_max/2, n_max]; the reported tail estimate bounds the k, l, d cut-offs and
    the uncertainty of that correction.  Raises TailTooLargeError if the estimate
    exceeds ``tol``.
    """
    s, s1, s2 = params.s, params.s1, params.s2
    a_exp = 1.5 + s + s1
    b_exp = 1.5 + s + s2
    Y = params.Y
    if min(a_exp.real, b_exp.real) <= 1.2 or Y.real <= 1.2 or (1 + 2 * s).real <= 1.2:
        raise ConvergenceRegionError("D_bruteforce needs a margin of at least 0.2 inside absolute convergence")
    mu = moebius_sieve(max(K, n_max)).values
    alpha = alpha_sieve(K * d_max).values.astype(float)
    ks = list(range(1, K + 1))
    Lphi = _hecke_shift_rows(phi, ks, n_max, mu)  # indexed by l
    Lpsi = _hecke_shift_rows(psi, ks, n_max, mu)  # indexed by k
    n = np.arange(1, n_max + 1, dtype=float)
    w = np.exp(-(1 + 2 * s) * np.log(n))
    G = (Lphi * w) @ Lpsi.T  # G[l-1, k-1]

    # n-tail: mean of lambda_phi(ln) lambda_psi(kn) on two windows times sum_{n > n_max} n^{-1-2s}
    sig = 1 + 2 * s
    tail_sum = n_max ** (1 - sig) / (sig - 1) - 0.5 * n_max ** (-sig)
    hi = slice(n_max // 2, n_max)
    lo = slice(n_max // 4, n_max // 2)
    mean_hi = (Lphi[:, hi] @ Lpsi[:, hi].T) / (hi.stop - hi.start)
    mean_lo = (Lphi[:, lo] @ Lpsi[:, lo].T) / (lo.stop - lo.start)
    G = G + mean_hi * tail_sum
    corr_unc = np.abs(mean_hi - mean_lo) * abs(tail_sum)

    kk = np.arange(1, K + 1)
    gcd1 = np.gcd.outer(kk, kk) == 1  # [l, k]
    d = np.arange(1, d_max + 1)
    dw = np.exp(-Y * np.log(d))
    # Ad[k-1, d-1] = alpha(k d)
    Ad = alpha[np.outer(kk, d)]
    Dd = (Ad * dw) @ Ad.T  # symmetric, [l, k] = sum_d alpha(ld) alpha(kd) d^-Y
    half = d_max // 2
    Dd_shell = np.abs((Ad[:, half:] * dw[half:]) @ Ad[:, half:].T)
    kw = np.exp(-a_exp * np.log(kk))
    lw = np.exp(-b_exp * np.log(kk))
    terms = np.where(gcd1, Dd * G, 0) * lw[:, None] * kw[None, :]
    value = complex(terms.sum())
    n_corr = complex(np.sum(np.where(gcd1, Dd * mean_hi * tail_sum, 0) * lw[:, None] * kw[None, :]))
    unc = float(np.sum(np.where(gcd1, np.abs(Dd) * corr_unc, 0) * np.abs(lw)[:, None] * np.abs(kw)[None, :]))
    # k, l beyond K: extrapolate the last dyadic shell geometrically
    mk = np.maximum.outer(kk, kk)
    shell = float(np.sum(np.abs(np.where(gcd1 & (mk > K // 2), terms, 0))))
    r = 2.0 ** (1 - min(a_exp.real, b_exp.real))
    kl_tail = shell * r / (1 - r)
    rd = 2.0 ** (1 - Y.real)
    d_tail = float(np.sum(np.where(gcd1, Dd_shell * np.abs(G), 0) * np.abs(lw)[:, None] * np.abs(kw)[None, :]))
    d_tail *= rd / (1 - rd)
    est = unc + kl_tail + d_tail
    if tol is not None and est > tol:
        raise TailTooLargeError(f"estimated truncation error {est:.2e} exceeds {tol:.1e}; increase the cutoffs")
    return DResult(value, est, n_corr, (K, d_max, n_max))


def D_factorized(phi: MaassForm, psi: MaassForm, params: EulerParams, *, p_max: int | None = None) -> complex:
    """L(1+2s, phi x psi) / zeta(2+4s) * H(s, s1, s2) (tail-corrected H)."""
    if p_max is not None:
        params = EulerParams(params.s, params.s1, params.s2, p_max=p_max, j_max=params.j_max)
    L = rankin_selberg_L(phi, psi, params.s)
    z = complex(specfun.zeta(2 + 4 * params.s))
    return L / z * H(phi, psi, params, full=True).corrected
