"""Hecke-Maass cusp forms for SL(2,Z): data model, ingestion and L-functions.

L-values are computed with a smoothed approximate functional equation that
keeps the exact archimedean factors, so the only approximations are the
truncation of the Dirichlet series and the trapezoid rule on the Mellin
contour (both controlled well below 1e-10 at desk-scale heights).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
import json
import math
import os
from pathlib import Path

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from . import specfun
from .arith import primes_upto
from .errors import (
    ConvergenceRegionError,
    DomainError,
    FormParseError,
    HeckeViolationError,
    InsufficientCoefficientsError,
)

DATA_DIR_ENV = "QVE_DATA_DIR"
HECKE_TOL = 1e-8
BUNDLED = ("even1", "even2", "odd1")


@dataclass(frozen=True, eq=False)
class MaassForm:
    """A level-1 Hecke-Maass form: t_phi, parity and lambda(1..N).

    ``lam[n]`` is lambda(n) for 1 <= n <= N; ``lam[0]`` is an unused 0.
    """

    label: str
    t_phi: float
    parity: str
    lam: np.ndarray
    source: str = ""
    rho1: float = float("nan")
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise DomainError(f"parity must be 'even' or 'odd', not {self.parity!r}")
        if not self.t_phi > 0:
            raise DomainError("t_phi must be positive")
        self.lam.setflags(write=False)

    @property
    def N(self) -> int:
        return len(self.lam) - 1

    @property
    def delta(self) -> int:
        return 0 if self.parity == "even" else 1

    @property
    def is_even(self) -> bool:
        return self.parity == "even"

    def __repr__(self):
        return f"MaassForm({self.label!r}, t_phi={self.t_phi:.10f}, {self.parity}, N={self.N})"


# ---------------------------------------------------------------------------
# validation and ingestion
# ---------------------------------------------------------------------------

def hecke_residual(lam, limit=None):
    """Worst |lam(m)lam(n) - sum_{d|(m,n)} lam(mn/d^2)| / max(1, |lhs|) over mn <= limit.

    Returns (residual, (m, n)).
    """
    lam = np.asarray(lam, dtype=float)
    N = len(lam) - 1 if limit is None else min(int(limit), len(lam) - 1)
    worst, where = 0.0, None
    for m in range(2, math.isqrt(N) + 1):
        n = np.arange(m, N // m + 1)
        rhs = lam[m * n].copy()
        for d in range(2, m + 1):
            if m % d:
                continue
            sel = n % d == 0
            if sel.any():
                rhs[sel] += lam[m * n[sel] // (d * d)]
        lhs = lam[m] * lam[n]
        r = np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))
        k = int(np.argmax(r))
        if r[k] > worst:
            worst, where = float(r[k]), (m, int(n[k]))
    return worst, where


def ramanujan_ratio(lam):
    """max_n |lam(n)| / (2 n^{7/64 + 0.01}); at most 1 for admissible data."""
    lam = np.asarray(lam, dtype=float)
    n = np.arange(1, len(lam))
    return float(np.max(np.abs(lam[1:]) / (2 * n ** (7 / 64 + 0.01))))


def validate(form: MaassForm, tol: float = HECKE_TOL) -> None:
    if form.N < 1:
        raise FormParseError("empty coefficient table")
    if abs(form.lam[1] - 1) > tol:
        raise HeckeViolationError(f"lambda(1) = {form.lam[1]!r}, expected 1")
    worst, where = hecke_residual(form.lam)
    if worst > tol:
        raise HeckeViolationError(f"Hecke relation violated: residual {worst:.3e} at (m, n) = {where}")
    ratio = ramanujan_ratio(form.lam)
    if ratio > 1:
        raise HeckeViolationError(f"coefficient exceeds 2 n^(7/64+0.01) (ratio {ratio:.3f})")


def _parse_decimal(text, what):
    if not isinstance(text, str):
        raise FormParseError(f"{what} must be a decimal string, got {type(text).__name__}")
    try:
        d = Decimal(text.strip())
    except InvalidOperation as exc:
        raise FormParseError(f"{what}: not a decimal number: {text!r}") from exc
    if not d.is_finite():
        raise FormParseError(f"{what}: not finite")
    return d


def from_json(doc, *, check=True) -> MaassForm:
    """Build a validated MaassForm (with rho1) from a parsed FormFile object."""
    if not isinstance(doc, dict):
        raise FormParseError("form file must hold a JSON object")
    missing = [k for k in ("label", "spectral_parameter", "parity", "coefficients") if k not in doc]
    if missing:
        raise FormParseError(f"missing keys: {missing}")
    t = _parse_decimal(doc["spectral_parameter"], "spectral_parameter")
    if len(t.as_tuple().digits) < 12:
        raise FormParseError("spectral_parameter needs at least 12 significant digits")
    parity = doc["parity"]
    if parity not in ("even", "odd"):
        raise FormParseError(f"parity must be 'even' or 'odd', not {parity!r}")
    coeffs = doc["coefficients"]
    if not isinstance(coeffs, list) or not coeffs:
        raise FormParseError("coefficients must be a non-empty array")
    lam = np.empty(len(coeffs) + 1)
    lam[0] = 0.0
    for i, c in enumerate(coeffs, start=1):
        lam[i] = float(_parse_decimal(c, f"coefficient {i}"))
    form = MaassForm(str(doc["label"]), float(t), parity, lam, str(doc.get("source", "")))
    if check:
        validate(form)
    return replace(form, rho1=rho1(form), _cache={})


def ingest(path, *, check=True) -> MaassForm:
    """Read and validate a FormFile; the result carries rho1."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormParseError(f"{path}: invalid JSON ({exc})") from exc
    return from_json(doc, check=check)


def data_dir() -> Path:
    env = os.environ.get(DATA_DIR_ENV)
    return Path(env) if env else Path(__file__).with_name("data")


_bundled_cache: dict = {}


def load_bundled(label: str) -> MaassForm:
    """One of the shipped forms: 'even1' (t=13.78), 'even2' (t=17.74), 'odd1' (t=9.53)."""
    path = data_dir() / f"{label}.json"
    key = str(path)
    if key not in _bundled_cache:
        _bundled_cache[key] = ingest(path)
    return _bundled_cache[key]


def resolve_form(spec: str) -> MaassForm:
    """Bundled label, or a path (relative paths are also tried under the data directory)."""
    if spec in BUNDLED:
        return load_bundled(spec)
    p = Path(spec)
    if not p.exists() and (data_dir() / spec).exists():
        p = data_dir() / spec
    return ingest(p)


# ---------------------------------------------------------------------------
# Dirichlet coefficients of derived L-functions
# ---------------------------------------------------------------------------

def _spf(N):
    spf = np.zeros(N + 1, dtype=np.int64)
    for p in primes_upto(N)[::-1]:
        spf[p::p] = p
    return spf


def multiplicative_table(N, local):
    """f(1..N) for the multiplicative f with f(p^k) = local(p, k); entry 0 unused."""
    spf = _spf(N)
    f = np.zeros(N + 1, dtype=complex)
    f[1] = 1.0
    memo = {}
    for n in range(2, N + 1):
        p = int(spf[n])
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        key = (p, k)
        if key not in memo:
            memo[key] = local(p, k)
        f[n] = f[m] * memo[key]
    return f


def hecke_prime_powers(lam_p, kmax):
    """lambda(p^k), k = 0..kmax, from lambda(p) by the Hecke recursion."""
    out = np.empty(kmax + 1, dtype=np.result_type(lam_p, float))
    out[0] = 1.0
    if kmax >= 1:
        out[1] = lam_p
    for k in range(2, kmax + 1):
        out[k] = lam_p * out[k - 1] - out[k - 2]
    return out


def sym2_coefficients(form: MaassForm, N: int) -> np.ndarray:
    """Coefficients of L(s, Sym^2 phi) up to N (needs lambda(p) for p <= N)."""
    if N > form.N:
        raise InsufficientCoefficientsError(f"Sym^2 coefficients to {N} need lambda(p) up to {N}; have {form.N}")
    key = ("sym2", N)
    if key in form._cache:
        return form._cache[key]

    def local(p, k):
        e = form.lam[p] ** 2 - 1
        b = [1.0, e]
        for j in range(2, k + 1):
            b.append(e * b[j - 1] - e * b[j - 2] + (b[j - 3] if j >= 3 else 0.0))
        return b[k]

    out = multiplicative_table(N, local).real
    form._cache[key] = out
    return out


def rs_coefficients(phi: MaassForm, psi: MaassForm, N: int) -> np.ndarray:
    """Coefficients of L(s, phi x psi) = zeta(2s) sum lambda_phi(n) lambda_psi(n) n^{-s}."""
    if N > min(phi.N, psi.N):
        raise InsufficientCoefficientsError(f"phi x psi coefficients to {N} exceed the tables")
    base = np.zeros(N + 1)
    base[1:] = phi.lam[1 : N + 1] * psi.lam[1 : N + 1]
    out = base.copy()
    m = 2
    while m * m <= N:
        out[m * m :: m * m] += base[1 : N // (m * m) + 1]
        m += 1
    return out


# ---------------------------------------------------------------------------
# smoothed approximate functional equation
# ---------------------------------------------------------------------------

class SelfDualAFE:
    """Evaluates L(s) = sum a_n n^{-s} for a self-dual level-1 L-function with
    Lambda(s) = prod_j Gamma_R(s + mu_j) L(s) = eps Lambda(1 - s).

    The Mellin weight is G(w) = exp(w^2/kappa^2 + i beta w); beta cancels the
    exponential growth of the gamma ratio along the contour at large height.
    """

    def __init__(self, coeffs, mus, eps, *, kappa=None, c=1.0, h=0.1, tol=1e-13):
        self.a = np.asarray(coeffs, dtype=float)
        self.mus = [complex(m) for m in mus]
        self.eps = eps
        self.kappa = kappa or (8.0 if len(self.mus) <= 3 else 6.0)
        self.c = c
        self.h = h
        self.tol = tol
        self.vmax = 7.0 * self.kappa

    def log_gamma_factor(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for mu in self.mus:
            out = out + (-(s + mu) / 2 * math.log(math.pi) + special.loggamma((s + mu) / 2))
        return out

    def _beta(self, s0):
        b = 0.0
        for mu in self.mus:
            tau = (s0 + mu).imag
            if abs(tau) > self.vmax / 2:
                b -= math.copysign(math.pi / 4, tau)
        return b

    def _contours(self, s0):
        """Real parts of the two Mellin contours; the second must pass right of the poles of gamma(1 - s0 + w)."""
        return self.c, max(self.c, s0.real - 1 + self.c)

    def _weights(self, s0, v):
        """Contour weights of both integrals at nodes w = c + iv (trapezoid, step h)."""
        c1, c2 = self._contours(s0)
        beta = self._beta(s0)
        lg0 = self.log_gamma_factor(s0)
        scale = self.h / (2 * math.pi)
        w1 = c1 + 1j * v
        w2 = c2 + 1j * v
        m1 = np.exp(self.log_gamma_factor(s0 + w1) - lg0 + w1 * w1 / self.kappa**2 + 1j * beta * w1) / w1
        m2 = np.exp(self.log_gamma_factor(1 - s0 + w2) - lg0 + w2 * w2 / self.kappa**2 - 1j * beta * w2) / w2
        return m1 * scale, m2 * scale

    def _tail_point(self, s, lg0, sign_beta, beta, cmin, sig):
        v = np.arange(-self.vmax, self.vmax + 0.25, 0.5)
        best = float("inf")
        for cc in (1.0, 2.0, 4.0, 6.0, 9.0, 13.0, 18.0, 25.0, 35.0):
            cc = cc + cmin
            expo = cc + sig - 1.0
            if expo <= 0.2:
                continue
            w = cc + 1j * v
            g = np.exp((w * w / self.kappa**2).real - sign_beta * beta * v)
            b = np.exp(self.log_gamma_factor(s + w).real - lg0) * g / np.abs(w)
            B = 0.5 / (2 * math.pi) * b.sum()
            # tail sum_{n > X} 3 B n^{-cc-sig} ~ 3B X^{-expo} / expo
            best = min(best, (3 * B / (expo * self.tol)) ** (1 / expo))
        return best

    def terms_needed(self, s0):
        """Smallest X such that the neglected tail n > X is below tol (crude majorant)."""
        s0 = complex(s0)
        beta = self._beta(s0)
        lg0 = self.log_gamma_factor(s0).real
        x1 = self._tail_point(s0, lg0, 1, beta, 0.0, s0.real)
        x2 = self._tail_point(1 - s0, lg0, -1, beta, max(0.0, s0.real - 1), 1 - s0.real)
        return int(math.ceil(max(x1, x2))) + 1

    def _check_len(self, X):
        if X > len(self.a) - 1:
            raise InsufficientCoefficientsError(
                f"need {X} Dirichlet coefficients, table has {len(self.a) - 1}"
            )

    def __call__(self, s0, terms=None):
        s0 = complex(s0)
        X = terms or self.terms_needed(s0)
        self._check_len(X)
        n = np.arange(1, X + 1, dtype=float)
        a = self.a[1 : X + 1]
        nz = a != 0
        logn = np.log(n[nz])
        a = a[nz]
        v = np.arange(-self.vmax, self.vmax + self.h / 2, self.h)
        m1, m2 = self._weights(s0, v)
        c1, c2 = self._contours(s0)
        # sum_n a_n n^{-z} for z = s0 + w_j and z = 1 - s0 + w_j
        s1 = np.exp(-np.outer(s0 + c1 + 1j * v, logn)) @ a
        s2 = np.exp(-np.outer(1 - s0 + c2 + 1j * v, logn)) @ a
        return complex(m1 @ s1 + self.eps * (m2 @ s2))

    def critical_line(self, u):
        """L(1/2 + iu) for an array of u; uniform grids take a fast lattice path."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if len(u) < 8:
            return np.array([self(0.5 + 1j * x) for x in u])
        order = np.argsort(u)
        us = u[order]
        du = np.diff(us)
        delta = du[0]
        if delta <= 0 or np.max(np.abs(du - delta)) > 1e-9 * max(1.0, abs(us[-1])):
            return np.array([self(0.5 + 1j * x) for x in u])
        out = np.empty(len(u), dtype=complex)
        out[order] = self._lattice(us[0], delta, len(us))
        return out

    def _lattice(self, u0, delta, count):
        stride = max(1, int(math.floor(0.1 / delta + 1e-9)))
        h = stride * delta
        nv = int(math.ceil(self.vmax / h))
        v = np.arange(-nv, nv + 1) * h
        X = max(self.terms_needed(0.5 + 1j * u0), self.terms_needed(0.5 + 1j * (u0 + delta * (count - 1))))
        self._check_len(X)
        n = np.arange(1, X + 1, dtype=float)
        a = self.a[1 : X + 1]
        nz = a != 0
        logn = np.log(n[nz])
        b = a[nz] * np.exp(-(0.5 + self.c) * logn)
        # lattice of imaginary parts u0 + delta*k, k from -nv*stride .. (count-1) + nv*stride
        k0 = -nv * stride
        K = count + 2 * nv * stride
        S = np.empty(K, dtype=complex)
        step = max(1, 2_000_000 // max(len(logn), 1))
        for i in range(0, K, step):
            tau = u0 + delta * (k0 + np.arange(i, min(K, i + step)))
            S[i : i + len(tau)] = np.exp(-1j * np.outer(tau, logn)) @ b
        out = np.empty(count, dtype=complex)
        saved_h = self.h
        self.h = h
        try:
            for i in range(count):
                s0 = 0.5 + 1j * (u0 + delta * i)
                m1, _ = self._weights(s0, v)
                idx = i - k0 + stride * np.arange(-nv, nv + 1)
                A = m1 @ S[idx]
                lg_ratio = self.log_gamma_factor(np.conj(s0)) - self.log_gamma_factor(s0)
                out[i] = A + self.eps * np.exp(lg_ratio) * np.conj(A)
        finally:
            self.h = saved_h
        return out


def _afe_phi(form: MaassForm) -> SelfDualAFE:
    key = "afe_phi"
    if key not in form._cache:
        t = form.t_phi
        mus = (form.delta + 1j * t, form.delta - 1j * t)
        form._cache[key] = SelfDualAFE(form.lam, mus, (-1) ** form.delta)
    return form._cache[key]


def _afe_sym2(form: MaassForm, N: int) -> SelfDualAFE:
    t = form.t_phi
    return SelfDualAFE(sym2_coefficients(form, N), (0.0, 2j * t, -2j * t), 1, c=1.5)


# ---------------------------------------------------------------------------
# public evaluators
# ---------------------------------------------------------------------------

def L_sym2(form: MaassForm, s: complex = 1.0, *, return_error=False):
    """L(s, Sym^2 phi), by default at s = 1 (positive real).

    With ``return_error`` also returns a truncation-error estimate: the change
    when the Dirichlet series is cut at half the number of terms used.
    """
    key = ("L_sym2", complex(s))
    if key not in form._cache:
        probe = SelfDualAFE(np.zeros(2), (0.0, 2j * form.t_phi, -2j * form.t_phi), 1, c=1.5)
        X = probe.terms_needed(complex(s))
        if X > form.N:
            raise InsufficientCoefficientsError(f"L(s, Sym^2) needs {X} coefficients; form has {form.N}")
        afe = _afe_sym2(form, X)
        val = afe(s)
        err = abs(afe(s, terms=max(1, (4 * X) // 5)) - val)
        form._cache[key] = (val, err)
    val, err = form._cache[key]
    out = val.real if complex(s).imag == 0 else val
    return (out, err) if return_error else out


def rho1(form: MaassForm) -> float:
    """Positive root of rho(1)^2 L(1, Sym^2) |Gamma(1/2 + it)|^2 = 8 pi."""
    lg = specfun.log_gamma(0.5 + 1j * form.t_phi).real
    return math.sqrt(8 * math.pi / (math.exp(2 * lg) * L_sym2(form)))


def L_critical(form: MaassForm, u):
    """L(1/2 + iu, phi) for scalar or array u (|u| <= 1e4)."""
    ua = np.asarray(u, dtype=float)
    if np.any(np.abs(ua) > 1e4):
        raise DomainError("|u| must be <= 1e4")
    out = _afe_phi(form).critical_line(np.atleast_1d(ua).ravel()).reshape(np.shape(ua))
    return complex(out) if np.ndim(ua) == 0 else out


def L_value(form: MaassForm, s) -> complex:
    """L(s, phi) at an arbitrary complex point."""
    return _afe_phi(form)(complex(s))


def critical_phase(t):
    """(1/i)(t/(e pi))^{4it}: the large-t form of the root factor between the two AFE branches of L(1/2 - 2it)."""
    t = np.asarray(t, dtype=float)
    return -1j * np.exp(4j * t * (np.log(t) - 1 - math.log(math.pi)))


def root_factor(form: MaassForm, s):
    """Exact eps * gamma(1 - s) / gamma(s) for L(s, phi)."""
    afe = _afe_phi(form)
    s = np.asarray(s, dtype=complex)
    return afe.eps * np.exp(afe.log_gamma_factor(1 - s) - afe.log_gamma_factor(s))


def W_t(y, t, *, c=0.1, vmax=30.0, h=0.01):
    """W_t(y) = (1/2 pi i) int (t^2/(pi^2 y))^s e^{s^2} ds/s by trapezoid on Re s = c."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    v = np.arange(-vmax, vmax + h / 2, h)
    s = c + 1j * v
    kern = np.exp(s * s) / s * (h / (2 * math.pi))
    L = np.log(t * t / (math.pi**2 * y))
    out = (np.exp(np.outer(L, s)) @ kern).real
    return out if out.size > 1 else float(out[0])


def W_t_closed(y, t):
    """Closed form of W_t: (1/2) erfc(-log(t^2/(pi^2 y)) / 2)."""
    y = np.asarray(y, dtype=float)
    return 0.5 * special.erfc(-np.log(t * t / (math.pi**2 * y)) / 2)


def _exact_pair_weights(phi, psi, t, logy):
    """W^+ and W^- on the log y grid, with the exact gamma ratios and root numbers."""
    afe_p, afe_q = _afe_phi(phi), _afe_phi(psi)
    h = 0.005
    v = np.arange(-12.0, 12.0 + h / 2, h)
    s = 0.5 + 1j * v
    base = afe_p.log_gamma_factor(0.5 - 2j * t) + afe_q.log_gamma_factor(0.5 + 2j * t)
    plus = afe_p.log_gamma_factor(0.5 - 2j * t + s) + afe_q.log_gamma_factor(0.5 + 2j * t + s) - base
    minus = afe_p.log_gamma_factor(0.5 + 2j * t + s) + afe_q.log_gamma_factor(0.5 - 2j * t + s) - base
    E = np.exp(-np.outer(logy, s))
    k = np.exp(s * s) / s * (h / (2 * math.pi))
    eps = afe_p.eps * afe_q.eps
    return E @ (np.exp(plus) * k), eps * (E @ (np.exp(minus) * k))


def afe_pair(phi: MaassForm, psi: MaassForm, t: float, *, cutoff=None, weight="stirling", return_tail=False):
    """Paired approximate functional equation for L(1/2-2it, phi) L(1/2+2it, psi).

    sum_{m,n} lambda_phi(m) lambda_psi(n) (mn)^{-1/2} ((m/n)^{2it} W^+(mn) + (n/m)^{2it} W^-(mn))
    over mn <= cutoff (default: where W_t < 1e-8), truncated to the coefficient tables.

    weight="stirling" uses W^+ = W^- = W_t, the large-t form with the gamma ratio
    replaced by (t/pi)^{2s}; weight="exact" integrates the true gamma ratios.
    """
    if t < 10:
        raise DomainError("afe_pair requires t >= 10")
    if weight not in ("stirling", "exact"):
        raise DomainError(f"unknown weight {weight!r}")
    if cutoff is None:
        cutoff = t * t * math.exp(7.93) / math.pi**2
    need = int(t**2.1)
    if min(phi.N, psi.N) < need:
        raise InsufficientCoefficientsError(f"afe_pair at t={t} needs coefficients to {need}")
    K = int(cutoff)
    Nn = psi.N
    logn_all = np.log(np.arange(1, Nn + 1, dtype=float))
    bpsi = psi.lam[1:] / np.sqrt(np.arange(1, Nn + 1))
    if weight == "exact":
        grid = np.linspace(0.0, math.log(min(K, phi.N * Nn)) + 1e-9, 6000)
        wp, wm = _exact_pair_weights(phi, psi, t, grid)
        spl = [CubicSpline(grid, w.real) for w in (wp, wm)] + [CubicSpline(grid, w.imag) for w in (wp, wm)]
    total = 0j
    tail = 0.0
    for m in range(1, min(phi.N, K) + 1):
        lm = phi.lam[m]
        if lm == 0:
            continue
        nmax = min(Nn, K // m)
        ln = logn_all[:nmax]
        lmn = math.log(m) + ln
        ph = 2 * t * (math.log(m) - ln)
        if weight == "stirling":
            w = 0.5 * special.erfc(-(2 * math.log(t) - 2 * math.log(math.pi) - lmn) / 2)
            term = 2 * np.cos(ph) * w
        else:
            w = spl[0](lmn) + 1j * spl[2](lmn)
            term = np.exp(1j * ph) * w + np.exp(-1j * ph) * (spl[1](lmn) + 1j * spl[3](lmn))
        total += lm / math.sqrt(m) * complex(np.dot(bpsi[:nmax], term))
        if K // m > Nn:
            # psi's table ends before the mn cutoff: bound the neglected weight
            tail += abs(lm) / math.sqrt(m) * float(np.abs(w[-1])) * 2 * math.sqrt(Nn)
    if K > phi.N:
        # m beyond phi's table, with n = 1 dominating
        tail += 2 * math.sqrt(phi.N) * float(W_t_closed(phi.N, t))
    if weight == "stirling":
        total = total.real
    return (total, tail) if return_tail else total


def rankin_selberg_L(phi: MaassForm, psi: MaassForm, s) -> complex:
    """L(1 + 2s, phi x psi); for phi = psi this is zeta(1+2s) L(1+2s, Sym^2 phi)."""
    s = complex(s)
    if s.real <= 0.05:
        raise ConvergenceRegionError("rankin_selberg_L needs Re(s) > 0.05")
    s0 = 1 + 2 * s
    if phi is psi:
        return complex(specfun.zeta(s0)) * complex(L_sym2(phi, s0))
    key = ("rs", id(psi), s)
    if key in phi._cache:
        return phi._cache[key]
    delta = abs(phi.delta - psi.delta)
    t1, t2 = phi.t_phi, psi.t_phi
    mus = [delta + 1j * (a * t1 + b * t2) for a in (1, -1) for b in (1, -1)]
    probe = SelfDualAFE(np.zeros(2), mus, 1)
    X = probe.terms_needed(s0)
    afe = SelfDualAFE(rs_coefficients(phi, psi, min(X, phi.N, psi.N)), mus, 1)
    val = afe(s0)
    phi._cache[key] = val
    return val


def coefficient_sum(phi: MaassForm, psi: MaassForm, s, N=None) -> complex:
    """Raw sum_{n <= N} lambda_phi(n) lambda_psi(n) n^{-1-2s} with weight exp(-(n/N0)^2), N0 = N / log N."""
    N = N or min(phi.N, psi.N)
    N0 = N / math.log(N)
    n = np.arange(1, N + 1, dtype=float)
    w = np.exp(-((n / N0) ** 2))
    return complex(np.sum(phi.lam[1 : N + 1] * psi.lam[1 : N + 1] * w * np.exp(-(1 + 2 * complex(s)) * np.log(n))))
