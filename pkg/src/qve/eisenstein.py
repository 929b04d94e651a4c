"""Pointwise E(z, 1/2+it) and phi(z), and mu_t(phi) two ways.

``mu_direct`` integrates phi |E_t|^2 over the fundamental domain;
``mu_closed`` assembles the Rankin-Selberg closed form from L-values.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
import warnings

import numpy as np

from . import maass, specfun
from .errors import DomainError, InsufficientCoefficientsError
from .maass import MaassForm


@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError("UpperHalfPoint needs y > 0")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def canonical(self) -> "UpperHalfPoint":
        """Image in {|x| <= 1/2, x^2 + y^2 >= 1} under SL(2, Z)."""
        x, y = canonicalize(self.x, self.y)
        return UpperHalfPoint(float(x), float(y))

    def apply(self, a, b, c, d) -> "UpperHalfPoint":
        w = (a * self.z + b) / (c * self.z + d)
        return UpperHalfPoint(w.real, w.imag)


def canonicalize(x, y):
    """Vectorised pullback of points x + iy into the standard fundamental domain."""
    x = np.array(x, dtype=float, copy=True)
    y = np.array(y, dtype=float, copy=True)
    for _ in range(10_000):
        x -= np.round(x)
        r2 = x * x + y * y
        m = r2 < 1 - 1e-14
        if not np.any(m):
            break
        x[m] = -x[m] / r2[m]
        y[m] = y[m] / r2[m]
    return x, y


@dataclass(frozen=True)
class QuadratureSpec:
    """Fundamental-domain quadrature: Gauss-Legendre panels in x and y.

    ``nx`` nodes over x in [0, 1/2]; ``ny`` nodes per y-panel.  The y-range is
    split at 1.2; above it panels have unit height up to Y_max.
    """

    Y_max: float = 8.0
    nx: int = 48
    ny: int = 24
    scheme: str = "tensor-Gauss"

    def __post_init__(self):
        if self.Y_max < 2:
            raise DomainError("Y_max must be >= 2")
        if self.nx < 1 or self.ny < 1:
            raise DomainError("resolutions must be positive")
        if self.scheme not in ("tensor-Gauss", "adaptive"):
            raise DomainError(f"unknown scheme {self.scheme!r}")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(self.Y_max, 2 * self.nx, 2 * self.ny, self.scheme)

    @classmethod
    def default_for(cls, form: MaassForm, t: float) -> "QuadratureSpec":
        return cls(Y_max=6 + (form.t_phi + t) / (2 * math.pi))


# ---------------------------------------------------------------------------
# Eisenstein series
# ---------------------------------------------------------------------------

def divisor_twist(M: int, t: float) -> np.ndarray:
    """n^{it} sigma_{-2it}(n) = sum_{ab=n} (a/b)^{it} for n <= M (real); entry 0 unused."""
    out = np.zeros(M + 1)
    for a in range(1, M + 1):
        b = np.arange(1, M // a + 1)
        out[a * b] += np.cos(t * (math.log(a) - np.log(b)))
    return out


def eisenstein_cutoff(t: float, y: float) -> int:
    return int(math.ceil((t / (2 * math.pi * y)) * 1.2 + 40 / (2 * math.pi * y)))


def _scattering(t):
    """(phi(1/2+it), 4 / xi(1+2it)) with phi(s) = xi(2s-1)/xi(2s)."""
    lx1 = specfun.log_xi(1 + 2j * t)
    scat = np.exp(specfun.log_xi(2j * t) - lx1)
    return complex(scat), complex(4 * np.exp(-lx1))


def _eisenstein_grid(xs, ys, t, M=None):
    """E(x + iy, 1/2 + it) on the tensor grid xs x ys (arrays), shape (len(ys), len(xs))."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    M = M or eisenstein_cutoff(t, float(ys.min()))
    scat, pref = _scattering(t)
    tau = divisor_twist(M, t)[1:]
    n = np.arange(1, M + 1)
    K = np.array([specfun.bessel_k_imag_order(t, 2 * np.pi * n * y) for y in ys])  # ny x M
    C = np.cos(2 * np.pi * np.outer(n, xs))  # M x nx
    series = (K * tau) @ C
    ly = np.log(ys)[:, None]
    const = np.exp((0.5 + 1j * t) * ly) + scat * np.exp((0.5 - 1j * t) * ly)
    return const + pref * np.sqrt(ys)[:, None] * series


def eisenstein_value(z: UpperHalfPoint, t: float, M: int | None = None) -> complex:
    """E(z, 1/2 + it) from its Fourier expansion (t >= 0.5, y >= 0.1)."""
    if t < 0.5:
        raise DomainError("eisenstein_value requires t >= 0.5")
    if z.y < 0.1:
        raise DomainError("eisenstein_value requires y >= 0.1; canonicalize first")
    return complex(_eisenstein_grid([z.x], [z.y], t, M)[0, 0])


# ---------------------------------------------------------------------------
# Maass form
# ---------------------------------------------------------------------------

def maass_cutoff(form: MaassForm, y: float) -> int:
    # K_{it}(x) is below 1e-12 of its oscillatory size once x > t + 40
    return int(math.ceil((form.t_phi + 40) / (2 * math.pi * y))) + 1


def _maass_grid(form: MaassForm, xs, ys):
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    M = maass_cutoff(form, float(ys.min()))
    if M > form.N:
        raise InsufficientCoefficientsError(f"need {M} coefficients at y={ys.min()}")
    n = np.arange(1, M + 1)
    K = np.array([specfun.bessel_k_imag_order(form.t_phi, 2 * np.pi * n * y) for y in ys])
    trig = np.cos if form.is_even else np.sin
    C = trig(2 * np.pi * np.outer(n, xs))
    return form.rho1 * np.sqrt(ys)[:, None] * ((K * form.lam[1 : M + 1]) @ C)


def maass_value(form: MaassForm, z: UpperHalfPoint) -> float:
    """phi(z) = rho(1) sqrt(y) sum_{n>=1} lambda(n) K_{it}(2 pi n y) cos(2 pi n x) (sin for odd forms)."""
    if z.y < 0.1:
        raise DomainError("maass_value requires y >= 0.1; canonicalize first")
    return float(_maass_grid(form, [z.x], [z.y])[0, 0])


# ---------------------------------------------------------------------------
# mu_t(phi): closed form
# ---------------------------------------------------------------------------

def _log_Lambda_gamma(form: MaassForm, s):
    """log of pi^{-s} Gamma((s + i t)/2) Gamma((s - i t)/2) (even forms)."""
    s = np.asarray(s, dtype=complex)
    t = form.t_phi
    return -s * math.log(math.pi) + specfun.log_gamma((s + 1j * t) / 2) + specfun.log_gamma((s - 1j * t) / 2)


def _check_mu_args(form, t):
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0.5):
        raise DomainError("mu_t requires t >= 0.5")
    return ta


def L_half(form: MaassForm) -> float:
    """L(1/2, phi) (real; nonnegative for even forms)."""
    key = "L_half"
    if key not in form._cache:
        form._cache[key] = maass.L_critical(form, 0.0).real
    return form._cache[key]


def mu_closed(form: MaassForm, t, *, variant="gamma", L_minus=None):
    """mu_t(phi) from the Rankin-Selberg closed form; exactly 0 for odd forms.

    variant="gamma": (rho/4) pi^{2it} |G(1/4+it_phi/2)|^2 G(1/4-it_phi/2-it) G(1/4+it_phi/2-it)
                     / |G(1/2+it)|^2 * L(1/2) L(1/2-2it) / |zeta(1+2it)|^2.
    variant="xi":    (rho/4) Lambda(1/2) Lambda(1/2-2it) / |xi(1+2it)|^2, in log space.
    ``L_minus`` may supply precomputed L(1/2 - 2it, phi) values.
    """
    ta = _check_mu_args(form, t)
    if not form.is_even:
        return np.zeros(np.shape(ta), dtype=complex) if np.ndim(ta) else 0j
    tt = np.atleast_1d(ta)
    Lm = maass.L_critical(form, -2 * tt) if L_minus is None else np.atleast_1d(L_minus)
    L0 = L_half(form)
    tp = form.t_phi
    if variant == "gamma":
        lg = (
            2j * tt * math.log(math.pi)
            + 2 * specfun.log_gamma(0.25 + 0.5j * tp).real
            + specfun.log_gamma(0.25 - 0.5j * tp - 1j * tt)
            + specfun.log_gamma(0.25 + 0.5j * tp - 1j * tt)
            - 2 * specfun.log_gamma(0.5 + 1j * tt).real
        )
        zeta_sq = np.abs(specfun.zeta(1 + 2j * tt)) ** 2
        out = form.rho1 / 4 * np.exp(lg) * L0 * Lm / zeta_sq
    elif variant == "xi":
        lam_half = math.exp(_log_Lambda_gamma(form, 0.5).real) * L0
        log_num = _log_Lambda_gamma(form, 0.5 - 2j * tt)
        log_den = 2 * specfun.log_xi(1 + 2j * tt).real
        out = form.rho1 / 4 * lam_half * np.exp(log_num - log_den) * Lm
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return complex(out[0]) if np.ndim(ta) == 0 else out


# ---------------------------------------------------------------------------
# mu_t(phi): direct quadrature over the fundamental domain
# ---------------------------------------------------------------------------

@dataclass
class DirectResult:
    value: complex
    tail_estimate: float
    nodes: int


def _gl(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _domain_integral(f_grid, q: QuadratureSpec, split=1.2):
    """Integrate f(x, y) y^{-2} over {0 <= x <= 1/2, x^2+y^2 >= 1, y <= Y_max}.

    ``f_grid(xs, ys)`` returns values on a tensor grid, shape (len(ys), len(xs)).
    Returns (integral, value grid on the top edge for the tail estimate, node count).
    """
    xg, wx = _gl(q.nx, 0.0, 0.5)
    total = 0.0 + 0.0j
    nodes = 0
    # lower region: y = b(x) + (split - b(x)) u, u in [0, 1]
    u, wu = _gl(q.ny, 0.0, 1.0)
    base = np.sqrt(1 - xg * xg)
    for j in range(q.nx):
        ys = base[j] + (split - base[j]) * u
        vals = f_grid(np.array([xg[j]]), ys)[:, 0]
        total += wx[j] * (split - base[j]) * np.sum(wu * vals / ys**2)
        nodes += len(ys)
    # upper region: unit panels in y
    edges = np.arange(split, q.Y_max, 1.0)
    edges = np.append(edges, q.Y_max)
    top = None
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a < 1e-12:
            continue
        ys, wy = _gl(q.ny, a, b)
        vals = f_grid(xg, ys)
        total += np.sum((wy / ys**2)[:, None] * vals * wx[None, :])
        nodes += vals.size
    top = f_grid(xg, np.array([q.Y_max]))[0]
    return total, top, nodes


def mu_direct(form: MaassForm, t: float, q: QuadratureSpec | None = None, *, full=False, force=False):
    """Quadrature of phi |E_t|^2 dmu over the fundamental domain truncated at Y_max.

    Returns a complex value (real up to rounding); with ``full`` a DirectResult
    including an estimate of the neglected part above Y_max.
    """
    if t < 0.5:
        raise DomainError("mu_direct requires t >= 0.5")
    if t > 20 and not force:
        raise DomainError("mu_direct is limited to t <= 20 (pass force=True to override)")
    q = q or QuadratureSpec.default_for(form, t)
    if not form.is_even:
        # the integrand is odd in x: the integral over the symmetric domain vanishes
        res = DirectResult(0j, 0.0, 0)
        return res if full else res.value
    M = eisenstein_cutoff(t, math.sqrt(3) / 2)

    def f_grid(xs, ys):
        E = _eisenstein_grid(xs, ys, t, M)
        return _maass_grid(form, xs, ys) * np.abs(E) ** 2

    val, top, nodes = _domain_integral(f_grid, q)
    val *= 2  # x in [-1/2, 0] by symmetry
    # integrand decays at least like exp(-2 pi y) above Y_max
    tail = float(np.max(np.abs(top))) / q.Y_max**2 / (2 * math.pi)
    res = DirectResult(complex(val), tail, nodes)
    return res if full else res.value


def mu_direct_checked(form: MaassForm, t: float, q: QuadratureSpec | None = None, rtol=1e-6, force=False):
    """mu_direct plus a grid-doubling check; warns if the two disagree beyond rtol."""
    q = q or QuadratureSpec.default_for(form, t)
    a = mu_direct(form, t, q, force=force)
    b = mu_direct(form, t, q.doubled(), force=force)
    if abs(a - b) > rtol * max(abs(b), 1e-300):
        warnings.warn(f"mu_direct under-resolved at t={t}: doubling changed the value by {abs(a - b):.2e}")
    return b, abs(a - b)


def norm_squared(form: MaassForm, q: QuadratureSpec | None = None) -> float:
    """int_X |phi|^2 dmu by the same quadrature (should be 1)."""
    q = q or QuadratureSpec(Y_max=6 + form.t_phi / (2 * math.pi))

    def f_grid(xs, ys):
        return _maass_grid(form, xs, ys) ** 2

    val, _, _ = _domain_integral(f_grid, q)
    return float(2 * val.real)
