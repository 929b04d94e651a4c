"""Estimators for the quantum variance of Eisenstein series and its relatives.

All t-integrals are trapezoid sums of ``mu_closed`` on a uniform grid over
[T, 2T] (or the support of a smooth bump).  Reports carry the computed value,
the predicted constant and their ratio.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import csv
import json
import math
import os
import time
import warnings

import numpy as np

from . import euler_products, maass, specfun
from .eisenstein import L_half, mu_closed
from .errors import CostGuardError, DomainError
from .maass import MaassForm

LOG2 = math.log(2)
ZETA2 = math.pi**2 / 6
VARIANCE_T_CAP = 1000.0
MOMENT_T_CAP = 400.0
CHUNK = 2000  # grid points per work unit; fixed so results do not depend on --jobs
WEIGHTS = ("sharp", "smooth-w_U", "smooth-v_U")


@dataclass(frozen=True)
class GridSpec:
    """Uniform t-grid on [T, 2T]; smooth weights widen it to [T(1-1/U), T(2+1/U)]."""

    T: float
    step: float = 0.02
    U: float = 2.0
    weight: str = "sharp"

    def __post_init__(self):
        if self.T < 20:
            raise DomainError("GridSpec needs T >= 20")
        if not 0 < self.step <= 0.1:
            raise DomainError("GridSpec needs 0 < step <= 0.1")
        if not 2 <= self.U <= self.T ** (1 / 3):
            raise DomainError(f"GridSpec needs 2 <= U <= T^(1/3) = {self.T ** (1 / 3):.3g}")
        if self.weight not in WEIGHTS:
            raise DomainError(f"unknown weight {self.weight!r}; choose from {WEIGHTS}")

    @property
    def interval(self):
        if self.weight == "sharp":
            return self.T, 2 * self.T
        return self.T * (1 - 1 / self.U), self.T * (2 + 1 / self.U)

    def nodes(self) -> np.ndarray:
        a, b = self.interval
        n = int(math.ceil((b - a) / self.step))
        return np.linspace(a, b, n + 1)

    def weights(self, t=None) -> np.ndarray:
        """Trapezoid weights times the smoothing bump."""
        t = self.nodes() if t is None else t
        h = t[1] - t[0]
        w = np.full(len(t), h)
        w[0] = w[-1] = h / 2
        if self.weight != "sharp":
            w = w * bump(t / self.T, self.U)
        return w


def _smooth_step(x):
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(x > 0, np.exp(-1 / np.where(x > 0, x, 1)), 0.0)
        g = np.where(x < 1, np.exp(-1 / np.where(x < 1, 1 - x, 1)), 0.0)
    return f / (f + g)


def bump(y, U):
    """Smooth b_U: 1 on [1+1/U, 2-1/U], 0 outside [1-1/U, 2+1/U], derivatives << U^j.

    The weights are w_U(y) = b_U(y)/y and v_U(y) = b_U(y)/sqrt(y); the
    factors 1/y and 1/sqrt(y) are already part of the exact integrands here, so
    both smooth modes multiply by b_U alone.
    """
    y = np.asarray(y, dtype=float)
    return _smooth_step((y - (1 - 1 / U)) * U / 2) * _smooth_step(((2 + 1 / U) - y) * U / 2)


@dataclass
class VerificationReport:
    name: str
    computed: complex
    reference: complex
    abs_err: float
    rel_err: float
    tolerance: float
    passed: bool
    runtime_seconds: float = 0.0
    metadata: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, computed, reference, tolerance, *, metric="rel", runtime=0.0, passed=None, **metadata):
        computed, reference = complex(computed), complex(reference)
        abs_err = abs(computed - reference)
        rel_err = abs_err / abs(reference) if reference != 0 else math.inf
        err = {"rel": rel_err, "abs": abs_err}.get(metric)
        if err is None:
            err = float(metadata[metric])
        metadata = {"metric": metric, **metadata}
        ok = bool(err <= tolerance) if passed is None else bool(passed)
        return cls(name, computed, reference, abs_err, rel_err, tolerance, ok, runtime, metadata)

    @property
    def pass_(self) -> bool:
        return self.passed

    def to_dict(self, include_runtime=True):
        d = asdict(self)
        d["computed"] = _num(self.computed)
        d["reference"] = _num(self.reference)
        d["pass"] = d.pop("passed")
        d["metadata"] = {k: _num(v) if isinstance(v, complex) else v for k, v in self.metadata.items()}
        if not include_runtime:
            d.pop("runtime_seconds")
        return d

    def to_json(self, include_runtime=True) -> str:
        return json.dumps(self.to_dict(include_runtime), sort_keys=True, default=_jsonable)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"{flag} {self.name}: computed={_fmt(self.computed)} reference={_fmt(self.reference)} "
            f"rel_err={self.rel_err:.3g} tol={self.tolerance:.3g} ({self.runtime_seconds:.1f}s)"
        )


def _num(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _jsonable(o):
    if isinstance(o, complex):
        return _num(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o)}")


def _fmt(z):
    z = complex(z)
    return f"{z.real:.10g}" if z.imag == 0 else f"{z.real:.10g}{z.imag:+.3g}j"


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def V_phi(t_phi) -> float:
    """V(phi) = |Gamma(1/4 + i t/2)|^4 / (2 pi |Gamma(1/2 + i t)|^2)."""
    if np.any(np.asarray(t_phi) < 0):
        raise DomainError("t_phi must be >= 0")
    t = np.asarray(t_phi, dtype=float)
    lg = 4 * specfun.log_gamma(0.25 + 0.5j * t).real - 2 * specfun.log_gamma(0.5 + 1j * t).real
    out = np.exp(lg) / (2 * math.pi)
    return float(out) if out.ndim == 0 else out


def predicted_qv(phi: MaassForm) -> float:
    """C(phi) L(1/2, phi)^2 V(phi); 0 for odd forms."""
    if not phi.is_even:
        return 0.0
    return euler_products.C_phi(phi) * L_half(phi) ** 2 * V_phi(phi.t_phi)


def predicted_qv_chain(phi: MaassForm, gamma_arg_divisor: float = 2.0) -> float:
    """The same constant assembled from rho(1), the Gamma factor and L(1, Sym^2):

        (rho^2 / 2^4) |Gamma(1/4 + i t_phi / d)|^4 L(1/2)^2 (2 log 2 / zeta(2)) H_phi L(1, Sym^2),

    with d = gamma_arg_divisor (2 is correct; 4 gives a wrong variant used as a negative control).
    """
    if not phi.is_even:
        return 0.0
    g = math.exp(4 * specfun.log_gamma(0.25 + 1j * phi.t_phi / gamma_arg_divisor).real)
    H = euler_products.H_phi(phi).corrected.real
    L1 = maass.L_sym2(phi, 1.0).real
    return phi.rho1**2 / 16 * g * L_half(phi) ** 2 * (2 * LOG2 / ZETA2) * H * L1


def weighted_reference(phi: MaassForm) -> float:
    """12 log 2 L(1/2, phi)^2 V(phi)."""
    return 12 * LOG2 * L_half(phi) ** 2 * V_phi(phi.t_phi)


def moment_slope(phi: MaassForm) -> float:
    """2^4 cosh(pi t_phi) / (zeta(2) rho(1)^2), in log space."""
    return math.exp(4 * LOG2 + _log_cosh(math.pi * phi.t_phi) - math.log(ZETA2) - 2 * math.log(phi.rho1))


def _log_cosh(x):
    x = abs(x)
    return x + math.log1p(math.exp(-2 * x)) - LOG2


# ---------------------------------------------------------------------------
# integrands
# ---------------------------------------------------------------------------

def weighted_integrand(phi: MaassForm, t) -> np.ndarray:
    """|zeta(1+2it)|^4 |mu_t(phi)|^2."""
    t = np.asarray(t, dtype=float)
    return np.abs(specfun.zeta(1 + 2j * t)) ** 4 * np.abs(mu_closed(phi, t)) ** 2


def weighted_integrand_factored(phi: MaassForm, t) -> np.ndarray:
    """The same integrand written as (rho^2/2^4)|Gamma(1/4+it_phi/2)|^4 L(1/2)^2 |L(1/2-2it)|^2 * Gamma-ratio."""
    t = np.asarray(t, dtype=float)
    tp = phi.t_phi
    log_ratio = 2 * (
        specfun.log_gamma(0.25 - 0.5j * tp - 1j * t).real
        + specfun.log_gamma(0.25 + 0.5j * tp - 1j * t).real
        - 2 * specfun.log_gamma(0.5 + 1j * t).real
    )
    pref = phi.rho1**2 / 16 * math.exp(4 * specfun.log_gamma(0.25 + 0.5j * tp).real) * L_half(phi) ** 2
    return pref * np.abs(maass.L_critical(phi, -2 * t)) ** 2 * np.exp(log_ratio)


def _mu_chunk(args):
    form, t = args
    return mu_closed(form, t)


def mu_on_grid(phi: MaassForm, t: np.ndarray, jobs: int | None = 1) -> np.ndarray:
    """mu_closed on the grid in fixed-size chunks; the values do not depend on ``jobs``."""
    if not phi.is_even:
        return np.zeros(len(t), dtype=complex)
    chunks = [t[i : i + CHUNK] for i in range(0, len(t), CHUNK)]
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(chunks) == 1:
        parts = [mu_closed(phi, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_mu_chunk, [(phi, c) for c in chunks]))
    return np.concatenate([np.atleast_1d(p) for p in parts])


def _guard(T, cap, force, what):
    if T > cap and not force:
        raise CostGuardError(f"{what} at T={T:g} exceeds the desk-scale cap {cap:g}; pass force=True to override")


def _grid_warn(grid: GridSpec):
    if grid.step > 0.05:
        warnings.warn(f"grid step {grid.step} > 0.05 may under-resolve the oscillation of mu_t")


def _meta(grid: GridSpec, **extra):
    a, b = grid.interval
    return {"T": grid.T, "step": grid.step, "U": grid.U, "weight": grid.weight, "t_min": a, "t_max": b, **extra}


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def weighted_variance(phi: MaassForm, grid: GridSpec, *, jobs=1, force=False) -> VerificationReport:
    """(1/log T) int_T^{2T} |zeta(1+2it)|^4 |mu_t|^2 dt against 12 log 2 L(1/2)^2 V(phi).

    The report passes when the ratio lies in [0.5, 1.5].
    """
    if not phi.is_even:
        raise DomainError("weighted_variance needs an even form")
    _guard(grid.T, VARIANCE_T_CAP, force, "weighted variance")
    _grid_warn(grid)
    t0 = time.perf_counter()
    t = grid.nodes()
    mu = mu_on_grid(phi, t, jobs)
    f = np.abs(specfun.zeta(1 + 2j * t)) ** 4 * np.abs(mu) ** 2
    val = float(np.sum(grid.weights(t) * f)) / math.log(grid.T)
    ref = weighted_reference(phi)
    ratio = val / ref
    return VerificationReport.build(
        f"weighted_variance[{phi.label}]", val, ref, 0.5, metric="ratio_dev",
        runtime=time.perf_counter() - t0, **_meta(grid, ratio=ratio, ratio_dev=abs(ratio - 1), nodes=len(t)),
    )


def qe_variance(phi: MaassForm, psi: MaassForm, grid: GridSpec, *, jobs=1, force=False) -> VerificationReport:
    """(1/log T) int_T^{2T} mu_t(phi) conj(mu_t(psi)) dt.

    Diagonal: reference C(phi) L(1/2)^2 V(phi), passes when the ratio is in [0.4, 1.6].
    Off-diagonal: reference 0; the metric is |computed| / sqrt(Q(phi) Q(psi)), passing at <= 0.3.
    """
    _guard(grid.T, VARIANCE_T_CAP, force, "quantum variance")
    _grid_warn(grid)
    t0 = time.perf_counter()
    name = f"qe_variance[{phi.label},{psi.label}]"
    if not (phi.is_even and psi.is_even):
        return VerificationReport.build(name, 0.0, 0.0, 0.0, metric="abs", runtime=0.0, **_meta(grid, odd=True))
    t = grid.nodes()
    w = grid.weights(t)
    m1 = mu_on_grid(phi, t, jobs)
    m2 = m1 if psi is phi else mu_on_grid(psi, t, jobs)
    val = complex(np.sum(w * m1 * np.conj(m2))) / math.log(grid.T)
    rt = time.perf_counter() - t0
    if psi is phi or psi.label == phi.label:
        ref = predicted_qv(phi)
        ratio = val.real / ref
        return VerificationReport.build(
            name, val, ref, 0.6, metric="ratio_dev", runtime=rt, **_meta(grid, ratio=ratio, ratio_dev=abs(ratio - 1))
        )
    norm = math.sqrt(predicted_qv(phi) * predicted_qv(psi))
    return VerificationReport.build(
        name, val, 0.0, 0.3, metric="normalized", runtime=rt, **_meta(grid, normalized=abs(val) / norm)
    )


def expected_value(phi: MaassForm, grid: GridSpec, *, jobs=1, force=False) -> VerificationReport:
    """E(phi; T) = (1/T) int_T^{2T} mu_t dt.  The metric is |E| sqrt(T), bounded by sup |mu_t| sqrt(t)."""
    _guard(grid.T, VARIANCE_T_CAP, force, "expected value")
    _grid_warn(grid)
    t0 = time.perf_counter()
    name = f"expected_value[{phi.label}]"
    if not phi.is_even:
        return VerificationReport.build(name, 0.0, 0.0, 0.0, metric="abs", **_meta(grid, scaled=0.0, odd=True))
    t = grid.nodes()
    mu = mu_on_grid(phi, t, jobs)
    val = complex(np.sum(grid.weights(t) * mu)) / grid.T
    scaled = abs(val) * math.sqrt(grid.T)
    trivial = float(np.max(np.abs(mu) * np.sqrt(t)))
    # phase increment of e^{-2it log(t/(e pi))} per step
    dphase = 2 * math.log(2 * grid.T / math.pi) * grid.step
    return VerificationReport.build(
        name, val, 0.0, trivial, metric="scaled", runtime=time.perf_counter() - t0,
        **_meta(grid, scaled=scaled, phase_step=dphase),
    )


def second_moment(phi: MaassForm, T: float, step: float = 0.05, *, force=False) -> VerificationReport:
    """(1/T) int_0^T |L(1/2+it, phi)|^2 dt by trapezoid; reference is the leading term a log T."""
    _guard(T, MOMENT_T_CAP, force, "second moment")
    if T <= 0 or step <= 0:
        raise DomainError("T and step must be positive")
    t0 = time.perf_counter()
    n = int(math.ceil(T / step))
    t = np.linspace(0.0, T, n + 1)
    vals = np.abs(maass.L_critical(phi, t)) ** 2
    h = t[1] - t[0]
    val = float(h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))) / T
    ref = moment_slope(phi) * math.log(T)
    return VerificationReport.build(
        f"second_moment[{phi.label}]", val, ref, math.inf, runtime=time.perf_counter() - t0,
        T=T, step=step, min_integrand=float(vals.min()),
    )


# ---------------------------------------------------------------------------
# ladders and trends
# ---------------------------------------------------------------------------

@dataclass
class Ladder:
    rows: list  # (T, computed, reference, ratio)
    reports: list
    trend: VerificationReport

    def write_csv(self, path_or_file):
        write_csv(self.rows, path_or_file)


def write_csv(rows, path_or_file, header=("T", "computed", "reference", "ratio")):
    """CSV with 17 significant digits and LF line endings."""
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{float(np.real(x)):.17g}" for x in r])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def weighted_variance_ladder(phi, Ts=(125, 250, 500), step=0.02, *, jobs=1, force=False) -> Ladder:
    """Ratios along a T-ladder; the trend passes when the last rung is closer to 1 than the first."""
    reps = [weighted_variance(phi, GridSpec(T, step), jobs=jobs, force=force) for T in Ts]
    ratios = [r.metadata["ratio"] for r in reps]
    rows = [(T, r.computed.real, r.reference.real, q) for T, r, q in zip(Ts, reps, ratios)]
    first, last = abs(ratios[0] - 1), abs(ratios[-1] - 1)
    trend = VerificationReport.build(
        f"weighted_variance_trend[{phi.label}]", ratios[-1], 1.0, first, metric="last_dev",
        runtime=sum(r.runtime_seconds for r in reps), Ts=list(Ts), ratios=ratios, last_dev=last, first_dev=first,
    )
    return Ladder(rows, reps, trend)


def qe_ladder(phi, psi, Ts=(100, 200, 400), step=0.02, *, jobs=1, force=False) -> Ladder:
    """Off-diagonal: normalized |Q| must not grow along the ladder (1.5x slack per rung); diagonal: ratio trend."""
    reps = [qe_variance(phi, psi, GridSpec(T, step), jobs=jobs, force=force) for T in Ts]
    diag = psi is phi or psi.label == phi.label
    key = "ratio" if diag else "normalized"
    vals = [r.metadata.get(key, 0.0) for r in reps]
    rows = [(T, abs(r.computed), r.reference.real, v) for T, r, v in zip(Ts, reps, vals)]
    if diag:
        devs = [abs(v - 1) for v in vals]
        ok = all(b <= 1.5 * a for a, b in zip(devs, devs[1:]))
    else:
        devs = vals
        ok = vals[-1] < vals[0] and all(b <= 1.5 * a for a, b in zip(vals, vals[1:]))
    trend = VerificationReport.build(
        f"qe_trend[{phi.label},{psi.label}]", vals[-1], 1.0 if diag else 0.0, 1.5, metric="trend",
        passed=ok, runtime=sum(r.runtime_seconds for r in reps), Ts=list(Ts), values=vals, trend=0.0,
    )
    return Ladder(rows, reps, trend)


def expected_value_ladder(phi, Ts=(100, 200, 400), step=0.02, slack=0.2, *, jobs=1, force=False) -> Ladder:
    """|E(phi;T)| sqrt(T) must be non-increasing up to a factor 1 + slack between rungs."""
    reps = [expected_value(phi, GridSpec(T, step), jobs=jobs, force=force) for T in Ts]
    sc = [r.metadata["scaled"] for r in reps]
    rows = [(T, abs(r.computed), 0.0, s) for T, r, s in zip(Ts, reps, sc)]
    worst = max([b / a for a, b in zip(sc, sc[1:]) if a > 0] or [0.0])
    trend = VerificationReport.build(
        f"expected_value_trend[{phi.label}]", sc[-1], 0.0, 1 + slack, metric="worst_growth",
        runtime=sum(r.runtime_seconds for r in reps), Ts=list(Ts), scaled=sc, worst_growth=worst,
    )
    return Ladder(rows, reps, trend)


def second_moment_ladder(phi, Ts=(100, 200, 400), step=0.05, tol=0.25, *, force=False) -> Ladder:
    """Least-squares slope of (1/T) int_0^T |L|^2 against log T, compared with the predicted slope."""
    reps = [second_moment(phi, T, step, force=force) for T in Ts]
    y = np.array([r.computed.real for r in reps])
    slope, _ = np.polyfit(np.log(Ts), y, 1)
    ref = moment_slope(phi)
    rows = [(T, r.computed.real, r.reference.real, r.computed.real / r.reference.real) for T, r in zip(Ts, reps)]
    trend = VerificationReport.build(
        f"second_moment_slope[{phi.label}]", slope, ref, tol,
        runtime=sum(r.runtime_seconds for r in reps), Ts=list(Ts), means=y.tolist(),
    )
    return Ladder(rows, reps, trend)


def constant_assembly(phi: MaassForm) -> VerificationReport:
    """C(phi) L^2 V(phi) versus the rho / Gamma / L(1, Sym^2) chain."""
    t0 = time.perf_counter()
    a = predicted_qv(phi)
    b = predicted_qv_chain(phi)
    return VerificationReport.build(
        f"constant_assembly[{phi.label}]", a, b, 1e-10, runtime=time.perf_counter() - t0,
        divisor4_variant=predicted_qv_chain(phi, 4.0),
    )
