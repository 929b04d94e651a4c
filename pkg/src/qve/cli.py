"""Command line: ``qve verify``, ``qve mu`` and ``qve variance``.

Exit codes: 0 all checks pass, 1 a check failed, 2 I/O problem, 64 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import arith, eisenstein, euler_products, maass, specfun, variance
from .errors import CostGuardError, DomainError, QVEError
from .variance import GridSpec, VerificationReport

EXIT_OK, EXIT_FAIL, EXIT_IO, EXIT_USAGE = 0, 1, 2, 64

SUITES = ("specfun", "arith", "maass", "euler", "eisenstein", "variance", "all")
FLAVORS = ("weighted", "qe", "expected", "second-moment")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

def suite_specfun(cfg):
    rng = np.random.default_rng(20240601)
    # inside the strip both sides are summed directly, with no reflection
    s = rng.uniform(0.02, 0.98, 200) + 1j * rng.uniform(-50, 50, 200)
    a = specfun.log_xi_direct(s)
    b = specfun.log_xi_direct(1 - s)
    err = float(np.max(np.abs(np.expm1(a - b))))
    yield VerificationReport.build("xi functional equation (200 points)", err, 0.0, 1e-9, metric="abs")

    worst = 0.0
    for rho in (1.0, 2.0, 5.0):
        for z in (50.0, 80.0, 150.0):
            nu = 1j * rho
            d = abs(specfun.bessel_jplus(nu, z) - specfun.bessel_jplus_asymptotic(nu, z))
            worst = max(worst, d / (10 * (1 + abs(nu) ** 6) / z**3))
    yield VerificationReport.build("J+ asymptotics within (1+|nu|^6)/z^3 envelope", worst, 0.0, 1.0, metric="abs")

    x = np.array([0.5, 2.0, 5.0, 8.0])  # the series loses digits to cancellation beyond x ~ 8
    k = specfun.bessel_k_imag_order(13.779751351890738, x)
    ks = np.array([specfun.bessel_k_imag_order_series(13.779751351890738, xx) for xx in x])
    yield VerificationReport.build(
        "K_ir quadrature vs series", float(np.max(np.abs(k - ks) / np.abs(ks))), 0.0, 1e-9, metric="abs"
    )
    yield VerificationReport.build("zeta(0)", complex(specfun.zeta(0.0)), -0.5, 1e-14)


def suite_arith(cfg):
    N = 2000
    mu = arith.moebius_sieve(N).values.astype(int)
    al = arith.alpha_sieve(N).values.astype(int)
    conv = np.zeros(N + 1, dtype=int)
    for m in range(1, N + 1):
        conv[m::m][: N // m] += mu[m] * mu[1 : N // m + 1]
    bad = int(np.sum(conv[1:] != al[1:]))
    yield VerificationReport.build("alpha = mu * mu up to 2000", bad, 0, 0, metric="abs")

    target = 1 / complex(specfun.zeta(1 + 100j)) ** 2
    errs = {x: abs(arith.afe_inv_zeta_sq(50.0, x) - target) for x in (20, 50, 200, 1000)}
    yield VerificationReport.build(
        "1/zeta^2 smoothed sum at (t, x) = (50, 50)", arith.afe_inv_zeta_sq(50.0, 50), target, 0.05, metric="abs",
        errors_by_x={str(k): v for k, v in errs.items()},
    )
    improving = errs[1000] < errs[50] < errs[20]
    yield VerificationReport.build(
        "1/zeta^2 smoothed sum improving in x", errs[1000], 0.0, math.inf, metric="abs", passed=improving,
        errors_by_x={str(k): v for k, v in errs.items()},
    )
    target1 = 1 / complex(specfun.zeta(1 + 100j))
    yield VerificationReport.build(
        "1/zeta smoothed sum at (t, x) = (50, 50)", arith.afe_inv_zeta(50.0, 50), target1, 0.05, metric="abs"
    )


def suite_maass(cfg):
    for label in maass.BUNDLED:
        f = maass.load_bundled(label)
        res = maass.hecke_residual(f.lam, 20000)[0]
        yield VerificationReport.build(f"Hecke residual [{label}]", res, 0.0, 1e-8, metric="abs")
    f = maass.load_bundled("even1")
    vals = [maass.SelfDualAFE(f.lam, (1j * f.t_phi, -1j * f.t_phi), 1, kappa=k)(0.5 + 30j) for k in (6.0, 8.0)]
    yield VerificationReport.build("L(1/2+30i) stable under the AFE weight", vals[0], vals[1], 1e-8)
    discrepancy = []
    for t in (20.0, 40.0, 80.0):
        ref = abs(maass.L_critical(f, 2 * t)) ** 2
        discrepancy.append(abs(maass.afe_pair(f, f, t) - ref) / ref)
    ok = max(discrepancy) <= 1e-2 and discrepancy[0] > discrepancy[1] > discrepancy[2]
    yield VerificationReport.build(
        "paired AFE vs product of single L-values (t = 20, 40, 80)", max(discrepancy), 0.0, 1e-2,
        metric="abs", passed=ok, discrepancies=discrepancy,
    )


EULER_POINTS = [(1, 1, 1), (1, 1.2, 1.5), (1.5, 0.8, 1 + 0.7j), (1 + 0.5j, 1, 1.3), (1.2 + 0.3j, 1 + 0.5j, 1)]


def suite_euler(cfg):
    f, g = maass.load_bundled("even1"), maass.load_bundled("even2")
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        prm = euler_products.EulerParams(*(rng.uniform(0, 1, 3) + 1j * rng.uniform(-2, 2, 3)))
        for p in arith.primes_upto(100):
            a = euler_products.local_factor(f, g, int(p), prm, form="a")
            b = euler_products.local_factor(f, g, int(p), prm, form="A")
            worst = max(worst, abs(a - b) / abs(b))
    yield VerificationReport.build("a-form vs A-form local factors, p <= 100", worst, 0.0, 1e-12, metric="abs")
    for phi, psi, tol in ((f, f, 1e-6), (f, g, 1e-5)):
        for pt in EULER_POINTS:
            prm = euler_products.EulerParams(*pt)
            D = euler_products.D_bruteforce(phi, psi, prm, n_max=cfg.n_max or 20000)
            F = euler_products.D_factorized(phi, psi, prm, p_max=cfg.p_max)
            yield VerificationReport.build(
                f"D = L H / zeta [{phi.label},{psi.label}] at {pt}", D.value, F, tol, tail_estimate=D.tail_estimate
            )


def suite_eisenstein(cfg):
    for label in ("even1", "even2"):
        f = maass.load_bundled(label)
        yield VerificationReport.build(f"norm of {label}", eisenstein.norm_squared(f), 1.0, 1e-8)
        for t in (1.0, 3.0, 5.0):
            yield VerificationReport.build(
                f"mu_t direct vs closed [{label}] t={t:g}",
                eisenstein.mu_direct(f, t), eisenstein.mu_closed(f, t), 1e-3,
            )


def suite_variance(cfg):
    f, g = maass.load_bundled("even1"), maass.load_bundled("even2")
    yield variance.constant_assembly(f)
    yield variance.second_moment_ladder(f).trend
    lad = variance.weighted_variance_ladder(f, jobs=cfg.jobs)
    yield lad.reports[1] if len(lad.reports) > 1 else lad.reports[0]
    yield lad.trend
    yield variance.qe_ladder(f, g, jobs=cfg.jobs).trend
    yield variance.expected_value_ladder(f, jobs=cfg.jobs).trend
    yield VerificationReport.build("odd form mu_t", eisenstein.mu_closed(maass.load_bundled("odd1"), 50.0), 0.0, 0.0,
                                   metric="abs")


SUITE_FUNCS = {
    "specfun": suite_specfun,
    "arith": suite_arith,
    "maass": suite_maass,
    "euler": suite_euler,
    "eisenstein": suite_eisenstein,
    "variance": suite_variance,
}


def cmd_verify(cfg) -> int:
    names = list(SUITE_FUNCS) if cfg.suite == "all" else [cfg.suite]
    reports = []
    for name in names:
        t0 = time.perf_counter()
        last = t0
        for rep in SUITE_FUNCS[name](cfg):
            now = time.perf_counter()
            if not rep.runtime_seconds:
                rep.runtime_seconds = now - last
            last = now
            rep.metadata.setdefault("suite", name)
            reports.append(rep)
            print(rep.line(), flush=True)
    failed = [r for r in reports if not r.passed]
    _emit(cfg, [r.to_dict(include_runtime=False) for r in reports], rows=None)
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    if failed:
        print(f"first failure: {failed[0].line()}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# mu and variance
# ---------------------------------------------------------------------------

def cmd_mu(cfg) -> int:
    if cfg.t is None:
        raise UsageError("--t is required")
    form = maass.resolve_form(cfg.form)
    out = {"form": form.label, "t": cfg.t, "method": cfg.method}
    if cfg.method in ("closed", "both"):
        out["closed"] = eisenstein.mu_closed(form, cfg.t)
    if cfg.method in ("direct", "both"):
        out["direct"] = eisenstein.mu_direct(form, cfg.t, force=cfg.force)
    ok = True
    if cfg.method == "both":
        d, c = out["direct"], out["closed"]
        out["rel_err"] = abs(d - c) / abs(c) if c != 0 else abs(d - c)
        ok = out["rel_err"] <= 1e-3
        out["pass"] = ok
    rows = [(cfg.t, out.get("closed", out.get("direct")), out.get("direct", math.nan), out.get("rel_err", math.nan))]
    _emit(cfg, out, rows=rows, header=("t", "closed", "direct", "rel_err"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_variance(cfg) -> int:
    if cfg.T is None:
        raise UsageError("--T is required")
    if cfg.flavor not in FLAVORS:
        raise UsageError(f"--flavor must be one of {', '.join(FLAVORS)}")
    phi = maass.resolve_form(cfg.form)
    psi = maass.resolve_form(cfg.form2) if cfg.form2 else phi
    Ts = (cfg.T, 2 * cfg.T, 4 * cfg.T) if cfg.ladder else (cfg.T,)
    step = cfg.step or 0.02
    kw = dict(jobs=cfg.jobs, force=cfg.force)
    if cfg.flavor == "weighted":
        if cfg.ladder:
            lad = variance.weighted_variance_ladder(phi, Ts, step, **kw)
        else:
            rep = variance.weighted_variance(phi, GridSpec(cfg.T, step, cfg.U, cfg.weight), **kw)
            lad = variance.Ladder([(cfg.T, rep.computed.real, rep.reference.real, rep.metadata["ratio"])], [rep], rep)
    elif cfg.flavor == "qe":
        if cfg.ladder:
            lad = variance.qe_ladder(phi, psi, Ts, step, **kw)
        else:
            rep = variance.qe_variance(phi, psi, GridSpec(cfg.T, step, cfg.U, cfg.weight), **kw)
            key = "ratio" if "ratio" in rep.metadata else "normalized"
            lad = variance.Ladder([(cfg.T, abs(rep.computed), rep.reference.real, rep.metadata.get(key, 0.0))],
                                  [rep], rep)
    elif cfg.flavor == "expected":
        if cfg.ladder:
            lad = variance.expected_value_ladder(phi, Ts, step, **kw)
        else:
            rep = variance.expected_value(phi, GridSpec(cfg.T, step, cfg.U, cfg.weight), **kw)
            lad = variance.Ladder([(cfg.T, abs(rep.computed), 0.0, rep.metadata["scaled"])], [rep], rep)
    else:
        step = cfg.step or 0.05
        if cfg.ladder:
            lad = variance.second_moment_ladder(phi, Ts, step, force=cfg.force)
        else:
            rep = variance.second_moment(phi, cfg.T, step, force=cfg.force)
            lad = variance.Ladder([(cfg.T, rep.computed.real, rep.reference.real,
                                    rep.computed.real / rep.reference.real)], [rep], rep)
    for r in lad.reports:
        print(r.line(), file=sys.stderr)
    payload = {"reports": [r.to_dict(include_runtime=False) for r in lad.reports],
               "trend": lad.trend.to_dict(include_runtime=False)}
    _emit(cfg, payload, rows=lad.rows)
    return EXIT_OK if lad.trend.passed else EXIT_FAIL


def _emit(cfg, payload, rows, header=("T", "computed", "reference", "ratio")):
    """Write JSON (default) or CSV to --out, or JSON to stdout when --out is absent."""
    if cfg.format == "csv" and rows is not None:
        buf = io.StringIO()
        variance.write_csv(rows, buf, header=header)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, sort_keys=True, indent=2, default=variance._jsonable) + "\n"
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    elif cfg.command != "verify":
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qve", description="Quantum variance of Eisenstein series: numerical checks.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--form", default="even1", help="bundled label (even1, even2, odd1) or path to a form file")
        p.add_argument("--form2", default=None, help="second form for the off-diagonal quantum variance")
        p.add_argument("--p-max", type=int, default=None, dest="p_max", help="prime cutoff for H (euler suite)")
        p.add_argument("--n-max", type=int, default=None, dest="n_max", help="n cutoff for brute-force D (euler suite)")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes for t-grids")
        p.add_argument("--force", action="store_true", help="override desk-scale cost guards")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=SUITES, default="all", help="which checks to run")
    common(v)

    m = sub.add_parser("mu", help="compute mu_t(phi)")
    m.add_argument("--t", type=float, default=None, help="spectral parameter of the Eisenstein series")
    m.add_argument("--method", choices=("closed", "direct", "both"), default="closed",
                   help="closed form, quadrature over the fundamental domain, or both")
    common(m)

    w = sub.add_parser("variance", help="variance estimators over [T, 2T]")
    w.add_argument("--T", type=float, default=None, help="window [T, 2T]")
    w.add_argument("--flavor", choices=FLAVORS, default="weighted", help="which estimator")
    w.add_argument("--step", type=float, default=None, help="t-grid step (default 0.02; 0.05 for second-moment)")
    w.add_argument("--U", type=float, default=2.0, help="smoothing sharpness, 2 <= U <= T^(1/3)")
    w.add_argument("--weight", choices=variance.WEIGHTS, default="sharp", help="window shape")
    w.add_argument("--ladder", action="store_true", help="run T, 2T and 4T")
    common(w)
    return ap


COMMANDS = {"verify": cmd_verify, "mu": cmd_mu, "variance": cmd_variance}


def main(argv=None) -> int:
    cfg = build_parser().parse_args(argv)
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"qve: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        name = getattr(exc, "filename", None) or ""
        print(f"qve: I/O error: {exc.strerror or exc} {name}".rstrip(), file=sys.stderr)
        return EXIT_IO
    except (DomainError, CostGuardError) as exc:
        hint = " (use --force to override)" if "force" in str(exc) else ""
        print(f"qve: {exc}{hint}", file=sys.stderr)
        return EXIT_USAGE
    except QVEError as exc:
        print(f"qve: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
