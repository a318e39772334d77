"""
Command-line entry point ``muskat-lab``.

Subcommands: ``constants``, ``verify``, ``run``, ``sweep``, ``oracle``.
Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

import argparse
import csv
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import constants as cst
from . import special_fn as sf
from .experiments import (alpha_convergence_study, initial_field, RandomBand, run_scenario,
                          scenario_from_dict, scenario_to_dict, StudyAborted)
from .diagnostics import monotonicity_report, read_csv
from .spectral_core import GridSpec

__all__ = ["main", "load_config", "VERIFY_CHECKS"]

SCHEMA_VERSION = 1
_RUN_KEYS = {"schema_version", "verify"}
_VERIFY_KEYS = {"linf_monotone", "mass_conserved"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config


def load_config(path):
    """Read a run configuration; returns ``(scenario, verify_toggles)``."""
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    try:
        d = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: invalid JSON ({exc})") from exc
    return config_from_dict(d, str(p))


def config_from_dict(d, where="config"):
    if not isinstance(d, dict):
        raise UsageError(f"{where}: top level must be an object")
    if d.get("schema_version") != SCHEMA_VERSION:
        raise UsageError(f"{where}: schema_version must be {SCHEMA_VERSION}")
    d = dict(d)
    d.pop("schema_version")
    verify = d.pop("verify", {})
    if not isinstance(verify, dict) or set(verify) - _VERIFY_KEYS:
        raise UsageError(f"{where}: verify accepts only {sorted(_VERIFY_KEYS)}")
    try:
        s = scenario_from_dict(d)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{where}: {exc}") from exc
    return s, {k: bool(verify.get(k, False)) for k in sorted(_VERIFY_KEYS)}


def config_to_dict(s, verify=None):
    out = {"schema_version": SCHEMA_VERSION, **scenario_to_dict(s)}
    if verify:
        out["verify"] = dict(verify)
    return out


# ---------------------------------------------------------------- helpers


def _out_root(args):
    return Path(args.out or os.environ.get("MUSKAT_LAB_OUT") or "muskat_out")


def _parse_floats(text, what):
    try:
        vals = [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"{what}: {exc}") from exc
    if not vals:
        raise UsageError(f"{what}: empty list")
    return vals


def _fmt(x):
    if x is None:
        return "-"
    return f"{x:.10g}"


def _emit_plot(path, csv_name, title, columns):
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale y",
        "set xlabel 't'",
        f"set title '{title}'",
        "plot " + ", \\\n     ".join(f"'{csv_name}' using 't':'{c}' with linespoints" for c in columns),
        "",
    ]
    Path(path).write_text("\n".join(lines), encoding="utf-8")


# ---------------------------------------------------------------- constants


def cmd_constants(args):
    alphas = _parse_floats(" ".join(args.alpha or []), "--alpha")
    header = ["alpha", "c_alpha", "k0", "mu", "grad_threshold", "c_tilde", "c_decay", "kappa"]
    rows, status = [], 0
    for a in alphas:
        try:
            ca = cst.c_alpha(a)
        except ValueError as exc:
            print(f"alpha={a}: error: {exc}", file=sys.stderr)
            status = 2
            continue
        try:
            k0 = cst.k0_of_alpha(a)
        except ValueError as exc:
            print(f"alpha={a}: error: {exc}", file=sys.stderr)
            k0, status = None, 2
        mu = None
        if args.f1_norm is not None:
            mu = cst.mu_of(a, args.f1_norm)
        gt = cst.grad_threshold(a, args.eps)
        dc = cst.decay_constants(a, args.linf0, args.l1) if args.linf0 else {}
        rows.append([a, ca, k0, mu, gt, dc.get("c_tilde"), dc.get("c_decay"), cst.kernel_prefactor(a)])
    print("  ".join(f"{h:>14s}" for h in header))
    for r in rows:
        print("  ".join(f"{_fmt(x):>14s}" for x in r))
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows([["" if x is None else repr(float(x)) for x in r] for r in rows])
    return status


# ---------------------------------------------------------------- verify


def _check_series(samples, rng):
    # 200 terms leave a tail of ~1e-6 at z = 0.95; 2000 terms are converged
    worst = 0.0
    for z in np.linspace(0.0, 0.95, 20):
        for a in np.arange(0.0, 0.46, 0.05):
            ref = sf.weighted_partial_sum(z, a, 2000)
            val = sf.weighted_series(z, a)
            if ref != 0:
                worst = max(worst, abs(val - ref) / abs(ref))
    return worst <= 1e-10, f"max rel diff {worst:.2e} (tol 1e-10)"


def _check_pv(samples, rng):
    worst = -np.inf
    S = rng.uniform(-100, 100, samples)
    A = rng.uniform(0, 0.95, samples)
    for s, a in zip(S, A):
        bound = cst.c_alpha(a) * abs(s) ** a
        worst = max(worst, abs(sf.pv_exp_integral(s, a)) - bound * (1 + 1e-9))
    lim = abs(sf.pv_exp_integral(1.0, 1e-6) - math.pi)
    ok = worst <= 0 and lim <= 1e-4
    return ok, f"{samples} samples, max(|I| - C|S|^a) = {worst:.3e}; |I(1, 0+) - pi| = {lim:.1e}"


def _check_ode(samples, rng):
    worst = 0.0
    for a in (0.0, 0.25, 0.45):
        for z in np.linspace(-2, 2, 50):
            h = 1e-5
            g = sf.ode_solution_g(z, a)
            dg = (sf.ode_solution_g(z + h, a) - sf.ode_solution_g(z - h, a)) / (2 * h)
            worst = max(worst, abs((1 + z * z) * dg - (3 + a) * z * g - (3 + a) * z * z))
    return worst <= 1e-6, f"max residual {worst:.2e} (tol 1e-6)"


def _check_k0(samples, rng):
    prev, worst = np.inf, 0.0
    for a in np.arange(0.0, 0.451, 0.01):
        k0 = cst.k0_of_alpha(a)
        worst = max(worst, abs(2 * cst.c_alpha(a) * sf.weighted_series(k0, a) - 1))
        if not k0 < prev:
            return False, f"k0 not decreasing at alpha={a:.2f}"
        prev = k0
    k00 = cst.k0_of_alpha(0.0)
    ok = worst <= 1e-10 and abs(k00 - 0.106) <= 1e-3
    return ok, f"k0(0) = {k00:.6f}, root residual {worst:.1e}"


def _check_hyp(samples, rng):
    e1 = abs(sf.hyp2f1(1, 1, 2, -1.0) - math.log(2))
    e2 = abs(sf.hyp2f1(1.5, 2.5, 2.5, -0.25) - 1.25**-1.5)
    return max(e1, e2) <= 1e-12, f"identity errors {e1:.1e}, {e2:.1e}"


VERIFY_CHECKS = {
    "series-identity": _check_series,
    "pv-bound": _check_pv,
    "ode-residual": _check_ode,
    "k0-root": _check_k0,
    "hyp2f1-identities": _check_hyp,
}


def cmd_verify(args):
    names = args.check or list(VERIFY_CHECKS)
    for n in names:
        if n not in VERIFY_CHECKS:
            raise UsageError(f"unknown check {n!r}; choose from {sorted(VERIFY_CHECKS)}")
    rng = np.random.default_rng(args.seed)
    failed = []
    for n in names:
        ok, msg = VERIFY_CHECKS[n](args.samples, rng)
        if n in (args.inject_failure or []):
            ok, msg = False, msg + " [injected failure]"
        print(f"{'PASS' if ok else 'FAIL'} {n}: {msg}")
        if not ok:
            failed.append(n)
    if failed:
        print(f"failing checks: {', '.join(failed)}")
        return 1
    return 0


# ---------------------------------------------------------------- run / sweep / oracle


def _apply_seed(s, seed):
    from dataclasses import replace

    return s if seed is None else replace(s, seed=seed)


def cmd_run(args):
    s, verify = load_config(args.config)
    s = _apply_seed(s, args.seed)
    final, path = run_scenario(s, _out_root(args), threads=args.threads)
    print(f"wrote {path} (t={final.t:g}, steps={final.step_count})")
    if args.emit_plots:
        _emit_plot(path / "norms.plt", "diagnostics.csv", s.name, ["linf", "grad_linf", "fnorm_1"])
    status = 0
    cols = read_csv(path / "diagnostics.csv")
    if verify.get("linf_monotone"):
        rep = monotonicity_report(list(zip(cols["t"], cols["linf"])), 1e-10)
        print(f"{'PASS' if rep.is_nonincreasing else 'FAIL'} linf_monotone: worst increase "
              f"{rep.worst_violation:.2e}")
        status |= 0 if rep.is_nonincreasing else 1
    if verify.get("mass_conserved"):
        drift = float(np.max(np.abs(cols["mass"] - cols["mass"][0])))
        ok = drift <= 1e-8 * max(cols["l1"][0], 1e-300)
        print(f"{'PASS' if ok else 'FAIL'} mass_conserved: drift {drift:.2e}")
        status |= 0 if ok else 1
    return status


def cmd_sweep(args):
    s, _ = load_config(args.config)
    s = _apply_seed(s, args.seed)
    alphas = _parse_floats(args.alphas, "--alphas")
    try:
        res = alpha_convergence_study(s, alphas, args.t_star)
    except StudyAborted as exc:
        print(f"study aborted: {exc}", file=sys.stderr)
        return 1
    out = _out_root(args) / f"{s.name}_sweep"
    out.mkdir(parents=True, exist_ok=True)
    d = res.as_dict()
    (out / "convergence.json").write_text(json.dumps(d, indent=2) + "\n", encoding="utf-8")
    with open(out / "convergence.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "l2_error", "hk_error", "l1_error"])
        for row in zip(res.alphas, res.l2_errors, res.hk_errors, res.l1_errors):
            w.writerow([repr(float(x)) for x in row])
    if args.emit_plots:
        (out / "convergence.plt").write_text(
            "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\n"
            "plot 'convergence.csv' using 1:2 with linespoints, '' using 1:4 with linespoints\n",
            encoding="utf-8")
    print(json.dumps(d, indent=2))
    order = np.argsort(res.alphas)[::-1]
    l2 = np.asarray(res.l2_errors)[order]
    ok = bool(np.all(np.diff(l2) < 0))
    print(f"{'PASS' if ok else 'FAIL'} l2_errors decrease with alpha")
    return 0 if ok else 1


def cmd_oracle(args):
    from .kernel_eval import rhs_direct, rhs_series, rhs_split
    from .spectral_core import ScalarField

    if args.n < 16 or args.n % 2:
        raise UsageError("--n must be even and >= 16")
    g = GridSpec(args.n, args.n, 2 * np.pi, 2 * np.pi)
    seed = 0 if args.seed is None else args.seed
    f = initial_field(RandomBand(1.0, args.kmax), g, seed)
    f = ScalarField(g, args.amp * f.values)
    a = args.alpha
    d = rhs_direct(f, a).values
    s = rhs_split(f, a).values
    try:
        r = rhs_series(f, a, args.n_max).values
    except ValueError as exc:
        print(f"series evaluator unavailable: {exc}")
        r = None
    if args.amp == 0:
        ok = not np.any(d) and not np.any(s) and (r is None or not np.any(r))
        print(f"{'PASS' if ok else 'FAIL'} zero data gives exact zeros")
        return 0 if ok else 1
    norm = float(np.linalg.norm(s))

    def rel(x, y):
        return float(np.linalg.norm(x - y)) / norm

    pairs = {"direct-split": rel(d, s)}
    if r is not None:
        pairs.update({"series-split": rel(r, s), "series-direct": rel(r, d)})
    ok = r is not None and all(v <= args.tol for v in pairs.values())
    for k, v in pairs.items():
        print(f"{k:>14s}: {v:.3e}")
    print(f"{'PASS' if ok else 'FAIL'} three-way agreement within {args.tol:g} "
          f"(amp={args.amp:g}, alpha={a:g}, n={args.n})")
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output root (default $MUSKAT_LAB_OUT)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="cap on worker threads")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--emit-plots", action="store_true", default=argparse.SUPPRESS,
                        help="write gnuplot scripts next to the CSV outputs")

    p = argparse.ArgumentParser(prog="muskat-lab", parents=[common],
                                description="alpha-Muskat simulation laboratory")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("constants", parents=[common], help="print the explicit constants")
    c.add_argument("--alpha", nargs="+", help="alpha values (space or comma separated)")
    c.add_argument("--eps", type=float, default=0.1)
    c.add_argument("--f1-norm", type=float, default=None, help="||f0||_1 for mu")
    c.add_argument("--linf0", type=float, default=1.0)
    c.add_argument("--l1", type=float, default=1.0)
    c.add_argument("--csv", default=None)
    c.set_defaults(func=cmd_constants)

    v = sub.add_parser("verify", parents=[common], help="special-function and constants checks")
    v.add_argument("--check", action="append", help="run only this check (repeatable)")
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--inject-failure", action="append", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("run", parents=[common], help="run a scenario from a JSON config")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", parents=[common], help="alpha -> 0 convergence study")
    s.add_argument("--alphas", required=True)
    s.add_argument("--t-star", type=float, default=1.0)
    s.add_argument("config")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", parents=[common], help="three-way RHS agreement")
    o.add_argument("--amp", type=float, default=0.1)
    o.add_argument("--alpha", type=float, default=0.0)
    o.add_argument("--n", type=int, default=128)
    o.add_argument("--kmax", type=int, default=4)
    o.add_argument("--n-max", type=int, default=8)
    o.add_argument("--tol", type=float, default=1e-4)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    # numba reports an old TBB runtime on its first parallel launch
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    p = _parser()
    try:
        args = p.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for k, dflt in (("out", None), ("threads", None), ("seed", None), ("emit_plots", False)):
        if not hasattr(args, k):
            setattr(args, k, dflt)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        import numba

        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        return int(args.func(args))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
