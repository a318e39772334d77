"""
Scenario library and campaign drivers.

A :class:`Scenario` fully determines a run: initial datum, grid, ``alpha``
and stepper settings. :func:`run_scenario` writes a self-describing run
directory::

    <out>/<name>/metadata.json
    <out>/<name>/diagnostics.csv
    <out>/<name>/fields/f_0000.mskf ...

Field snapshots use the MSKF binary layout (little endian): magic ``MSKF``,
``u32`` version 1, ``u32 nx``, ``u32 ny``, ``f64 lx, ly, t, alpha`` and then
``nx*ny`` ``f64`` values in row-major order with ``x1`` fastest.
"""

import hashlib
import json
import struct
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import __version__
from .constants import (c_alpha, constants_report, decay_constants, grad_decay_constant,
                        grad_threshold, k0_of_alpha, kernel_prefactor, mu_of)
from .diagnostics import (DiagnosticsRecord, initial_norms, monotonicity_report, record,
                          write_csv)
from .kernel_eval import DEFAULT_WINDOW, DirectQuadrature, SeriesTruncated, SplitSpectral, Window
from .spectral_core import AlphaParams, GridSpec, ScalarField, forward, fourier_norm
from .stepper import Hooks, SimState, StepperConfig, StepperError, run

__all__ = [
    "Gaussian",
    "CosineMode",
    "RandomBand",
    "PositiveBump",
    "Scenario",
    "ConvergenceResult",
    "StudyAborted",
    "initial_field",
    "canonical_scenarios",
    "scaled",
    "run_scenario",
    "simulate",
    "alpha_convergence_study",
    "theorem_suite",
    "write_field",
    "read_field",
    "scenario_to_dict",
    "scenario_from_dict",
    "config_hash",
]

MSKF_MAGIC = b"MSKF"
MSKF_VERSION = 1
_MSKF_HEADER = struct.Struct("<4sIIIdddd")


# ---------------------------------------------------------------- initial data


@dataclass(frozen=True)
class Gaussian:
    """``amp exp(-|x - center|^2 / (2 sigma^2))``; ``center`` defaults to the
    middle of the cell."""

    amp: float
    sigma: float
    center: tuple | None = None
    kind = "gaussian"


@dataclass(frozen=True)
class CosineMode:
    """``amp cos(k . x)`` with ``k`` given as integer mode numbers."""

    amp: float
    k: tuple = (1, 0)
    kind = "cosine_mode"


@dataclass(frozen=True)
class RandomBand:
    """Random field on the modes ``0 < |n| <= kmax`` scaled to ``max|f| = amp``.

    ``seed=None`` takes the scenario seed.
    """

    amp: float
    kmax: int = 4
    seed: int | None = None
    kind = "random_band"


@dataclass(frozen=True)
class PositiveBump:
    """Centered Gaussian with ``amp > 0``."""

    amp: float
    sigma: float
    kind = "positive_bump"


_SHAPES = {c.kind: c for c in (Gaussian, CosineMode, RandomBand, PositiveBump)}


def _check_shape(d):
    if not np.isfinite(d.amp):
        raise ValueError("amp must be finite")
    if isinstance(d, (Gaussian, PositiveBump)) and not d.sigma > 0:
        raise ValueError("sigma must be > 0")
    if isinstance(d, PositiveBump) and not d.amp > 0:
        raise ValueError("positive_bump needs amp > 0")
    if isinstance(d, RandomBand) and d.kmax < 1:
        raise ValueError("kmax must be >= 1")


def initial_field(d, grid: GridSpec, seed: int = 0) -> ScalarField:
    """Sample an initial datum on ``grid``."""
    _check_shape(d)
    x1, x2 = grid.coords()
    if isinstance(d, (Gaussian, PositiveBump)):
        c = getattr(d, "center", None)
        c1, c2 = (0.5 * grid.lx, 0.5 * grid.ly) if c is None else c
        r2 = (x1 - c1) ** 2 + (x2 - c2) ** 2
        return ScalarField(grid, d.amp * np.exp(-r2 / (2.0 * d.sigma**2)))
    if isinstance(d, CosineMode):
        k = (d.k, 0) if np.isscalar(d.k) else d.k
        ph = 2 * np.pi * (k[0] * x1 / grid.lx + k[1] * x2 / grid.ly)
        return ScalarField(grid, d.amp * np.cos(ph))
    if isinstance(d, RandomBand):
        rng = np.random.default_rng(seed if d.seed is None else d.seed)
        v = np.zeros(grid.shape)
        for n1 in range(0, d.kmax + 1):
            for n2 in range(-d.kmax, d.kmax + 1):
                # one representative of each +-n pair
                if n1 == 0 and n2 <= 0 or n1 * n1 + n2 * n2 > d.kmax**2:
                    continue
                a, b = rng.standard_normal(2)
                ph = 2 * np.pi * (n1 * x1 / grid.lx + n2 * x2 / grid.ly)
                v += a * np.cos(ph) + b * np.sin(ph)
        m = np.max(np.abs(v))
        return ScalarField(grid, d.amp * v / m if m > 0 else v)
    raise TypeError(f"unknown initial data {d!r}")


# ---------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class Scenario:
    name: str
    initial_data: object
    grid: GridSpec
    alpha: float
    stepper: StepperConfig = StepperConfig()
    seed: int = 0
    record_cadence: int = 1
    snapshot_times: tuple = ()
    delta: float = 0.0
    window: Window = DEFAULT_WINDOW

    def __post_init__(self):
        AlphaParams(self.alpha)
        _check_shape(self.initial_data)
        if not self.name or "/" in self.name or self.name.startswith("."):
            raise ValueError(f"invalid scenario name {self.name!r}")
        if self.record_cadence < 1:
            raise ValueError("record_cadence must be >= 1")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")

    def field(self) -> ScalarField:
        return initial_field(self.initial_data, self.grid, self.seed)


def _method_to_dict(m):
    if isinstance(m, DirectQuadrature):
        return {"kind": "direct", "cutoff_cells": m.cutoff_cells}
    if isinstance(m, SplitSpectral):
        return {"kind": "split", "quad_refinement": m.quad_refinement}
    return {"kind": "series", "n_max": m.n_max}


def _method_from_dict(d):
    d = dict(d)
    kind = d.pop("kind", None)
    cls = {"direct": DirectQuadrature, "split": SplitSpectral, "series": SeriesTruncated}.get(kind)
    if cls is None:
        raise ValueError(f"unknown rhs_method kind {kind!r}")
    return cls(**_strict(d, cls))


def _strict(d, cls, exclude=()):
    allowed = {f for f in cls.__dataclass_fields__ if f not in exclude}
    extra = set(d) - allowed
    if extra:
        raise ValueError(f"unknown keys for {cls.__name__}: {sorted(extra)}")
    return d


def scenario_to_dict(s: Scenario) -> dict:
    """Plain JSON-ready description; inverse of :func:`scenario_from_dict`."""
    init = {"kind": s.initial_data.kind, **asdict(s.initial_data)}
    if "center" in init and init["center"] is not None:
        init["center"] = [float(c) for c in init["center"]]
    if "k" in init and not np.isscalar(init["k"]):
        init["k"] = [int(c) for c in init["k"]]
    st = {k: getattr(s.stepper, k) for k in StepperConfig.__dataclass_fields__
          if k not in ("rhs_method", "window")}
    st["rhs_method"] = _method_to_dict(s.stepper.rhs_method)
    return {
        "name": s.name,
        "alpha": float(s.alpha),
        "seed": int(s.seed),
        "grid": {"nx": s.grid.nx, "ny": s.grid.ny, "lx": float(s.grid.lx), "ly": float(s.grid.ly)},
        "initial_data": init,
        "stepper": st,
        "output": {"record_cadence": s.record_cadence,
                   "snapshot_times": [float(t) for t in s.snapshot_times]},
        "delta": float(s.delta),
        "window": {"r1_frac": s.window.r1_frac, "r2_frac": s.window.r2_frac},
    }


_SCENARIO_KEYS = {"name", "alpha", "seed", "grid", "initial_data", "stepper", "output", "delta",
                  "window"}


def scenario_from_dict(d: dict) -> Scenario:
    """Build a scenario, rejecting unknown keys at every level."""
    extra = set(d) - _SCENARIO_KEYS
    if extra:
        raise ValueError(f"unknown keys: {sorted(extra)}")
    for k in ("name", "alpha", "grid", "initial_data"):
        if k not in d:
            raise ValueError(f"missing key {k!r}")
    grid = GridSpec(**_strict(dict(d["grid"]), GridSpec))
    init = dict(d["initial_data"])
    kind = init.pop("kind", None)
    if kind not in _SHAPES:
        raise ValueError(f"unknown initial_data kind {kind!r}")
    cls = _SHAPES[kind]
    init = _strict(init, cls)
    if init.get("center") is not None:
        init["center"] = tuple(float(c) for c in init["center"])
    if "k" in init and not np.isscalar(init["k"]):
        init["k"] = tuple(int(c) for c in init["k"])
    st = dict(d.get("stepper", {}))
    if "rhs_method" in st:
        st["rhs_method"] = _method_from_dict(st["rhs_method"])
    st = _strict(st, StepperConfig, exclude=("window",))
    win = Window(**_strict(dict(d.get("window", {})), Window))
    out = dict(d.get("output", {}))
    extra = set(out) - {"record_cadence", "snapshot_times"}
    if extra:
        raise ValueError(f"unknown output keys: {sorted(extra)}")
    return Scenario(
        name=str(d["name"]),
        initial_data=cls(**init),
        grid=grid,
        alpha=float(d["alpha"]),
        stepper=StepperConfig(**st, window=win),
        seed=int(d.get("seed", 0)),
        record_cadence=int(out.get("record_cadence", 1)),
        snapshot_times=tuple(float(t) for t in out.get("snapshot_times", ())),
        delta=float(d.get("delta", 0.0)),
        window=win,
    )


def config_hash(s: Scenario, *, without_seed: bool = False) -> str:
    d = scenario_to_dict(s)
    if without_seed:
        d.pop("seed")
        d["initial_data"].pop("seed", None)
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


CANONICAL_L = 4 * np.pi


def canonical_scenarios(alpha: float, n: int = 128, t_end: float = 1.0, rtol: float = 1e-4,
                        seed: int = 7) -> list:
    """The four canonical shapes on ``[0, 4 pi)^2``.

    Amplitudes keep every initial slope below the gradient threshold at
    ``eps = 0.1`` (the threshold grows with ``alpha``).
    """
    grid = GridSpec(n, n, CANONICAL_L, CANONICAL_L)
    c = 0.5 * CANONICAL_L
    cfg = StepperConfig(dt_init=0.05, dt_max=0.25, t_end=t_end, rtol=rtol)
    shapes = [
        ("gaussian", Gaussian(-0.4, 0.6, (c + 0.3, c - 0.2))),
        ("cosine_mode", CosineMode(0.2, (1, 1))),
        ("random_band", RandomBand(0.15, 4)),
        ("positive_bump", PositiveBump(0.3, 0.6)),
    ]
    return [Scenario(f"{name}_a{alpha:g}", d, grid, alpha, cfg, seed=seed) for name, d in shapes]


def scaled(s: Scenario, *, fnorm1: float | None = None, grad_linf: float | None = None,
           name: str | None = None) -> Scenario:
    """Rescale the amplitude to hit a target ``||f0||_1`` or ``||grad f0||_inf``."""
    from .spectral_core import sup_norms

    f0 = s.field()
    if fnorm1 is not None:
        cur = fourier_norm(f0, 1.0)
        target = fnorm1
    elif grad_linf is not None:
        cur = sup_norms(f0, refine=True).grad_linf
        target = grad_linf
    else:
        raise ValueError("give fnorm1 or grad_linf")
    if cur == 0:
        raise ValueError("cannot rescale zero data")
    d = replace(s.initial_data, amp=s.initial_data.amp * target / cur)
    return replace(s, initial_data=d, name=name or s.name)


# ---------------------------------------------------------------- field files


def write_field(path, f: ScalarField, t: float, alpha: float):
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_MSKF_HEADER.pack(MSKF_MAGIC, MSKF_VERSION, g.nx, g.ny, g.lx, g.ly, t, alpha))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path):
    """Return ``(field, t, alpha)``."""
    with open(path, "rb") as fh:
        head = fh.read(_MSKF_HEADER.size)
        if len(head) != _MSKF_HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, ver, nx, ny, lx, ly, t, alpha = _MSKF_HEADER.unpack(head)
        if magic != MSKF_MAGIC or ver != MSKF_VERSION:
            raise ValueError(f"{path}: not an MSKF v1 file")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != nx * ny:
        raise ValueError(f"{path}: expected {nx * ny} values, found {data.size}")
    return ScalarField(GridSpec(nx, ny, lx, ly), data.reshape(ny, nx).astype(float)), t, alpha


# ---------------------------------------------------------------- runs


class RunResult(NamedTuple):
    final: SimState
    records: list
    f0_norms: dict


def simulate(s: Scenario, *, snapshot=None) -> RunResult:
    """Integrate a scenario in memory, recording diagnostics."""
    ap = AlphaParams(s.alpha)
    f0 = s.field()
    norms = initial_norms(f0)
    records: list[DiagnosticsRecord] = []
    hooks = Hooks(
        record=lambda st: records.append(record(st, ap, norms, window=s.window, delta=s.delta)),
        snapshot=snapshot,
        cadence=s.record_cadence,
        snapshot_times=s.snapshot_times,
    )
    cfg = replace(s.stepper, window=s.window)
    final = run(f0, cfg, ap, hooks)
    return RunResult(final, records, norms)


def _constants_block(s: Scenario, norms: dict) -> dict:
    a = s.alpha
    rep = constants_report(
        a,
        f1_norm=norms["fnorm_1"] if norms["fnorm_1"] < 1 else None,
        eps=0.1,
        linf0=norms["linf"] if norms["linf"] > 0 else None,
        l1_0=norms["l1"],
    ).as_dict()
    rep["normalization"] = ("f_t = kappa(alpha) * contour integral; linear part is "
                            "exactly -Lambda^(1+alpha)")
    return rep


def run_scenario(s: Scenario, out_root, *, threads: int | None = None):
    """Run ``s`` and write its directory under ``out_root``.

    Returns ``(final_state, path)``. Output is deterministic for a fixed
    scenario and thread count.
    """
    out = Path(out_root) / s.name
    (out / "fields").mkdir(parents=True, exist_ok=True)
    for old in (out / "fields").glob("*.mskf"):
        old.unlink()
    snaps = []

    def snapshot(st):
        snaps.append(st.t)
        write_field(out / "fields" / f"f_{len(snaps) - 1:04d}.mskf", st.f, st.t, s.alpha)

    s_run = replace(s, snapshot_times=tuple(sorted(set(s.snapshot_times) | {0.0, s.stepper.t_end})))
    res = simulate(s_run, snapshot=snapshot)
    write_csv(res.records, out / "diagnostics.csv")
    meta = {
        "package": "muskat_lab",
        "version": __version__,
        "config": scenario_to_dict(s),
        "config_hash": config_hash(s),
        "threads": threads,
        "kappa": kernel_prefactor(s.alpha),
        "initial_norms": res.f0_norms,
        "constants": _constants_block(s, res.f0_norms),
        "final": {"t": res.final.t, "steps": res.final.step_count},
        "snapshots": [{"file": f"fields/f_{i:04d}.mskf", "t": t} for i, t in enumerate(snaps)],
    }
    with open(out / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return res.final, out


# ---------------------------------------------------------------- convergence


class StudyAborted(RuntimeError):
    """A member run diverged or left the common existence window."""


@dataclass
class ConvergenceResult:
    alphas: list
    l2_errors: list
    hk_errors: list
    l1_errors: list
    slope: float
    k: int = 4
    t_star: float = 1.0

    def as_dict(self):
        return asdict(self)


def _hk_surrogate(f: ScalarField) -> float:
    return fourier_norm(f, 4.0) + float(np.sqrt(np.sum(f.values**2) * f.grid.cell_area))


def _hk_norm(f: ScalarField, k: int) -> float:
    # ||f||_{H^k} with the weight (1 + |xi|^2)^k, in the cell-area normalization
    c = forward(f).coeffs
    w = (1.0 + f.grid.kabs() ** 2) ** k
    return float(np.sqrt(np.sum(w * np.abs(c) ** 2) * f.grid.lx * f.grid.ly))


def alpha_convergence_study(base: Scenario, alphas: Sequence[float], t_star: float = 1.0, *,
                            hk_ceiling: float = 1e4, k: int = 4) -> ConvergenceResult:
    """Compare runs at each ``alpha`` with the ``alpha = 0`` run at ``t_star``.

    All member runs share ``f0``, grid and stepper tolerances. A member whose
    H^4 surrogate exceeds ``hk_ceiling`` is outside the common window and
    aborts the study.
    """
    alphas = [float(a) for a in alphas]
    if any(a < 0 or a >= 1 for a in alphas):
        raise ValueError("alphas must lie in [0, 1)")
    cfg = replace(base.stepper, t_end=t_star)

    def member(a):
        s = replace(base, alpha=a, stepper=cfg, snapshot_times=(), name=f"{base.name}_a{a:g}")
        peak = [_hk_surrogate(s.field())]

        def watch(st):
            peak[0] = max(peak[0], _hk_surrogate(st.f))
            if peak[0] > hk_ceiling:
                raise StudyAborted(f"alpha={a}: H^4 surrogate {peak[0]:.3g} above ceiling at t={st.t:.4g}")

        try:
            final = run(s.field(), replace(cfg, window=base.window), AlphaParams(a), Hooks(step=watch))
        except StepperError as exc:
            raise StudyAborted(f"alpha={a}: {exc}") from exc
        return final.f

    ref = member(0.0)
    l2, hk, l1 = [], [], []
    for a in alphas:
        fa = ref if a == 0.0 else member(a)
        g = ScalarField(ref.grid, fa.values - ref.values)
        dA = ref.grid.cell_area
        l2.append(float(np.sqrt(np.sum(g.values**2) * dA)))
        hk.append(_hk_norm(g, k))
        l1.append(float(np.sum(np.abs(g.values)) * dA))
    slope = float("nan")
    pos = [(a, e) for a, e in zip(alphas, l2) if a > 0 and e > 0]
    if len(pos) >= 2:
        pos.sort()
        sel = pos[:3]
        slope = float(np.polyfit(np.log([p[0] for p in sel]), np.log([p[1] for p in sel]), 1)[0])
    return ConvergenceResult(alphas, l2, hk, l1, slope, k, float(t_star))


# ---------------------------------------------------------------- theorem suite


@dataclass
class Check:
    """One theorem check: the hypothesis gate and, if met, the conclusion."""

    name: str
    hypothesis_met: bool
    hypothesis: str
    passed: bool | None = None
    detail: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if not self.hypothesis_met:
            return "hypothesis not met"
        return "pass" if self.passed else "FAIL"


def _series(records, attr, pred=lambda r: True):
    return [(r.t, getattr(r, attr)) for r in records if pred(r)]


def _envelope_check(records, attr, v0, c, alpha, pred, tol=1e-10):
    p = 2.0 / (1.0 + alpha)
    worst = -np.inf
    n = 0
    for r in records:
        if not pred(r):
            continue
        env = v0 * (1.0 + c * r.t) ** (-p)
        worst = max(worst, getattr(r, attr) / env - 1.0)
        n += 1
    return n, (worst if n else None)


def _gated_prefix(records, pred):
    out = []
    for r in records:
        if not pred(r):
            break
        out.append(r)
    return out


def evaluate_checks(s: Scenario, records: list, f0_norms: dict, *, eps: float = 0.1) -> list:
    """Apply checks (a)-(f) to a finished run."""
    a = s.alpha
    kappa = kernel_prefactor(a)
    checks = []
    r0 = records[0]
    f0 = s.field()
    positive = bool(np.min(f0.values) >= 0 and f0_norms["linf"] > 0)

    # (a) Wiener-norm monotonicity and the dissipation integral
    k0 = k0_of_alpha(a) if (a == 0 or 0 < a < 0.5) else None
    hyp = k0 is not None and r0.fnorm_1 < k0
    ch = Check("a_fnorm1_monotone", hyp, f"||f0||_1 < k0(alpha) (alpha < 1/2)")
    if hyp:
        rep = monotonicity_report(_series(records, "fnorm_1"), 1e-8)
        mu = mu_of(a, r0.fnorm_1)
        t = np.array([r.t for r in records])
        v = np.array([r.fnorm_2pa for r in records])
        integral = float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(t))) if t.size > 1 else 0.0
        bound = fourier_norm(f0, 1.0 + s.delta) / mu
        ch.passed = rep.is_nonincreasing and integral <= bound
        ch.detail = {"worst_increase": rep.worst_violation, "k0": k0, "mu": mu, "delta": s.delta,
                     "integral": integral, "bound": bound}
    checks.append(ch)

    # (b) L-infinity maximum principle
    rep = monotonicity_report(_series(records, "linf"), 1e-10)
    checks.append(Check("b_linf_monotone", True, "none", rep.is_nonincreasing,
                        {"worst_increase": rep.worst_violation}))

    # (c) D3 lower bound for nonnegative data
    ratios = [r.d3_ratio for r in records if r.gated and r.d3_ratio is not None]
    ch = Check("c_d3_ratio", positive and bool(ratios), "f0 >= 0, lower-bound ball inside window")
    if ch.hypothesis_met:
        ch.passed = min(ratios) >= 1.0
        ch.detail = {"gated_records": len(ratios), "min_ratio": min(ratios)}
    checks.append(ch)

    # (d) gradient maximum principle below the slope threshold
    thr = grad_threshold(a, eps)
    grad0 = f0_norms["grad_linf"]
    hyp_d = grad0 < thr
    ch = Check("d_grad_monotone", hyp_d, f"||grad f0||_inf < threshold(alpha, eps={eps})")
    if hyp_d:
        rep = monotonicity_report(_series(records, "grad_linf"), 1e-8)
        cmin = min(r.c_alpha_min for r in records)
        ch.passed = rep.is_nonincreasing and cmin > eps
        ch.detail = {"worst_increase": rep.worst_violation, "c_alpha_min": cmin, "threshold": thr}
    checks.append(ch)

    # (e) decay envelopes, time in kappa units
    linf0, l1_0 = f0_norms["linf"], f0_norms["l1"]
    c_dec = kappa * decay_constants(a, linf0, l1_0)["c_decay"] if linf0 > 0 else 0.0
    m_t = max(r.grad_l1 for r in records)
    c_sh = kappa * grad_decay_constant(a, eps, linf0, grad0, m_t) if hyp_d else 0.0
    r1 = r0.window_radius

    def grad_gate(r):
        return r.grad_linf > 0 and np.sqrt((2 * m_t / np.pi + 1) / r.grad_linf) <= r1

    lin_window = _gated_prefix(records, lambda r: r.gated)
    grad_window = _gated_prefix(records, grad_gate)
    use_lin = positive and bool(lin_window)
    use_grad = hyp_d and bool(grad_window)
    ch = Check("e_envelopes", use_lin or use_grad,
               "f0 >= 0 (L-inf) or slope threshold (gradient), ball inside window")
    if ch.hypothesis_met:
        det, ok = {"c_decay": c_dec, "c_sharp": c_sh, "M_T": m_t}, True
        if use_lin:
            n, worst = _envelope_check(lin_window, "linf", linf0, c_dec, a, lambda r: True)
            det.update(linf_records=n, linf_worst=worst)
            ok &= n > 0 and worst <= 1e-10
        if use_grad:
            n, worst = _envelope_check(grad_window, "grad_linf", grad0, c_sh, a, lambda r: True)
            det.update(grad_records=n, grad_worst=worst)
            ok &= n > 0 and worst <= 1e-10
        ch.passed, ch.detail = bool(ok), det
    checks.append(ch)

    # (f) W^{1,inf} envelope with the smaller constant
    ids = {id(r) for r in lin_window}
    both = [r for r in grad_window if id(r) in ids]
    ch = Check("f_w1inf_envelope", positive and hyp_d and bool(both),
               "f0 >= 0 and slope threshold, both balls inside window")
    if ch.hypothesis_met:
        c_star = min(c_dec, c_sh)
        p = 2.0 / (1.0 + a)
        w0 = linf0 + grad0
        worst = max(((r.linf + r.grad_linf) / (w0 * (1 + c_star * r.t) ** (-p)) - 1.0 for r in both),
                    default=None)
        ch.passed = worst <= 1e-10
        ch.detail = {"c_star": c_star, "records": len(both), "worst": worst}
    checks.append(ch)
    return checks


def theorem_suite(alpha: float, scenarios: Sequence[Scenario] | None = None, *,
                  eps: float = 0.1) -> dict:
    """Run the scenarios and report every check per scenario.

    Hypotheses and conclusions are kept separate: a check whose hypothesis
    fails carries no verdict.
    """
    if scenarios is None:
        scenarios = canonical_scenarios(alpha)
    report = {"alpha": float(alpha), "eps": eps, "c_alpha": c_alpha(alpha), "runs": []}
    all_ok = True
    for s in scenarios:
        res = simulate(s)
        checks = evaluate_checks(s, res.records, res.f0_norms, eps=eps)
        entry = {"scenario": s.name, "records": len(res.records), "checks": []}
        for c in checks:
            e = {"name": c.name, "hypothesis": c.hypothesis, "hypothesis_met": c.hypothesis_met,
                 "status": c.status}
            if c.hypothesis_met:
                e["conclusion"] = {"passed": bool(c.passed), **c.detail}
                all_ok &= bool(c.passed)
            entry["checks"].append(e)
        report["runs"].append(entry)
    report["all_passed"] = bool(all_ok)
    return report
