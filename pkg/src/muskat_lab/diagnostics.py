"""
Per-record measurements, inequality monitors and decay fits.

A record collects the norms of the current field together with the
pointwise monitors of :mod:`muskat_lab.kernel_eval`. Sup norms are taken on
the trigonometric interpolant (see :func:`spectral_core.refined_sup`) so that
monotonicity checks are not polluted by the jitter of grid sampling.
"""

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .kernel_eval import DEFAULT_WINDOW, Window, monitors
from .spectral_core import AlphaParams, ScalarField, fourier_norm, gradient, sup_norms

__all__ = [
    "DiagnosticsRecord",
    "DecayFit",
    "MonotonicityReport",
    "CSV_COLUMNS",
    "initial_norms",
    "record",
    "support_margin",
    "fit_decay",
    "monotonicity_report",
    "write_csv",
    "read_csv",
    "format_float",
]

CSV_COLUMNS = ("t", "dt", "linf", "grad_linf", "l1", "mass", "fnorm_1", "fnorm_2pa",
               "d3_ratio", "c_alpha_min", "support_margin")

# level, relative to ||f0||_inf, that defines the numerical support
SUPPORT_LEVEL = 1e-8


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    dt: float
    linf: float
    grad_linf: float
    l1: float
    mass: float
    fnorm_1: float
    fnorm_2pa: float
    d3_ratio: float | None
    c_alpha_min: float
    support_margin: float
    # not serialized; used by the theorem checks
    grad_l1: float = 0.0
    ball_radius: float | None = None
    window_radius: float = np.inf

    @property
    def gated(self) -> bool:
        """True when the lower-bound ball of the decay argument lies inside
        the flat part of the kernel window."""
        return self.ball_radius is not None and self.ball_radius <= self.window_radius

    def row(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


class DecayFit(NamedTuple):
    exponent: float
    constant: float
    window: tuple
    r_squared: float
    amplitude: float = 1.0


class MonotonicityReport(NamedTuple):
    is_nonincreasing: bool
    worst_violation: float
    worst_index: int | None = None


def initial_norms(f0: ScalarField) -> dict:
    """Norms of the initial datum used by the monitors and envelopes."""
    n = sup_norms(f0, refine=True)
    return {"linf": n.linf, "grad_linf": n.grad_linf, "l1": n.l1, "mass": n.mass,
            "fnorm_1": fourier_norm(f0, 1.0)}


def support_margin(f: ScalarField, level: float) -> float:
    """Distance of ``{|f| > level}`` from the boundary of the periodic cell,
    as a fraction of the cell side (0.5 for an empty set)."""
    g = f.grid
    mask = np.abs(f.values) > level
    if not mask.any():
        return 0.5
    x1, x2 = g.coords()
    d = np.minimum(np.minimum(x1[mask], g.lx - x1[mask]) / g.lx,
                   np.minimum(x2[mask], g.ly - x2[mask]) / g.ly)
    return float(np.clip(np.min(d), 0.0, 0.5))


def record(state, alpha, f0_norms, *, window: Window = DEFAULT_WINDOW,
           delta: float = 0.0) -> DiagnosticsRecord:
    """Measure ``state``; pure, so calling it twice gives identical records.

    ``fnorm_2pa`` is ``||f||_{2+delta+alpha}``. ``f0_norms`` is the mapping
    returned by :func:`initial_norms` for the run's initial datum.
    """
    ap = alpha if isinstance(alpha, AlphaParams) else AlphaParams(alpha)
    f = state.f
    n = sup_norms(f, refine=True)
    linf0 = float(f0_norms["linf"])
    g1, g2 = gradient(f)
    grad_l1 = float(np.sum(np.sort(np.hypot(g1.values, g2.values).ravel())) * f.grid.cell_area)
    if n.linf == 0.0:
        m = None
        cmin = 1.0 + ap.alpha
        d3_ratio = None
        radius = None
    else:
        m = monitors(f, f0_norms, ap, window, grad_sup=n.grad_linf)
        cmin = m.c_alpha_min
        d3_ratio = m.d3_value / m.d3_lower_bound if m.d3_lower_bound else None
        radius = m.ball_radius
    r1, _ = window.radii(f.grid)
    return DiagnosticsRecord(
        t=float(state.t),
        dt=float(state.last_dt),
        linf=n.linf,
        grad_linf=n.grad_linf,
        l1=n.l1,
        mass=n.mass,
        fnorm_1=fourier_norm(f, 1.0),
        fnorm_2pa=fourier_norm(f, 2.0 + delta + ap.alpha),
        d3_ratio=None if d3_ratio is None else float(d3_ratio),
        c_alpha_min=float(cmin),
        support_margin=support_margin(f, SUPPORT_LEVEL * linf0),
        grad_l1=grad_l1,
        ball_radius=radius,
        window_radius=float(r1),
    )


def _series(series):
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be a sequence of (t, value) pairs")
    return arr[:, 0], arr[:, 1]


def _r_squared(y, yhat):
    ss_tot = np.sum((y - np.mean(y)) ** 2)
    if ss_tot == 0:
        return 1.0
    return float(np.clip(1.0 - np.sum((y - yhat) ** 2) / ss_tot, 0.0, 1.0))


def fit_decay(series: Sequence, kind: str = "algebraic") -> DecayFit:
    """Least-squares decay fit on ``log(value)``.

    ``algebraic`` fits ``A (1 + C t)^(-p)``: for each ``C`` the pair
    ``(log A, p)`` is linear, and ``C`` is found by a 1-D search on ``log C``.
    ``exponential`` fits ``A exp(-p t)``. ``exponent`` is ``p`` in both cases.
    """
    t, v = _series(series)
    if t.size < 8:
        raise ValueError("need at least 8 samples")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("values must be positive and finite")
    if not np.ptp(t) > 0:
        raise ValueError("degenerate time window")
    lv = np.log(v)
    window = (float(t.min()), float(t.max()))
    if kind == "exponential":
        A = np.vstack([np.ones_like(t), t]).T
        c, *_ = np.linalg.lstsq(A, lv, rcond=None)
        return DecayFit(float(-c[1]), float(np.exp(c[0])), window, _r_squared(lv, A @ c),
                        float(np.exp(c[0])))
    if kind != "algebraic":
        raise ValueError(f"unknown kind {kind!r}")

    def solve(logc):
        x = np.log1p(np.exp(logc) * t)
        A = np.vstack([np.ones_like(x), x]).T
        c, *_ = np.linalg.lstsq(A, lv, rcond=None)
        r = A @ c - lv
        return float(r @ r), c, A

    # the time scale sets the natural range of C
    tscale = np.ptp(t)
    grid = np.linspace(-12.0, 12.0, 241) - np.log(tscale)
    res = np.array([solve(g)[0] for g in grid])
    i = int(np.argmin(res))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    opt = optimize.minimize_scalar(lambda g: solve(g)[0], bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    logc = opt.x if opt.fun <= res[i] else grid[i]
    _, c, A = solve(logc)
    return DecayFit(float(-c[1]), float(np.exp(logc)), window, _r_squared(lv, A @ c),
                    float(np.exp(c[0])))


def monotonicity_report(series: Sequence, tol: float) -> MonotonicityReport:
    """Check ``s[i+1] <= s[i] + tol``; report the largest positive increment."""
    _, v = _series(series) if len(series) else (None, np.zeros(0))
    if v.size < 2:
        return MonotonicityReport(True, 0.0, None)
    inc = np.diff(v)
    k = int(np.argmax(inc))
    worst = float(max(inc[k], 0.0))
    return MonotonicityReport(bool(np.all(inc <= tol)), worst, k + 1 if worst > 0 else None)


def format_float(x) -> str:
    """Shortest round-trip decimal; empty for absent values."""
    if x is None:
        return ""
    return repr(float(x))


def write_csv(records: Sequence[DiagnosticsRecord], path=None) -> str:
    """Serialize records (header plus one line each); returns the text and
    writes it to ``path`` when given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([format_float(x) for x in r.row()])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path) -> dict:
    """Load a diagnostics CSV into columns; absent values become ``nan``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected header")
    cols = {c: np.array([float(r[i]) if r[i] != "" else np.nan for r in rows[1:]])
            for i, c in enumerate(CSV_COLUMNS)}
    return cols

