"""
Right-hand side of the contour equation and pointwise inequality monitors.

The evolution is

    f_t(x) = kappa PV int (grad f(x) - grad f(x-y)) . y
                         / [|y|^2 + (f(x) - f(x-y))^2]^beta dy,

with ``beta = (3 + alpha)/2`` and ``kappa = kappa(alpha)`` normalizing the
linear part to ``-Lambda^(1+alpha)``. Writing ``D = (f(x) - f(x-y))/|y|`` and
``G = (grad f(x) - grad f(x-y)) . y/|y|`` the integrand is

    K = |y|^(-2-alpha) G (1 + D^2)^(-beta) = L - L R_alpha(D),

where ``L`` is its linear part. Three evaluators are provided:

* ``rhs_direct``  integrates ``K`` itself.
* ``rhs_split``   applies ``-Lambda^(1+alpha)`` spectrally and integrates
  ``L R_alpha(D)``.
* ``rhs_series``  replaces ``R_alpha`` by its truncated power series.

All real-space integrals use a smooth radial window ``W`` supported inside
the periodic cell. The windowed lattice sum is symmetrized over ``+-y`` and
corrected for the ``|y|^(-1-alpha)`` singularity with lattice zeta constants
(see :mod:`muskat_lab.lattice`); the linear far field ``(1 - W) L`` is
applied exactly as a Fourier multiplier.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import special

from . import _pairsum
from .constants import kernel_prefactor
from .lattice import lattice_zeta
from .spectral_core import (AlphaParams, GridSpec, ScalarField, SpectralField, derivative,
                            forward, inverse, refined_sup, spectral_shift)
from .special_fn import coeff_table

__all__ = [
    "Window",
    "DirectQuadrature",
    "SplitSpectral",
    "SeriesTruncated",
    "KernelMonitors",
    "rhs_direct",
    "rhs_split",
    "rhs_series",
    "evaluate",
    "linear_symbol",
    "monitors",
]

_N_COEF = 96
_POLY_DMAX = 0.7


@dataclass(frozen=True)
class Window:
    """Smooth radial cutoff ``W(r)``: 1 below ``r1``, 0 beyond ``r2``.

    Radii are fractions of half the shorter period.
    """

    r1_frac: float = 0.5
    r2_frac: float = 0.9

    def __post_init__(self):
        if not (0 < self.r1_frac < self.r2_frac <= 1.0):
            raise ValueError("need 0 < r1_frac < r2_frac <= 1")

    def radii(self, grid: GridSpec):
        half = 0.5 * min(grid.lx, grid.ly)
        return self.r1_frac * half, self.r2_frac * half

    def __call__(self, r, grid: GridSpec):
        r1, r2 = self.radii(grid)
        t = np.clip((r2 - np.asarray(r, dtype=float)) / (r2 - r1), 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
            b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        return a / (a + b)


DEFAULT_WINDOW = Window()


@dataclass(frozen=True)
class DirectQuadrature:
    """Quadrature of the full contour kernel.

    ``cutoff_cells`` lattice radius inside which the sum is replaced by the
    local Taylor model of the kernel.
    """

    cutoff_cells: int = 1

    def __post_init__(self):
        if self.cutoff_cells < 1:
            raise ValueError("cutoff_cells must be >= 1")


@dataclass(frozen=True)
class SplitSpectral:
    """Exact linear part plus quadrature of the nonlinear remainder.

    ``quad_refinement`` sets the angular resolution (``32 q`` samples) of the
    singular correction.
    """

    quad_refinement: int = 2

    def __post_init__(self):
        if self.quad_refinement < 1:
            raise ValueError("quad_refinement must be >= 1")


@dataclass(frozen=True)
class SeriesTruncated:
    """Split form with ``R_alpha`` truncated after ``n_max`` terms."""

    n_max: int = 8

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")


class KernelMonitors(NamedTuple):
    d3_value: float | None
    d3_lower_bound: float | None
    c_alpha_min: float
    dyf_sup: float
    ball_radius: float | None


class _Setup:
    """Offsets, weights and multipliers for one (grid, alpha, window)."""

    def __init__(self, grid: GridSpec, alpha: float, window: Window):
        if not np.isclose(grid.hx, grid.hy, rtol=1e-12, atol=0):
            raise ValueError("real-space quadrature needs square cells (lx/nx == ly/ny)")
        self.grid = grid
        self.alpha = alpha
        self.window = window
        self.h = grid.hx
        self.kappa = kernel_prefactor(alpha)
        self.beta = 0.5 * (3.0 + alpha)
        r1, r2 = window.radii(grid)
        self.r1, self.r2 = r1, r2
        P = int(np.ceil(r2 / self.h))
        self.P = P
        a, b = np.meshgrid(np.arange(-P, P + 1), np.arange(0, P + 1), indexing="xy")
        a, b = a.ravel(), b.ravel()
        half = (b > 0) | ((b == 0) & (a > 0))
        a, b = a[half], b[half]
        rn = np.hypot(a, b)
        keep = rn * self.h < r2
        a, b, rn = a[keep], b[keep], rn[keep]
        ang = np.arctan2(b, a)
        # radial-then-angular accumulation order
        order = np.lexsort((ang, rn))
        self.a, self.b, self.rn = a[order], b[order], rn[order]
        r = self.rn * self.h
        self.w_full = self.h**2 * window(r, grid) * r ** (-2.0 - alpha)
        self.ux = self.a / self.rn
        self.uy = self.b / self.rn
        self.invr = 1.0 / r
        self._far = None

    def offsets(self, cutoff: int):
        sel = self.rn >= cutoff
        offs = np.ascontiguousarray(np.stack([self.a[sel], self.b[sel]], axis=1).astype(np.int64))
        return (offs, np.ascontiguousarray(self.w_full[sel]), np.ascontiguousarray(self.ux[sel]),
                np.ascontiguousarray(self.uy[sel]), np.ascontiguousarray(self.invr[sel]),
                self.rn[sel] * self.h)

    def inner_points(self, cutoff: int):
        """All lattice points (both signs) with ``0 < |n| < cutoff``."""
        c = int(np.ceil(cutoff))
        a, b = np.meshgrid(np.arange(-c, c + 1), np.arange(-c, c + 1), indexing="xy")
        a, b = a.ravel(), b.ravel()
        rn = np.hypot(a, b)
        sel = (rn > 0) & (rn < cutoff)
        return rn[sel], np.arctan2(b[sel], a[sel])

    def far_multiplier(self):
        """Fourier symbol of ``kappa int (1 - W) L``, i.e. the exact linear
        symbol minus the symbol of the windowed linear integral."""
        if self._far is None:
            kabs = self.grid.kabs()
            uk, inv = np.unique(np.round(kabs, 12), return_inverse=True)
            iw = _windowed_bessel_moment(uk, self.alpha, self.r1, self.r2, self.window, self.grid)
            lam = -2.0 * np.pi * self.kappa * uk * iw
            m = -(uk ** (1.0 + self.alpha)) - lam
            m[uk == 0] = 0.0
            self._far = m[inv].reshape(kabs.shape)
        return self._far


@lru_cache(maxsize=16)
def _setup(grid: GridSpec, alpha: float, window: Window) -> _Setup:
    return _Setup(grid, alpha, window)


def _windowed_bessel_moment(k, alpha, r1, r2, window, grid, n_jac=24, n_leg=16):
    """``int_0^r2 W(r) r^(-1-alpha) J_1(k r) dr`` for an array of ``k``."""
    k = np.asarray(k, dtype=float)
    kmax = max(float(np.max(k)), 1.0)
    width = min(0.5, 3.0 / kmax)
    r0 = min(width, 0.5 * r1)
    # first panel: Gauss-Jacobi for the r^(-alpha) endpoint behaviour
    xj, wj = special.roots_jacobi(n_jac, 0.0, -alpha)
    rj = 0.5 * r0 * (1.0 + xj)
    wj = wj * (0.5 * r0) ** (1.0 - alpha)
    nodes = [rj]
    weights = [wj / rj]  # integrand r^-alpha * J1(kr)/r
    xl, wl = special.roots_legendre(n_leg)
    edges = np.linspace(r0, r2, int(np.ceil((r2 - r0) / width)) + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    rl = (0.5 * (hi - lo) * xl + 0.5 * (hi + lo)).ravel()
    wll = (0.5 * (hi - lo) * wl).ravel()
    nodes.append(rl)
    weights.append(wll * window(rl, grid) * rl ** (-1.0 - alpha))
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    out = np.empty_like(k)
    for s in range(0, k.size, 512):
        kk = k[s:s + 512, None]
        out[s:s + 512] = special.j1(kk * nodes) @ weights
    return out


def _pad(v, P):
    return np.ascontiguousarray(np.pad(v, P, mode="wrap"))


def _polycoef(alpha, kind):
    a = coeff_table(_N_COEF, alpha).a
    sgn = (-1.0) ** np.arange(1, _N_COEF + 1)
    if kind == 0:  # (1 + D^2)^-beta
        return np.concatenate([[1.0], sgn * a])
    return np.concatenate([[0.0], -sgn * a])  # R_alpha


@lru_cache(maxsize=64)
def _thresholds(alpha, tol=1e-17):
    """``thr[n]``: largest ``D^2`` for which truncating after ``n`` terms
    leaves an alternating tail ``a_{n+1} D^(2n+2)`` below ``tol``."""
    a = coeff_table(_N_COEF + 1, alpha).a
    n = np.arange(0, _N_COEF + 1)
    thr = np.empty(_N_COEF + 1)
    thr[1:] = (tol / a[1:]) ** (1.0 / (n[1:] + 1))
    thr[0] = 0.0
    # terms only decrease monotonically once D^2 (beta+n)/(n+1) < 1
    thr = np.minimum(thr, _POLY_DMAX**2)
    thr.setflags(write=False)
    return thr


class _Fields:
    """Spectral derivative data of one field."""

    def __init__(self, f: ScalarField, with_fourth=False):
        F = forward(f)
        self.F = F
        self.f = f.values
        self.g1 = derivative(F, 1, 0).values
        self.g2 = derivative(F, 0, 1).values
        self.h11 = derivative(F, 2, 0).values
        self.h12 = derivative(F, 1, 1).values
        self.h22 = derivative(F, 0, 2).values
        if with_fourth:
            self.d4 = [derivative(F, 4 - q, q).values for q in range(5)]


def _angles(n_theta):
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    return th, np.cos(th)[:, None, None], np.sin(th)[:, None, None]


def _singular_correction(S: _Setup, fd: _Fields, phi, cutoff, n_theta):
    """``h^(1-alpha) (sum_{0<|n|<c} |n|^(-1-alpha) A0(theta_n) - Z[A0])`` with
    ``A0 = (yhat.H.yhat) phi(grad f . yhat)``."""
    p = 1.0 + S.alpha

    def A0(c, s):
        q = fd.h11 * c * c + 2.0 * fd.h12 * c * s + fd.h22 * s * s
        return q * phi(fd.g1 * c + fd.g2 * s)

    _, c, s = _angles(n_theta)
    Z = lattice_zeta(p, A0(c, s), n_theta, n_theta // 2)
    inner = np.zeros_like(fd.f)
    rn, th = S.inner_points(cutoff)
    for r, t in zip(rn, th):
        inner += r ** (-p) * A0(np.cos(t), np.sin(t))
    return S.h ** (1.0 - S.alpha) * (inner - Z)


def _linear_second_correction(S: _Setup, fd: _Fields, cutoff, n_theta):
    """Next even term ``h^(3-alpha)`` of the linear kernel, with angular
    factor ``(1/6) d^4 f[yhat^4]``."""
    p = S.alpha - 1.0
    binom = (1, 4, 6, 4, 1)

    def A2(c, s):
        return sum(binom[q] * fd.d4[q] * c ** (4 - q) * s**q for q in range(5)) / 6.0

    _, c, s = _angles(n_theta)
    Z = lattice_zeta(p, A2(c, s), n_theta, n_theta // 2)
    inner = np.zeros_like(fd.f)
    rn, th = S.inner_points(cutoff)
    for r, t in zip(rn, th):
        inner += r ** (-p) * A2(np.cos(t), np.sin(t))
    return S.h ** (3.0 - S.alpha) * (inner - Z)


def _check(f: ScalarField, alpha):
    if not np.all(np.isfinite(f.values)):
        raise ValueError("field contains non-finite values")
    return alpha if isinstance(alpha, AlphaParams) else AlphaParams(alpha)


def _pair(S: _Setup, fd: _Fields, cutoff, degree, coef, kind):
    offs, w, ux, uy, invr, _ = S.offsets(cutoff)
    P = S.P
    block = max(1, min(16, S.grid.ny))
    return _pairsum.pair_sum(_pad(fd.f, P), _pad(fd.g1, P), _pad(fd.g2, P), P, S.grid.ny, S.grid.nx,
                             offs, w, ux, uy, invr, degree, _thresholds(S.alpha), coef, S.beta,
                             kind, block)


def _demean(v):
    return v - np.mean(v)


def linear_symbol(grid: GridSpec, alpha: float) -> np.ndarray:
    """``-|k|^(1+alpha)`` on the FFT lattice."""
    return -(grid.kabs() ** (1.0 + alpha))


def rhs_direct(f: ScalarField, alpha, cutoff_cells: int = 1, *, window: Window = DEFAULT_WINDOW,
               fast: bool = False, n_theta: int = 64) -> ScalarField:
    """Quadrature of the full contour integral.

    The windowed kernel ``W K`` is summed over the offset lattice; the linear
    far field ``(1 - W) L`` is added as an exact Fourier multiplier. With
    ``fast`` the kernel power is replaced by its convergent Taylor polynomial
    wherever the slope bound allows; by default it is evaluated in closed
    form everywhere.
    """
    ap = _check(f, alpha)
    if cutoff_cells < 1:
        raise ValueError("cutoff_cells must be >= 1")
    S = _setup(f.grid, ap.alpha, window)
    fd = _Fields(f, with_fourth=True)
    sm = _pair(S, fd, cutoff_cells, 0 if fast else -1, _polycoef(ap.alpha, 0), 0)
    beta = S.beta
    sm += _singular_correction(S, fd, lambda u: np.exp(-beta * np.log1p(u * u)), cutoff_cells, n_theta)
    sm += _linear_second_correction(S, fd, cutoff_cells, n_theta)
    far = inverse(SpectralField(f.grid, S.far_multiplier() * fd.F.coeffs)).values
    return ScalarField(f.grid, S.kappa * _demean(sm) + far)


def _nonlinear(f: ScalarField, ap: AlphaParams, window, phi, coef, degree, n_theta, cutoff=1):
    S = _setup(f.grid, ap.alpha, window)
    fd = _Fields(f)
    sm = _pair(S, fd, cutoff, degree, coef, 1)
    sm += _singular_correction(S, fd, phi, cutoff, n_theta)
    return S.kappa * _demean(sm)


def nonlinear_split(f: ScalarField, alpha, quad_refinement: int = 2, *,
                    window: Window = DEFAULT_WINDOW) -> np.ndarray:
    """Real-space values of ``N_alpha(f)`` (the rhs is ``-Lambda^(1+alpha) f - N``)."""
    ap = _check(f, alpha)
    beta = ap.beta
    return _nonlinear(f, ap, window, lambda u: -np.expm1(-beta * np.log1p(u * u)),
                      _polycoef(ap.alpha, 1), 0, 32 * quad_refinement)


def nonlinear_series(f: ScalarField, alpha, n_max: int = 8, *,
                     window: Window = DEFAULT_WINDOW) -> np.ndarray:
    """``N_alpha(f)`` with ``R_alpha`` truncated after ``n_max`` terms."""
    ap = _check(f, alpha)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    grad = np.hypot(*(g.values for g in _grad(f)))
    if not np.max(grad) < 1.0:
        raise ValueError("series diverges: ||grad f||_inf >= 1")
    coef = _polycoef(ap.alpha, 1)[: n_max + 1].copy()
    cz = coef.copy()

    def phi(u):
        acc = np.zeros_like(u)
        for q in range(n_max, 0, -1):
            acc = acc * u * u + cz[q]
        return acc * u * u

    return _nonlinear(f, ap, window, phi, coef, n_max, 64)


def _grad(f):
    F = forward(f)
    return derivative(F, 1, 0), derivative(F, 0, 1)


def _with_linear(f: ScalarField, ap: AlphaParams, nl: np.ndarray) -> ScalarField:
    F = forward(f)
    lin = inverse(SpectralField(f.grid, linear_symbol(f.grid, ap.alpha) * F.coeffs)).values
    return ScalarField(f.grid, lin - nl)


def rhs_split(f: ScalarField, alpha, quad_refinement: int = 2, *,
              window: Window = DEFAULT_WINDOW) -> ScalarField:
    """``-Lambda^(1+alpha) f - N_alpha(f)`` with the linear part exact."""
    ap = _check(f, alpha)
    return _with_linear(f, ap, nonlinear_split(f, ap, quad_refinement, window=window))


def rhs_series(f: ScalarField, alpha, n_max: int = 8, *,
               window: Window = DEFAULT_WINDOW) -> ScalarField:
    """Split form with the kernel nonlinearity replaced by its truncated series."""
    ap = _check(f, alpha)
    return _with_linear(f, ap, nonlinear_series(f, ap, n_max, window=window))


def evaluate(f: ScalarField, alpha, method, window: Window = DEFAULT_WINDOW) -> ScalarField:
    """Dispatch on an ``RhsMethod`` variant."""
    if isinstance(method, DirectQuadrature):
        return rhs_direct(f, alpha, method.cutoff_cells, window=window)
    if isinstance(method, SplitSpectral):
        return rhs_split(f, alpha, method.quad_refinement, window=window)
    if isinstance(method, SeriesTruncated):
        return rhs_series(f, alpha, method.n_max, window=window)
    raise TypeError(f"unknown rhs method {method!r}")


def nonlinear_part(f: ScalarField, alpha, method, window: Window = DEFAULT_WINDOW) -> np.ndarray:
    """``rhs(f) + Lambda^(1+alpha) f`` in real space, for the exponential integrator."""
    ap = _check(f, alpha)
    if isinstance(method, SplitSpectral):
        return -nonlinear_split(f, ap, method.quad_refinement, window=window)
    if isinstance(method, SeriesTruncated):
        return -nonlinear_series(f, ap, method.n_max, window=window)
    r = evaluate(f, ap, method, window)
    F = forward(f)
    lin = inverse(SpectralField(f.grid, linear_symbol(f.grid, ap.alpha) * F.coeffs)).values
    return r.values - lin


def _stride_targets(grid: GridSpec, max_targets=4096):
    stride = 1
    while (grid.nx // stride) * (grid.ny // stride) > max_targets:
        stride *= 2
    j, i = np.meshgrid(np.arange(0, grid.ny, stride), np.arange(0, grid.nx, stride), indexing="ij")
    return np.ascontiguousarray(np.stack([j.ravel(), i.ravel()], axis=1).astype(np.int64))


def d3_value(f: ScalarField, alpha, window: Window = DEFAULT_WINDOW, n_theta: int = 64):
    """``PV int (f* - f(x*-y)) / [|y|^2 + (f* - f(x*-y))^2]^beta dy`` at the
    maximum point ``x*`` of the interpolant. Returns ``(value, f*)``."""
    ap = _check(f, alpha)
    _, xstar = refined_sup(f, "abs")
    # move x* onto the grid point (0, 0)
    fs = spectral_shift(f, xstar)
    S = _setup(f.grid, ap.alpha, window)
    offs, w, ux, uy, invr, _ = S.offsets(1)
    P = S.P
    fpad = _pad(fs.values, P)
    val = _pairsum.point_sum(fpad, P, 0, 0, offs, w, invr, S.beta)
    F = forward(fs)
    g = [derivative(F, 1, 0).values[0, 0], derivative(F, 0, 1).values[0, 0]]
    H = [derivative(F, 2, 0).values[0, 0], derivative(F, 1, 1).values[0, 0],
         derivative(F, 0, 2).values[0, 0]]
    _, c, s = _angles(n_theta)
    c, s = c[:, 0, 0], s[:, 0, 0]
    u = g[0] * c + g[1] * s
    q = H[0] * c * c + 2 * H[1] * c * s + H[2] * s * s
    A0 = q * (1 + u * u) ** (-S.beta) * (-0.5 + S.beta * u * u / (1 + u * u))
    Z = float(lattice_zeta(1.0 + ap.alpha, A0, n_theta, n_theta // 2))
    val -= S.h ** (1.0 - ap.alpha) * Z
    return float(val), float(fs.values[0, 0])


def monitors(f: ScalarField, f0_norms, alpha, window: Window = DEFAULT_WINDOW,
             grad_sup: float | None = None) -> KernelMonitors:
    """Pointwise monitors at the current field.

    ``f0_norms`` needs ``linf`` and ``l1`` of the initial datum. The ``D3``
    quantities are only defined for nonnegative data.
    """
    ap = _check(f, alpha)
    S = _setup(f.grid, ap.alpha, window)
    g1, g2 = _grad(f)
    dyf_sup = float(grad_sup) if grad_sup is not None else float(np.sqrt(np.max(g1.values**2 + g2.values**2)))
    linf0 = float(f0_norms["linf"] if isinstance(f0_norms, dict) else f0_norms.linf)
    l1_0 = float(f0_norms["l1"] if isinstance(f0_norms, dict) else f0_norms.l1)
    offs, _, ux, uy, invr, _ = S.offsets(1)
    P = S.P
    cmin = _pairsum.c_alpha_min(_pad(f.values, P), _pad(g1.values, P), _pad(g2.values, P), P,
                                _stride_targets(f.grid), offs, ux, uy, invr, ap.alpha)
    d3 = lb = radius = None
    if np.min(f.values) >= -1e-12 * max(linf0, 1e-300) and np.max(f.values) > 0:
        d3, fstar = d3_value(f, ap, window)
        den = 1.0 + 2.0 * l1_0 / np.pi + 4.0 * linf0**3
        lb = 0.5 * np.pi * fstar**ap.beta / den**ap.beta
        radius = float(np.sqrt((2.0 * l1_0 / np.pi + 1.0) / fstar))
    elif not np.any(f.values):
        d3, lb = 0.0, 0.0
    return KernelMonitors(d3, lb, float(cmin), dyf_sup, radius)
