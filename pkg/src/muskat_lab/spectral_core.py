"""
Periodic grids, Fourier transforms and norms.

The interface height is sampled on a doubly periodic grid ``[0, lx) x [0, ly)``
which stands in for the plane. Fields are stored as arrays of shape
``(ny, nx)`` so that ``x1`` is the fastest index. Fourier coefficients use the
normalization

    f(x) = sum_k coeff(k) exp(i k.x),

i.e. ``coeff = fft2(values) / (nx * ny)``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize

__all__ = [
    "GridSpec",
    "ScalarField",
    "SpectralField",
    "AlphaParams",
    "SupNorms",
    "forward",
    "inverse",
    "apply_fractional_laplacian",
    "derivative",
    "gradient",
    "hessian",
    "fourier_norm",
    "sup_norms",
    "refined_sup",
    "spectral_shift",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid.

    Parameters
    ----------
    nx, ny : int
        Number of points along ``x1`` and ``x2``; even and at least 16.
    lx, ly : float
        Periods along ``x1`` and ``x2``.
    """

    nx: int
    ny: int
    lx: float = 2 * np.pi
    ly: float = 2 * np.pi

    def __post_init__(self):
        for n in (self.nx, self.ny):
            if int(n) != n or n < 16 or n % 2:
                raise ValueError(f"grid sizes must be even integers >= 16, got {n}")
        if not (self.lx > 0 and self.ly > 0 and np.isfinite(self.lx) and np.isfinite(self.ly)):
            raise ValueError("grid periods must be positive and finite")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "lx", float(self.lx))
        object.__setattr__(self, "ly", float(self.ly))

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def coords(self):
        """Return the coordinate arrays ``(x1, x2)`` of shape ``(ny, nx)``."""
        x1 = np.arange(self.nx) * self.hx
        x2 = np.arange(self.ny) * self.hy
        return np.meshgrid(x1, x2, indexing="xy")

    def wavenumbers(self):
        """Return ``(k1, k2)`` arrays of shape ``(ny, nx)`` in FFT order."""
        k1 = 2 * np.pi * np.fft.fftfreq(self.nx, d=1.0 / self.nx) / self.lx
        k2 = 2 * np.pi * np.fft.fftfreq(self.ny, d=1.0 / self.ny) / self.ly
        return np.meshgrid(k1, k2, indexing="xy")

    def kabs(self) -> np.ndarray:
        k1, k2 = self.wavenumbers()
        return np.hypot(k1, k2)

    def nyquist_mask(self) -> np.ndarray:
        """True on the unpaired Nyquist rows/columns."""
        m = np.zeros(self.shape, dtype=bool)
        m[:, self.nx // 2] = True
        m[self.ny // 2, :] = True
        return m


@dataclass(frozen=True)
class ScalarField:
    """Real field sampled on ``grid``; ``values`` has shape ``(ny, nx)``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size != self.grid.nx * self.grid.ny:
            raise ValueError("values size does not match grid")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def __mul__(self, c):
        return ScalarField(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __add__(self, other):
        return ScalarField(self.grid, self.values + _values(other))

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - _values(other))


def _values(f):
    return f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a real field, FFT ordered, shape ``(ny, nx)``."""

    grid: GridSpec
    coeffs: np.ndarray


@dataclass(frozen=True)
class AlphaParams:
    """The kernel parameter ``alpha`` in ``[0, 1)`` and derived exponents."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 <= a < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        object.__setattr__(self, "alpha", a)

    @property
    def beta(self) -> float:
        """Exponent ``(3 + alpha) / 2`` of the contour kernel."""
        return 0.5 * (3.0 + self.alpha)

    @property
    def order(self) -> float:
        """Order ``1 + alpha`` of the dissipative linear part."""
        return 1.0 + self.alpha

    def require_global_regime(self):
        if not self.alpha < 0.5:
            raise ValueError("alpha must be < 0.5 for the small-data regime")


class SupNorms(NamedTuple):
    linf: float
    grad_linf: float
    l1: float
    mass: float


def forward(f: ScalarField) -> SpectralField:
    """Fourier coefficients with ``f(x) = sum_k coeff(k) exp(i k.x)``."""
    v = f.values
    if not np.all(np.isfinite(v)):
        raise ValueError("field contains non-finite values")
    return SpectralField(f.grid, np.fft.fft2(v) / v.size)


def inverse(F: SpectralField) -> ScalarField:
    v = np.fft.ifft2(F.coeffs).real * F.coeffs.size
    return ScalarField(F.grid, v)


def apply_fractional_laplacian(F: SpectralField, s: float) -> SpectralField:
    """Multiply coefficients by ``|k|**s``; the zero mode is set to zero."""
    if s < 0:
        raise ValueError("order s must be non-negative")
    kabs = F.grid.kabs()
    mult = np.zeros_like(kabs)
    nz = kabs > 0
    mult[nz] = kabs[nz] ** s
    return SpectralField(F.grid, F.coeffs * mult)


def derivative(F: SpectralField, p: int, q: int) -> ScalarField:
    """Spectral derivative ``d^p/dx1^p d^q/dx2^q``.

    Odd-order derivatives drop the unpaired Nyquist modes so the result
    stays real.
    """
    k1, k2 = F.grid.wavenumbers()
    mult = (1j * k1) ** p * (1j * k2) ** q
    if p % 2:
        mult[:, F.grid.nx // 2] = 0.0
    if q % 2:
        mult[F.grid.ny // 2, :] = 0.0
    return inverse(SpectralField(F.grid, F.coeffs * mult))


def gradient(f: ScalarField):
    """Return ``(d f / d x1, d f / d x2)``."""
    F = forward(f)
    return derivative(F, 1, 0), derivative(F, 0, 1)


def hessian(f: ScalarField):
    """Return ``(f_11, f_12, f_22)``."""
    F = forward(f)
    return derivative(F, 2, 0), derivative(F, 1, 1), derivative(F, 0, 2)


def fourier_norm(f: ScalarField, s: float, include_zero: bool = False) -> float:
    """Discrete Wiener-type norm ``sum_{k != 0} |k|^s |coeff(k)|``.

    With ``include_zero`` and ``s == 0`` the mean mode is counted as well.
    """
    if s < 0:
        raise ValueError("order s must be non-negative")
    c = np.abs(forward(f).coeffs)
    kabs = f.grid.kabs()
    w = np.zeros_like(kabs)
    nz = kabs > 0
    w[nz] = kabs[nz] ** s
    if include_zero and s == 0:
        w[~nz] = 1.0
    # sort for an order-independent, reproducible sum
    terms = np.sort((w * c).ravel())
    return float(np.sum(terms))


def sup_norms(f: ScalarField, refine: bool = False) -> SupNorms:
    """Grid sup norms, L1 norm and mass.

    With ``refine`` the two sup norms are maximized over the trigonometric
    interpolant instead of the grid samples.
    """
    v = f.values
    dA = f.grid.cell_area
    g1, g2 = gradient(f)
    if refine:
        linf, _ = refined_sup(f, "abs")
        grad_linf, _ = refined_sup(f, "grad")
    else:
        linf = float(np.max(np.abs(v)))
        grad_linf = float(np.sqrt(np.max(g1.values**2 + g2.values**2)))
    l1 = float(np.sum(np.sort(np.abs(v).ravel())) * dA)
    mass = float(_stable_sum(v) * dA)
    return SupNorms(linf, grad_linf, l1, mass)


def _stable_sum(v) -> float:
    return float(np.sum(v.astype(np.longdouble)))


class _Interpolant:
    """Pointwise evaluation of the trigonometric interpolant and derivatives."""

    def __init__(self, f: ScalarField):
        g = f.grid
        c = forward(f).coeffs.copy()
        # split Nyquist modes symmetrically so the interpolant is real
        c[:, g.nx // 2] *= 0.5
        c = np.concatenate([c, c[:, g.nx // 2 : g.nx // 2 + 1]], axis=1)
        c[g.ny // 2, :] *= 0.5
        c = np.concatenate([c, c[g.ny // 2 : g.ny // 2 + 1, :]], axis=0)
        n1 = np.fft.fftfreq(g.nx, 1.0 / g.nx)
        n2 = np.fft.fftfreq(g.ny, 1.0 / g.ny)
        n1 = np.append(n1, g.nx // 2)
        n2 = np.append(n2, g.ny // 2)
        self.k1 = 2 * np.pi * n1 / g.lx
        self.k2 = 2 * np.pi * n2 / g.ly
        self.c = c

    def derivs(self, x, order):
        """All partial derivatives up to ``order`` at the point ``x``."""
        e1 = np.exp(1j * self.k1 * x[0])
        e2 = np.exp(1j * self.k2 * x[1])
        out = {}
        for p in range(order + 1):
            for q in range(order + 1 - p):
                a = (1j * self.k1) ** p * e1
                b = (1j * self.k2) ** q * e2
                out[p, q] = float(np.real(b @ self.c @ a))
        return out


def refined_sup(f: ScalarField, kind: str = "abs", n_candidates: int = 4):
    """Maximize ``|f|`` or ``|grad f|`` over the trigonometric interpolant.

    Starts from the largest local maxima on the grid and polishes each with a
    trust-region Newton iteration. Returns ``(value, point)``.
    """
    g = f.grid
    if kind == "abs":
        s = np.abs(f.values)
    elif kind == "grad":
        g1, g2 = gradient(f)
        s = np.sqrt(g1.values**2 + g2.values**2)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    smax = float(np.max(s))
    x1, x2 = g.coords()
    if smax == 0.0:
        return 0.0, (0.0, 0.0)
    nb = [np.roll(np.roll(s, a, 0), b, 1) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]
    is_peak = np.all([s >= t for t in nb], axis=0)
    idx = np.flatnonzero(is_peak.ravel())
    if idx.size == 0:
        idx = np.array([int(np.argmax(s))])
    idx = idx[np.argsort(-s.ravel()[idx], kind="stable")][:n_candidates]
    interp = _Interpolant(f)

    if kind == "abs":
        def obj(x):
            d = interp.derivs(x, 2)
            sg = 1.0 if d[0, 0] >= 0 else -1.0
            val = -sg * d[0, 0]
            jac = -sg * np.array([d[1, 0], d[0, 1]])
            hes = -sg * np.array([[d[2, 0], d[1, 1]], [d[1, 1], d[0, 2]]])
            return val, jac, hes
    else:
        def obj(x):
            d = interp.derivs(x, 3)
            gv = np.array([d[1, 0], d[0, 1]])
            H = np.array([[d[2, 0], d[1, 1]], [d[1, 1], d[0, 2]]])
            T1 = np.array([[d[3, 0], d[2, 1]], [d[2, 1], d[1, 2]]])
            T2 = np.array([[d[2, 1], d[1, 2]], [d[1, 2], d[0, 3]]])
            val = -(gv @ gv)
            jac = -2.0 * H @ gv
            hes = -2.0 * (H @ H + gv[0] * T1 + gv[1] * T2)
            return val, jac, hes

    best, best_x = smax, (float(x1.ravel()[idx[0]]), float(x2.ravel()[idx[0]]))
    cache = {}

    def ev(x):
        key = (float(x[0]), float(x[1]))
        if key not in cache:
            cache.clear()
            cache[key] = obj(x)
        return cache[key]

    for i in idx:
        x0 = np.array([x1.ravel()[i], x2.ravel()[i]])
        res = optimize.minimize(
            lambda x: ev(x)[0], x0, jac=lambda x: ev(x)[1], hess=lambda x: ev(x)[2],
            method="trust-exact", options={"gtol": 1e-13 * max(1.0, smax), "maxiter": 50},
        )
        val = -float(res.fun)
        if kind == "grad":
            val = float(np.sqrt(max(val, 0.0)))
        # the polished value is only accepted if it stays near its seed
        if np.max(np.abs(res.x - x0)) <= 2.0 * max(g.hx, g.hy) and val > best:
            best, best_x = val, (float(res.x[0]), float(res.x[1]))
    return best, best_x


def spectral_shift(f: ScalarField, dx) -> ScalarField:
    """Return ``f(x + dx)`` evaluated exactly on the band-limited interpolant."""
    F = forward(f)
    k1, k2 = f.grid.wavenumbers()
    ph = np.exp(1j * (k1 * dx[0] + k2 * dx[1]))
    # Nyquist modes: keep the real, symmetric part of the shift
    ph[:, f.grid.nx // 2] = np.cos(k1[:, f.grid.nx // 2] * dx[0]) * np.exp(1j * k2[:, f.grid.nx // 2] * dx[1])
    ph[f.grid.ny // 2, :] = np.cos(k2[f.grid.ny // 2, :] * dx[1]) * np.exp(1j * k1[f.grid.ny // 2, :] * dx[0])
    ph[f.grid.ny // 2, f.grid.nx // 2] = np.cos(k1[0, f.grid.nx // 2] * dx[0]) * np.cos(k2[f.grid.ny // 2, 0] * dx[1])
    return inverse(SpectralField(f.grid, F.coeffs * ph))
