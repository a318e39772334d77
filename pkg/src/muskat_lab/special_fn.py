"""
Series coefficients, kernel nonlinearity and special functions.

The kernel nonlinearity is

    R_alpha(z) = 1 - (1 + z**2) ** (-(3 + alpha) / 2)
               = -sum_{n>=1} (-1)**n a_n z**(2 n),       |z| < 1,

with ``a_n = (beta)_n / n!`` and ``beta = (3 + alpha) / 2``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

__all__ = [
    "CoeffTable",
    "taylor_coeff",
    "coeff_table",
    "r_alpha",
    "r_alpha_series",
    "weighted_series",
    "weighted_partial_sum",
    "hyp2f1",
    "ode_solution_g",
    "h_function",
    "pv_exp_integral",
]


def _check_alpha(alpha):
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")


@dataclass(frozen=True)
class CoeffTable:
    """Coefficients ``a_1 .. a_nmax`` for one value of ``alpha``."""

    alpha: float
    a: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.a)

    def __getitem__(self, n):
        if n < 1 or n > self.n_max:
            raise IndexError(n)
        return self.a[n - 1]


def coeff_table(n_max: int, alpha: float) -> CoeffTable:
    """Build ``a_1 .. a_nmax`` with the ratio recurrence."""
    _check_alpha(alpha)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    beta = 0.5 * (3.0 + alpha)
    a = np.empty(n_max)
    a[0] = beta
    for n in range(1, n_max):
        a[n] = a[n - 1] * (beta + n) / (n + 1)
    a.setflags(write=False)
    return CoeffTable(float(alpha), a)


def taylor_coeff(n: int, alpha: float) -> float:
    """``a_n = Gamma(beta + n) / (Gamma(beta) n!)`` via the product recurrence."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return float(coeff_table(int(n), alpha).a[-1])


def r_alpha(z, alpha: float):
    """Closed form of ``R_alpha``; vectorized over ``z``."""
    beta = 0.5 * (3.0 + alpha)
    z = np.asarray(z, dtype=float)
    # -expm1 keeps relative accuracy for small z
    out = -np.expm1(-beta * np.log1p(z * z))
    return float(out) if out.ndim == 0 else out


def r_alpha_series(z, alpha: float, n_max: int):
    """Truncated series ``-sum_{n<=n_max} (-1)^n a_n z^(2n)`` by Horner."""
    a = coeff_table(n_max, alpha).a
    z2 = np.asarray(z, dtype=float) ** 2
    acc = np.zeros_like(z2)
    for n in range(n_max, 0, -1):
        acc = acc * z2 + (-1.0) ** (n + 1) * a[n - 1]
    out = acc * z2
    return float(out) if np.ndim(out) == 0 else out


def weighted_series(z: float, alpha: float) -> float:
    """Closed form of ``sum_{n>=1} a_n (2n+1)^2 z^(2n)`` for ``|z| < 1``.

    The sum equals ``(1 - z^2)^(-(7+alpha)/2) [1 + (10+4 alpha) z^2
    + (2+alpha)^2 z^4] - 1``, obtained by applying ``(z d/dz + 1)^2`` to
    ``z (1 - z^2)^(-beta)``.
    """
    _check_alpha(alpha)
    z = float(z)
    if not abs(z) < 1.0:
        raise ValueError("weighted_series requires |z| < 1")
    z2 = z * z
    extra = (10.0 + 4.0 * alpha) * z2 + (2.0 + alpha) ** 2 * z2 * z2
    # expm1/log1p keep the small-z relative accuracy of the difference
    return float(np.expm1(np.log1p(extra) - 0.5 * (7.0 + alpha) * np.log1p(-z2)))


def weighted_partial_sum(z: float, alpha: float, n_terms: int) -> float:
    """Direct partial sum of the weighted series (oracle for the closed form)."""
    a = coeff_table(n_terms, alpha).a
    n = np.arange(1, n_terms + 1)
    terms = a * (2 * n + 1) ** 2 * float(z) ** (2 * n)
    return float(np.sum(terms[::-1]))


def _hyp_series(a, b, c, x, max_terms=200000):
    term = 1.0
    total = 1.0
    ax = abs(x)
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        if term == 0.0:
            return total
        # geometric tail estimate once the term ratio has settled near |x|
        if n > 4 and abs(term) * ax / (1.0 - ax) <= 1e-17 * abs(total):
            return total
    raise RuntimeError("hypergeometric series did not converge")


def hyp2f1(a: float, b: float, c: float, x: float) -> float:
    """Gauss hypergeometric function for real ``x <= 0``.

    Uses the power series for ``|x| <= 1/2`` and the Pfaff transformation
    ``2F1(a,b;c;x) = (1-x)^(-a) 2F1(a, c-b; c; x/(x-1))`` below ``-1/2``.
    """
    if c <= 0 and float(c).is_integer():
        raise ValueError("c must not be a non-positive integer")
    if not (x <= 0.0) or not np.isfinite(x):
        raise ValueError("hyp2f1 is only supported for finite x <= 0")
    if x == 0.0:
        return 1.0
    if x >= -0.5:
        return _hyp_series(a, b, c, x)
    w = x / (x - 1.0)
    return (1.0 - x) ** (-a) * _hyp_series(a, c - b, c, w)


def ode_solution_g(z: float, alpha: float) -> float:
    """Closed-form solution of ``(1+z^2) g' - (3+alpha) z g = (3+alpha) z^2``
    with ``g(0) = 0``."""
    _check_alpha(alpha)
    z = float(z)
    beta = 0.5 * (3.0 + alpha)
    f = hyp2f1(1.5, 0.5 * (alpha + 5.0), 2.5, -z * z)
    return (3.0 + alpha) * z**3 * (1.0 + z * z) ** beta / 3.0 * f


def h_function(z: float, alpha: float) -> float:
    """``H(z) = g(z) / (1+z^2)^beta``, the antiderivative of
    ``(3+alpha) z^2 (1+z^2)^(-(5+alpha)/2)``."""
    beta = 0.5 * (3.0 + alpha)
    return ode_solution_g(z, alpha) / (1.0 + z * z) ** beta


@lru_cache(maxsize=256)
def _sine_moment(alpha: float, tail_tol: float = 1e-11) -> float:
    """``J(alpha) = int_0^inf sin(u) u^(-1-alpha) du`` by quadrature."""
    p = 1.0 + alpha
    # near zero: u^(-alpha) * sin(u)/u with an algebraic weight
    j0, _ = integrate.quad(lambda u: np.sinc(u / np.pi), 0.0, 1.0,
                           weight="alg", wvar=(-alpha, 0.0), epsabs=1e-14, epsrel=1e-13)
    # the integrated-by-parts remainder is bounded by p R^(-p-1)
    R = max(2.0 * np.pi, (p / tail_tol) ** (1.0 / (p + 1.0)))
    j1, _ = integrate.quad(lambda u: u ** (-p), 1.0, R, weight="sin", wvar=1.0,
                           epsabs=1e-14, epsrel=1e-13, limit=2000)
    tail = np.cos(R) / R**p + p * np.sin(R) / R ** (p + 1.0)
    return j0 + j1 + tail


def pv_exp_integral(S: float, alpha: float) -> float:
    """Imaginary part ``2 int_0^inf sin(r S) r^(-1-alpha) dr`` of the
    oscillatory principal-value integral.

    Substituting ``u = |S| r`` gives ``2 sign(S) |S|^alpha J(alpha)``, with
    ``J`` evaluated once per ``alpha`` by quadrature on ``(0, R]`` plus a
    two-term integration-by-parts tail.
    """
    _check_alpha(alpha)
    S = float(S)
    if S == 0.0:
        return 0.0
    return float(np.sign(S) * 2.0 * abs(S) ** alpha * _sine_moment(float(alpha)))
