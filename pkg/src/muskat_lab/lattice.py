"""
Singular lattice sums on the square lattice.

For a kernel ``r^(-p) A(theta)`` that is singular (or merely non-smooth) at
the origin, the punctured trapezoid sum over the lattice ``h Z^2`` differs
from the integral by ``h^(2-p) Z[A]`` plus higher-order terms, where ``Z`` is
the analytically continued lattice sum

    Z[A] = "sum'_{n in Z^2} |n|^(-p) A(theta_n)".

Only the ``cos(m theta)`` harmonics with ``m = 0 mod 4`` survive the square
lattice symmetry. Each harmonic is an Epstein zeta value with the harmonic
polynomial ``Re((n1 + i n2)^m)``, evaluated by the Ewald (incomplete gamma)
splitting at ``t = 1``.
"""

from functools import lru_cache

import mpmath as mp
import numpy as np

__all__ = ["epstein_harmonic", "angular_weights", "lattice_zeta"]


@lru_cache(maxsize=None)
def epstein_harmonic(p: float, m: int, n_cut: int = 7, dps: int = 30) -> float:
    """Continued value of ``sum' |n|^(-p) cos(m theta_n)`` for ``m % 4 == 0``."""
    if m % 4:
        return 0.0
    with mp.workdps(dps):
        s = mp.mpf(p + m) / 2
        total = mp.mpf(0)
        for a in range(-n_cut, n_cut + 1):
            for b in range(-n_cut, n_cut + 1):
                if a == 0 and b == 0:
                    continue
                r2 = mp.mpf(a * a + b * b)
                P = mp.re(mp.mpc(a, b) ** m)
                if P == 0:
                    continue
                x = mp.pi * r2
                total += P * (x ** (-s) * mp.gammainc(s, x)
                              + x ** (s - m - 1) * mp.gammainc(m + 1 - s, x))
        if m == 0:
            total += 1 / (s - 1) - 1 / s
        return float(mp.pi**s * total / mp.gamma(s))


@lru_cache(maxsize=None)
def angular_weights(p: float, n_theta: int = 64, m_max: int = 32) -> np.ndarray:
    """Weights ``w_l`` with ``Z[A] = sum_l w_l A(theta_l)``, ``theta_l = 2 pi l / n_theta``.

    Exact for ``A`` band-limited to harmonics below ``n_theta / 2``.
    """
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    w = np.full(n_theta, epstein_harmonic(p, 0))
    for m in range(4, m_max + 1, 4):
        w += 2.0 * epstein_harmonic(p, m) * np.cos(m * theta)
    w /= n_theta
    w.setflags(write=False)
    return w


def lattice_zeta(p: float, values: np.ndarray, n_theta: int = 64, m_max: int = 32):
    """Apply ``Z`` to angular samples ``values[l, ...]`` of ``A(theta_l)``."""
    w = angular_weights(float(p), n_theta, m_max)
    return np.tensordot(w, values, axes=(0, 0))
