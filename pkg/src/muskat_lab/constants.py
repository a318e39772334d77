"""
Explicit constants of the small-data and maximum-principle theory.

Besides the constants themselves this module fixes the time normalization
used throughout the package: the contour integral carries the prefactor
``kappa(alpha)`` chosen so that its linearization is exactly
``-Lambda^(1+alpha)``.
"""

from dataclasses import dataclass, asdict

import numpy as np
from scipy import special

from .special_fn import weighted_series

__all__ = [
    "ConstantsReport",
    "c_alpha",
    "k0_of_alpha",
    "mu_of",
    "grad_threshold",
    "decay_constants",
    "grad_decay_constant",
    "linear_symbol_constant",
    "kernel_prefactor",
    "constants_report",
]


def _check_alpha(alpha):
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")


def c_alpha(alpha: float) -> float:
    """Bound constant of the oscillatory principal-value integral."""
    _check_alpha(alpha)
    return float(np.pi) if alpha == 0 else 6.0 / (1.0 - alpha)


def _mu_raw(alpha, z):
    return 1.0 - 2.0 * c_alpha(alpha) * weighted_series(z, alpha)


def k0_of_alpha(alpha: float, tol: float = 1e-12) -> float:
    """Root in ``(0, 1)`` of ``2 C(alpha) F(z) = 1`` by bisection.

    ``F`` is the weighted series, increasing on ``[0, 1)``, so every
    ``z < k0`` satisfies the strict smallness inequality.
    """
    _check_alpha(alpha)
    if not (alpha == 0 or 0 < alpha < 0.5):
        raise ValueError("alpha must be < 0.5 for k0")
    lo, hi = 0.0, 1.0 - 1e-9
    if not (_mu_raw(alpha, lo) > 0 > _mu_raw(alpha, hi)):
        raise RuntimeError("k0 bracket has no sign change")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _mu_raw(alpha, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mu_of(alpha: float, f1_norm: float) -> float:
    """Dissipation margin ``1 - 2 C(alpha) F(||f0||_1)``."""
    _check_alpha(alpha)
    if not (0.0 <= f1_norm < 1.0):
        raise ValueError("f1_norm must lie in [0, 1)")
    return _mu_raw(alpha, f1_norm)


def grad_threshold(alpha: float, eps: float) -> float:
    """Slope bound ``sqrt((1+alpha-eps)/(5+alpha+eps))``."""
    _check_alpha(alpha)
    if not (0.0 < eps < 1.0 + alpha):
        raise ValueError("eps must lie in (0, 1 + alpha)")
    return float(np.sqrt((1.0 + alpha - eps) / (5.0 + alpha + eps)))


def decay_constants(alpha: float, linf0: float, l1_0: float):
    """L-infinity decay constants ``(c_tilde, c_decay)``.

    ``c_decay`` enters ``||f0||_inf (1 + c_decay t)^(-2/(1+alpha))`` with time
    measured in the unit-prefactor normalization of the contour integral.
    """
    _check_alpha(alpha)
    if not linf0 > 0 or l1_0 < 0:
        raise ValueError("need linf0 > 0 and l1_0 >= 0")
    beta = 0.5 * (3.0 + alpha)
    c_tilde = np.pi / (2.0 * (1.0 + 2.0 * l1_0 / np.pi + 4.0 * linf0**3) ** beta)
    c_decay = 0.5 * (1.0 + alpha) * linf0 ** (0.5 * (1.0 + alpha)) * c_tilde
    return {"c_tilde": float(c_tilde), "c_decay": float(c_decay)}


def grad_decay_constant(alpha: float, eps: float, linf0: float, grad0: float, m_t: float) -> float:
    """Gradient-decay constant ``C_#`` from the lower bound on the dissipation.

    ``(1+alpha)/4 * K * grad0^((1+alpha)/2)`` with
    ``K = eps / (2 [1 + 2 M_T/pi + 4 linf0^2 grad0]^beta)``.
    """
    _check_alpha(alpha)
    beta = 0.5 * (3.0 + alpha)
    K = eps / (2.0 * (1.0 + 2.0 * m_t / np.pi + 4.0 * linf0**2 * grad0) ** beta)
    return float(0.25 * (1.0 + alpha) * K * grad0 ** (0.5 * (1.0 + alpha)))


def linear_symbol_constant(alpha: float) -> float:
    """``c(alpha)`` such that the unit-prefactor contour integral linearizes
    to ``-c(alpha) |k|^(1+alpha)``."""
    _check_alpha(alpha)
    return float(np.pi * 2.0 ** (-alpha) * special.gamma(0.5 * (1.0 - alpha))
                 / special.gamma(0.5 * (3.0 + alpha)))


def kernel_prefactor(alpha: float) -> float:
    """``kappa(alpha) = 1 / c(alpha)``; equals ``1/(2 pi)`` at ``alpha = 0``."""
    return 1.0 / linear_symbol_constant(alpha)


@dataclass(frozen=True)
class ConstantsReport:
    alpha: float
    c_alpha: float
    k0: float | None
    mu: float | None
    grad_threshold: float | None
    c_tilde: float | None
    c_decay: float | None
    kappa: float
    c_sharp_note: str = ("gradient-decay constant C_# depends on the observed "
                         "sup ||grad f||_L1 and is reported per run")

    def as_dict(self):
        return asdict(self)


def constants_report(alpha: float, f1_norm: float | None = None, eps: float | None = None,
                     linf0: float | None = None, l1_0: float | None = None) -> ConstantsReport:
    """Collect every constant that is defined for the given inputs."""
    ca = c_alpha(alpha)
    k0 = k0_of_alpha(alpha) if (alpha == 0 or 0 < alpha < 0.5) else None
    mu = mu_of(alpha, f1_norm) if f1_norm is not None and f1_norm < 1 else None
    gt = grad_threshold(alpha, eps) if eps is not None else None
    ct = cd = None
    if linf0 is not None and l1_0 is not None and linf0 > 0:
        d = decay_constants(alpha, linf0, l1_0)
        ct, cd = d["c_tilde"], d["c_decay"]
    return ConstantsReport(float(alpha), ca, k0, mu, gt, ct, cd, kernel_prefactor(alpha))
