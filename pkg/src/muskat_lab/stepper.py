"""
Time integration with exact treatment of the dissipative linear part.

The equation is advanced in the split form ``f_t = L f + N(f)`` with the
diagonal symbol ``L = -|k|^(1+alpha)``. ``ETD_RK2`` is the two-stage
exponential integrator of Cox and Matthews; its first stage is exponential
Euler, and the difference of the two stages serves as the embedded error
estimate for step-size control.
"""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kernel_eval import (DEFAULT_WINDOW, DirectQuadrature, SeriesTruncated, SplitSpectral,
                          Window, evaluate, linear_symbol, nonlinear_part)
from .spectral_core import AlphaParams, ScalarField, SpectralField, forward, inverse

__all__ = ["StepperConfig", "SimState", "Hooks", "StepperError", "step", "run", "phi1", "phi2"]

_METHODS = ("ETD_RK2", "RK4_explicit")


class StepperError(RuntimeError):
    """Integration could not continue (step underflow or non-finite RHS)."""


@dataclass(frozen=True)
class StepperConfig:
    dt_init: float = 1e-2
    dt_max: float = 0.1
    t_end: float = 1.0
    safety: float = 0.9
    rtol: float = 1e-6
    method: str = "ETD_RK2"
    rhs_method: object = SplitSpectral()
    linear_only: bool = False
    window: Window = DEFAULT_WINDOW

    def __post_init__(self):
        if not (0 < self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_init <= dt_max")
        if not (1e-12 <= self.rtol <= 1e-2):
            raise ValueError("rtol must lie in [1e-12, 1e-2]")
        if not (0 < self.safety <= 1):
            raise ValueError("safety must lie in (0, 1]")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if not isinstance(self.rhs_method, (DirectQuadrature, SplitSpectral, SeriesTruncated)):
            raise ValueError("unknown rhs_method")


@dataclass(frozen=True)
class SimState:
    t: float
    f: ScalarField
    step_count: int = 0
    last_dt: float = 0.0
    dt_next: float | None = field(default=None, compare=False)


@dataclass
class Hooks:
    """Callbacks used by :func:`run`.

    ``record`` is called on the initial state, every ``cadence`` accepted
    steps and on the final state; ``snapshot`` at each of ``snapshot_times``
    (the step size is clipped to land on them); ``step`` after every accepted
    step.
    """

    record: Callable[[SimState], None] | None = None
    snapshot: Callable[[SimState], None] | None = None
    step: Callable[[SimState], None] | None = None
    cadence: int = 1
    snapshot_times: Sequence[float] = ()


def phi1(z):
    """``(e^z - 1)/z`` with a Taylor branch for ``|z| < 1e-2``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    out = np.where(small, 0.0, np.expm1(zs) / zs)
    zt = z[small]
    out[small] = 1.0 + zt / 2 * (1.0 + zt / 3 * (1.0 + zt / 4 * (1.0 + zt / 5 * (1.0 + zt / 6))))
    return out


def phi2(z):
    """``(e^z - 1 - z)/z^2`` with a Taylor branch for ``|z| < 1e-2``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    out = np.where(small, 0.0, (np.expm1(zs) - zs) / (zs * zs))
    zt = z[small]
    out[small] = 0.5 + zt / 6 * (1.0 + zt / 4 * (1.0 + zt / 5 * (1.0 + zt / 6 * (1.0 + zt / 7))))
    return out


def _initial_dt(state: SimState, cfg: StepperConfig, ap: AlphaParams) -> float:
    if state.dt_next is not None:
        return min(state.dt_next, cfg.dt_max)
    kmax = float(np.max(state.f.grid.kabs()))
    return min(cfg.dt_init, 0.5 / kmax ** ap.order)


def _nl_hat(u_hat, grid, ap, cfg):
    if cfg.linear_only:
        return np.zeros_like(u_hat)
    f = inverse(SpectralField(grid, u_hat))
    n = nonlinear_part(f, ap, cfg.rhs_method, cfg.window)
    if not np.all(np.isfinite(n)):
        raise StepperError("non-finite value in the right-hand side")
    nh = forward(ScalarField(grid, n)).coeffs
    nh[0, 0] = 0.0  # the contour integral has zero mean
    return nh


def _full_rhs_hat(u_hat, grid, ap, cfg, lin):
    if cfg.linear_only:
        return lin * u_hat
    f = inverse(SpectralField(grid, u_hat))
    r = evaluate(f, ap, cfg.rhs_method, cfg.window).values
    if not np.all(np.isfinite(r)):
        raise StepperError("non-finite value in the right-hand side")
    rh = forward(ScalarField(grid, r)).coeffs
    rh[0, 0] = 0.0
    return rh


def _etd_rk2(u, dt, grid, ap, cfg, lin, n0):
    z = lin * dt
    E = np.exp(z)
    u1 = E * u + dt * phi1(z) * n0
    n1 = _nl_hat(u1, grid, ap, cfg)
    u2 = u1 + dt * phi2(z) * (n1 - n0)
    return u2, u2 - u1


def _rk4(u, dt, grid, ap, cfg, lin):
    f = lambda v: _full_rhs_hat(v, grid, ap, cfg, lin)
    k1 = f(u)
    k2 = f(u + 0.5 * dt * k1)
    k3 = f(u + 0.5 * dt * k2)
    k4 = f(u + dt * k3)
    return u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _norm(c):
    return float(np.sqrt(np.sum(np.abs(c) ** 2)))


def step(state: SimState, cfg: StepperConfig, alpha, t_stop: float | None = None) -> SimState:
    """Advance by one accepted step, retrying with smaller ``dt`` as needed.

    ``t_stop`` caps the step so that it lands exactly on that time.
    """
    ap = alpha if isinstance(alpha, AlphaParams) else AlphaParams(alpha)
    grid = state.f.grid
    t_stop = cfg.t_end if t_stop is None else t_stop
    lin = linear_symbol(grid, ap.alpha)
    u = forward(state.f).coeffs
    dt = _initial_dt(state, cfg, ap)
    floor = 1e-14 * max(cfg.t_end, 1e-300)
    n0 = _nl_hat(u, grid, ap, cfg) if cfg.method == "ETD_RK2" else None
    while True:
        land = False
        if state.t + dt >= t_stop:
            dt, land = t_stop - state.t, True
        if dt < floor:
            raise StepperError(f"step size underflow: dt={dt:.3e} at t={state.t:.6g}")
        if cfg.method == "ETD_RK2":
            u_new, diff = _etd_rk2(u, dt, grid, ap, cfg, lin, n0)
            order = 2
        else:
            u_new = _rk4(u, dt, grid, ap, cfg, lin)
            u_half = _rk4(_rk4(u, 0.5 * dt, grid, ap, cfg, lin), 0.5 * dt, grid, ap, cfg, lin)
            diff = (u_half - u_new) / 15.0
            u_new = u_half
            order = 5
        if not np.all(np.isfinite(u_new)):
            raise StepperError("non-finite state after step")
        scale = max(_norm(u), _norm(u_new))
        err = _norm(diff) / scale if scale > 0 else 0.0
        if err <= cfg.rtol:
            grow = 5.0 if err == 0 else min(5.0, max(0.2, cfg.safety * (cfg.rtol / err) ** (1.0 / order)))
            t_new = t_stop if land else state.t + dt
            f_new = inverse(SpectralField(grid, u_new))
            dt_next = dt * grow
            if land and state.dt_next:
                # a step shortened to hit t_stop says little about the next one
                dt_next = max(dt_next, state.dt_next)
            dt_next = min(cfg.dt_max, dt_next)
            return SimState(t_new, f_new, state.step_count + 1, dt, dt_next)
        dt *= max(0.2, cfg.safety * (cfg.rtol / err) ** (1.0 / order))


def run(f0: ScalarField, cfg: StepperConfig, alpha, hooks: Hooks | None = None) -> SimState:
    """Integrate from ``t = 0`` to ``cfg.t_end``."""
    ap = alpha if isinstance(alpha, AlphaParams) else AlphaParams(alpha)
    hooks = hooks or Hooks()
    state = SimState(0.0, f0)
    snaps = sorted(float(t) for t in hooks.snapshot_times if 0.0 <= t <= cfg.t_end)
    if hooks.snapshot and snaps and snaps[0] == 0.0:
        hooks.snapshot(state)
        snaps.pop(0)
    if hooks.record:
        hooks.record(state)
    while state.t < cfg.t_end:
        target = min([cfg.t_end] + snaps)
        state = step(state, cfg, ap, t_stop=target)
        if hooks.step:
            hooks.step(state)
        if snaps and state.t >= snaps[0]:
            if hooks.snapshot:
                hooks.snapshot(state)
            snaps.pop(0)
        if hooks.record and (state.step_count % max(1, hooks.cadence) == 0 or state.t >= cfg.t_end):
            hooks.record(state)
    return state
