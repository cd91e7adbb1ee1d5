"""Explicit Runge-Kutta integration with sampling, projection and early stopping.

The flows here have polynomial right-hand sides on complex arrays.  States
are integrated as complex ndarrays of any shape; the integrator lands
exactly on every sample time k * record_stride.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class IntegrationAborted(RuntimeError):
    """Step-size underflow or non-finite state; carries the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class FlowConfig:
    t_end: float = 10.0
    integrator: str = "dp45"        # "dp45" (adaptive 4(5)) or "rk4" (fixed step)
    step: float = 1e-2              # rk4 step; also an upper bound hint for dp45
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    record_stride: float = 0.1
    eps_fix: float = 1e-8
    dwell: float = 1.0
    drift_tol: float = 1e-10
    stop_on_fixed_point: bool = True
    coordinates: str = "orbit"      # "orbit" (state g with mu = g . mu0) or "direct"
    rank_tol: float = 1e-10
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.integrator not in ("dp45", "rk4"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.coordinates not in ("orbit", "direct"):
            raise ValueError(f"unknown coordinates {self.coordinates!r}")
        for name in ("t_end", "step", "abs_tol", "rel_tol", "record_stride", "drift_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.eps_fix < 0 or self.dwell < 0:
            raise ValueError("eps_fix and dwell must be nonnegative")

    def sample_times(self) -> np.ndarray:
        count = int(math.floor(self.t_end / self.record_stride * (1 + 1e-12))) + 1
        return np.arange(count) * self.record_stride


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _dp45_attempt(f, t, y, h, k1):
    ks = [k1]
    for s in range(1, 7):
        ys = y + h * sum(a * k for a, k in zip(_A[s], ks))
        ks.append(f(t + _C[s] * h, ys))
    y5 = y + h * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
    return y5, err, ks[6]


def _err_norm(err, y, ynew, atol, rtol, blocks=False):
    # normwise (Frobenius) control: invariant under unitary changes of basis and
    # insensitive to individual components that decay faster than the rest.
    # With ``blocks`` each slice along the first axis is controlled separately.
    if blocks:
        return max(_err_norm(e, a, b, atol, rtol) for e, a, b in zip(err, y, ynew))
    sc = atol + rtol * max(np.linalg.norm(y), np.linalg.norm(ynew))
    return float(np.linalg.norm(err) / sc)


def _initial_step(f, t, y, f0, atol, rtol, hmax):
    sc = atol + rtol * np.linalg.norm(y)
    d0 = np.linalg.norm(y) / sc
    d1 = np.linalg.norm(f0) / sc
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h0, hmax)


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    cfg: FlowConfig,
    on_sample: Callable[[float, np.ndarray], bool],
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    blocks: bool = False,
) -> str:
    """Integrate y' = rhs(t, y) from 0 to cfg.t_end.

    ``on_sample(t, y)`` is called at every sample time (including t = 0) and
    returns True to stop.  ``project`` is applied after every accepted step.
    Returns "completed" or "stopped"; raises IntegrationAborted on
    underflow or non-finite states (samples already delivered are kept by
    the caller).  ``blocks`` switches to per-block error control, the blocks
    being the slices of the state along its first axis.
    """
    y = np.array(y0, dtype=complex)
    if project is not None:
        y = project(y)
    samples = cfg.sample_times()
    t = 0.0
    if on_sample(t, y):
        return "stopped"
    steps = 0
    h = None
    k1 = None
    for t_next in samples[1:]:
        while t < t_next:
            remaining = t_next - t
            if cfg.integrator == "rk4":
                hs = min(cfg.step, remaining)
                if remaining - hs < 1e-12 * max(1.0, t_next):
                    hs = remaining
                y = _rk4_step(rhs, t, y, hs)
                t = t_next if hs == remaining else t + hs
                if project is not None:
                    y = project(y)
                steps += 1
            else:
                if k1 is None:
                    with np.errstate(over="ignore", invalid="ignore"):
                        k1 = rhs(t, y)
                    if not np.all(np.isfinite(k1)):
                        raise IntegrationAborted(f"non-finite vector field at t={t:.6g}")
                if h is None:
                    h = _initial_step(rhs, t, y, k1, cfg.abs_tol, cfg.rel_tol, remaining)
                while True:
                    hs = min(h, remaining)
                    last = hs >= remaining * (1 - 1e-12)
                    if last:
                        hs = remaining
                    with np.errstate(over="ignore", invalid="ignore"):
                        ynew, err, k7 = _dp45_attempt(rhs, t, y, hs, k1)
                        en = _err_norm(err, y, ynew, cfg.abs_tol, cfg.rel_tol, blocks)
                    if not np.isfinite(en):
                        en = np.inf
                    if en <= 1.0:
                        break
                    h = hs * max(0.2, 0.9 * en ** -0.2) if np.isfinite(en) else hs * 0.2
                    if not h >= 1e-14 * max(1.0, abs(t)):   # also catches NaN
                        raise IntegrationAborted(f"step-size underflow at t={t:.6g}")
                fac = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
                t = t_next if last else t + hs
                y = ynew
                if project is not None:
                    y = project(y)
                    k1 = rhs(t, y)
                else:
                    k1 = k7
                # a step clipped to a sample time says nothing about the natural step
                if not last or fac < 1.0:
                    h = hs * fac
                steps += 1
            if not np.all(np.isfinite(y)):
                raise IntegrationAborted(f"non-finite state at t={t:.6g}")
            if steps > cfg.max_steps:
                raise IntegrationAborted(f"step budget exhausted at t={t:.6g}")
        if on_sample(t, y):
            return "stopped"
    return "completed"
