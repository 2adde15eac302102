"""Embedded Dormand-Prince 5(4) integrator with adaptive step control.

Seven stages, first-same-as-last, 5th-order propagation with an embedded
4th-order error estimate. Accepted states are recorded at every step; the
caller gets the full step history plus acceptance/rejection counts and the
last scaled error estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Butcher tableau (Dormand & Prince 1980).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ORDER = 5


class IntegrationError(RuntimeError):
    """Integration aborted; the message carries the failure diagnostic."""


class StepSizeUnderflow(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass


@dataclass(frozen=True)
class StepperResult:
    times: np.ndarray          # (m,)
    states: np.ndarray         # (m, dim)
    steps_accepted: int
    steps_rejected: int
    rhs_evaluations: int
    final_error_estimate: float


def _error_norm(err: np.ndarray, y_old: np.ndarray, y_new: np.ndarray,
                rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, t_end, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_end - t0)
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / _ORDER)
    return min(100 * h0, h1, t_end - t0)


def integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_end: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
    max_steps: int = 1_000_000,
) -> StepperResult:
    """Integrate y' = f(t, y) from t0 to t_end, recording every accepted step."""
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    y = np.asarray(y0, dtype=float).copy()
    t = float(t0)
    times = [t]
    states = [y.copy()]
    k = np.empty((7, y.size))
    k[0] = f(t, y)
    n_rhs = 1
    accepted = rejected = 0
    last_err = 0.0

    h = min(_initial_step(f, t, y, k[0], t_end, rtol, atol), max_step)
    n_rhs += 1

    while t < t_end:
        if accepted + rejected >= max_steps:
            raise IntegrationError(
                f"step budget {max_steps} exhausted at t = {t:.6g}"
            )
        # Deciding the final step by span (not by t + h, which can round one
        # ulp short) guarantees t_end is hit without a subnormal remainder.
        span = t_end - t
        h = min(h, max_step, span)
        is_last = h >= span
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise StepSizeUnderflow(
                f"step size underflow at t = {t:.6g} (h = {h:.3e})"
            )
        for i in range(1, 7):
            yi = y + h * (k[:i].T @ _A[i])
            k[i] = f(t + _C[i] * h, yi)
        n_rhs += 6
        y_new = y + h * (k.T @ _B5)
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState(
                f"non-finite state produced at t = {t:.6g} with step {h:.3e}"
            )
        err = h * (k.T @ _E)
        norm = _error_norm(err, y, y_new, rtol, atol)
        if norm <= 1.0:
            t = t_end if is_last else t + h
            # FSAL: the 7th stage was evaluated at (t + h, y_new).
            k[0] = k[6]
            y = y_new
            times.append(t)
            states.append(y.copy())
            accepted += 1
            last_err = norm
            factor = _MAX_FACTOR if norm == 0.0 else min(
                _MAX_FACTOR, _SAFETY * norm ** (-1 / _ORDER)
            )
        else:
            rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * norm ** (-1 / _ORDER))
            factor = min(factor, 1.0)
        h *= max(factor, _MIN_FACTOR)

    return StepperResult(
        times=np.asarray(times),
        states=np.asarray(states),
        steps_accepted=accepted,
        steps_rejected=rejected,
        rhs_evaluations=n_rhs,
        final_error_estimate=last_err,
    )
