"""Interdependent productivity dynamics on the industry network.

Productivity stocks grow by a Cobb-Douglas law whose cross-elasticities are
the damped network coefficients beta*a_ij, driven by exponentially growing
endowments. The growth rates then obey an autonomous competitive
Lotka-Volterra system

    dgamma/dt = D(gamma) (alpha*lambda - (I - beta*A) gamma),

whose interior fixed point has the closed form
gamma0 = alpha (I - beta*A)^{-1} lambda and is globally stable on the
positive orthant (the interaction matrix is a negated M-matrix, hence
diagonally stable).

Stock trajectories are integrated in log coordinates: raw stocks grow
super-exponentially and overflow, while u = ln Z satisfies du/dt = gamma(t, u)
with gamma bounded near the steady state. Rate trajectories carry the stocks
implied by accumulating the integrated rates from the configured initial
stocks, which keeps both integration modes exportable in one schema.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import rk45
from .core import Economy, TFPConfig

#: declared convergence tolerance for the sup-norm gap to the closed form
CONVERGENCE_TOL = 1e-8


class NonPositiveRateWarning(UserWarning):
    """Steady-state positivity and global stability are not guaranteed."""


def rate_field(gamma: np.ndarray, config: TFPConfig, economy: Economy) -> np.ndarray:
    """Right-hand side of the growth-rate system, componentwise
    gamma_i * (alpha*lambda_i + beta * sum_j a_ij gamma_j - gamma_i)."""
    gamma = np.asarray(gamma, dtype=float)
    return gamma * (
        config.alpha * config.lam + config.beta * (economy.A @ gamma) - gamma
    )


def steady_state(config: TFPConfig, economy: Economy) -> np.ndarray:
    """Closed-form fixed point alpha * (I - beta*A)^{-1} lambda.

    Algebraically valid for any lambda; positivity (and with it the global
    stability guarantee) only holds when the result is strictly positive,
    so nonpositive components trigger a warning rather than an error.
    """
    n = economy.n
    gamma0 = config.alpha * np.linalg.solve(
        np.eye(n) - config.beta * economy.A, config.lam
    )
    if np.any(config.lam <= 0):
        warnings.warn(
            "lambda has nonpositive components; steady-state positivity is not guaranteed",
            NonPositiveRateWarning,
            stacklevel=2,
        )
    if np.any(gamma0 <= 0):
        boundary = np.flatnonzero(gamma0 == 0.0).tolist()
        negative = np.flatnonzero(gamma0 < 0.0).tolist()
        warnings.warn(
            f"steady state is not interior (zero components {boundary}, "
            f"negative components {negative}); global stability is not guaranteed",
            NonPositiveRateWarning,
            stacklevel=2,
        )
    return gamma0


@dataclass(frozen=True)
class GrowthState:
    """One trajectory sample: stocks must stay positive and rates finite."""

    t: float
    Z: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.Z) <= 0):
            raise ValueError(f"stocks must be positive at t = {self.t}")
        if not np.all(np.isfinite(self.gamma)):
            raise ValueError(f"rates must be finite at t = {self.t}")


@dataclass(frozen=True)
class IntegratorStats:
    steps_accepted: int
    steps_rejected: int
    rhs_evaluations: int
    final_error_estimate: float

    def to_dict(self) -> dict:
        return {
            "steps_accepted": self.steps_accepted,
            "steps_rejected": self.steps_rejected,
            "rhs_evaluations": self.rhs_evaluations,
            "final_error_estimate": self.final_error_estimate,
        }


@dataclass(frozen=True)
class ConvergenceDiagnostic:
    """Gap between the trajectory tail and the closed-form steady state.

    ``settled_at`` is the earliest sample time from which every later sample
    stays within tolerance; convergence is declared only if the settled span
    covers at least one tenth of the integration horizon, so a trajectory
    that merely brushes the fixed point does not count.
    """

    steady_state: np.ndarray
    final_gap: float
    converged: bool
    settled_at: float | None
    tolerance: float = CONVERGENCE_TOL

    def to_dict(self) -> dict:
        return {
            "steady_state": self.steady_state.tolist(),
            "final_gap": self.final_gap,
            "converged": self.converged,
            "settled_at": self.settled_at,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples of stocks and rates plus integrator metadata."""

    times: np.ndarray       # (m,)
    stocks: np.ndarray      # (m, n)
    rates: np.ndarray       # (m, n)
    stats: IntegratorStats
    convergence: ConvergenceDiagnostic | None = None

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(self.stocks <= 0):
            raise ValueError("stocks must remain positive along the trajectory")
        if not np.all(np.isfinite(self.rates)):
            raise ValueError("rates must remain finite along the trajectory")

    @property
    def n(self) -> int:
        return self.stocks.shape[1]

    def state(self, index: int) -> GrowthState:
        return GrowthState(
            t=float(self.times[index]), Z=self.stocks[index], gamma=self.rates[index]
        )

    @property
    def final(self) -> GrowthState:
        return self.state(len(self.times) - 1)

    def rows(self):
        """Yield (t, Z_1..Z_n, gamma_1..gamma_n) rows for delimited export."""
        for i in range(len(self.times)):
            yield [float(self.times[i]), *self.stocks[i], *self.rates[i]]

    def header(self) -> list[str]:
        cols = ["t"]
        cols += [f"Z_{i + 1}" for i in range(self.n)]
        cols += [f"gamma_{i + 1}" for i in range(self.n)]
        return cols


def _diagnose(times: np.ndarray, rates: np.ndarray, gamma0: np.ndarray,
              tol: float = CONVERGENCE_TOL) -> ConvergenceDiagnostic:
    gaps = np.abs(rates - gamma0[None, :]).max(axis=1)
    final_gap = float(gaps[-1])
    horizon = float(times[-1] - times[0])
    window = horizon / 10.0
    settled_at = None
    above = np.flatnonzero(gaps > tol)
    first_settled = 0 if above.size == 0 else int(above[-1]) + 1
    if first_settled < len(times):
        settled_at = float(times[first_settled])
    converged = settled_at is not None and float(times[-1]) - settled_at >= window
    return ConvergenceDiagnostic(
        steady_state=gamma0, final_gap=final_gap, converged=converged,
        settled_at=settled_at, tolerance=tol,
    )


def integrate_rates(
    gamma0: np.ndarray,
    config: TFPConfig,
    economy: Economy,
    t_end: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate the growth-rate system from strictly positive initial rates.

    The state is augmented with log stocks (d ln Z / dt = gamma) so that the
    exported samples carry the stocks implied by the integrated rate path;
    stocks start from config.stocks0.
    """
    gamma_init = np.asarray(gamma0, dtype=float)
    n = economy.n
    if gamma_init.shape != (n,):
        raise ValueError(f"gamma0 must have shape ({n},)")
    if np.any(gamma_init <= 0):
        raise ValueError("initial rates must be strictly positive")
    if t_end <= 0:
        raise ValueError("t_end must be positive")

    A = economy.A
    alpha_lam = config.alpha * config.lam
    beta = config.beta

    def f(t, y):
        g = y[:n]
        dg = g * (alpha_lam + beta * (A @ g) - g)
        return np.concatenate([dg, g])

    y0 = np.concatenate([gamma_init, np.log(config.stocks0)])
    res = rk45.integrate(f, 0.0, y0, t_end, rtol=rtol, atol=atol, max_step=max_step)
    rates = res.states[:, :n]
    stocks = np.exp(res.states[:, n:])
    target = steady_state(config, economy)
    return Trajectory(
        times=res.times,
        stocks=stocks,
        rates=rates,
        stats=IntegratorStats(
            res.steps_accepted, res.steps_rejected, res.rhs_evaluations,
            res.final_error_estimate,
        ),
        convergence=_diagnose(res.times, rates, target),
    )


def integrate_stocks(
    config: TFPConfig,
    economy: Economy,
    t_end: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate the stock law in log coordinates and record implied rates.

    In u = ln Z the law reads
    du_i/dt = exp(alpha (ln E_i + lambda_i t) + ln chi_i + beta (A u)_i - u_i),
    which stays finite where raw stocks overflow.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    n = economy.n
    A = economy.A
    base = config.alpha * np.log(config.endowments) + np.log(config.chi)
    alpha_lam = config.alpha * config.lam
    beta = config.beta

    def rates_of(t, u):
        return np.exp(base + alpha_lam * t + beta * (A @ u) - u)

    def f(t, u):
        return rates_of(t, u)

    u0 = np.log(config.stocks0)
    res = rk45.integrate(f, 0.0, u0, t_end, rtol=rtol, atol=atol, max_step=max_step)
    rates = np.empty_like(res.states)
    for i in range(res.states.shape[0]):
        rates[i] = rates_of(res.times[i], res.states[i])
    target = steady_state(config, economy)
    return Trajectory(
        times=res.times,
        stocks=np.exp(res.states),
        rates=rates,
        stats=IntegratorStats(
            res.steps_accepted, res.steps_rejected, res.rhs_evaluations,
            res.final_error_estimate,
        ),
        convergence=_diagnose(res.times, rates, target),
    )
