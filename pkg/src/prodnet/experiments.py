"""Reproducible experiment suites: random ensembles and analytic set pieces.

Every experiment is a pure function of its configuration. Per-trial random
streams are derived from the master seed by a counter-based scheme
(SeedSequence spawn keys), so trial t draws the same numbers regardless of
execution order or batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .core import Economy, InternalConsistencyError
from .growth import policy_gradient_matrix, squared_inverse_diagonal_gradient
from .network import domar_weights, leontief_inverse, output_multipliers


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, stable under reordering."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    )


def generate_random_economy(
    n: int,
    seed: int | np.random.Generator,
    intermediate_share_range: tuple[float, float] = (0.2, 0.8),
    with_preferences: bool = False,
) -> Economy:
    """Draw a valid economy: per row, a total intermediate share from the
    given range split over inputs by flat Dirichlet weights; consumption
    shares are a flat Dirichlet draw. Deterministic given the seed."""
    lo, hi = intermediate_share_range
    if not (0.0 <= lo <= hi < 1.0):
        raise ValueError(f"share range must satisfy 0 <= lo <= hi < 1, got [{lo}, {hi}]")
    rng = np.random.default_rng(seed)
    s = rng.uniform(lo, hi, n)
    weights = rng.dirichlet(np.ones(n), size=n)
    A = s[:, None] * weights
    cons = rng.dirichlet(np.ones(n))
    cons = cons / cons.sum()
    return Economy(
        A=A,
        labor_shares=1.0 - s,
        consumption_shares=cons,
        preferences=cons if with_preferences else None,
    )


@dataclass(frozen=True)
class EnsembleConfig:
    """Monte Carlo ensemble description; endowment rates are drawn uniformly
    from [lambda_center - lambda_halfwidth, lambda_center + lambda_halfwidth].

    The default draw keeps the common endowment level small against the draw
    width. The theoretical slope of the correlation study drops conditional
    network terms that average out only when the endowment noise dominates
    the common level, so this is the regime in which the formula is a fair
    target; the assumption residuals quantify the departure either way.
    """

    n_industries: int = 20
    n_trials: int = 1000
    seed: int = 0
    intermediate_share_range: tuple[float, float] = (0.2, 0.8)
    lambda_center: float = 0.1
    lambda_halfwidth: float = 1.0
    alpha: float = 0.5
    beta: float = 0.9

    def __post_init__(self):
        lo, hi = self.intermediate_share_range
        if not (0.0 < lo <= hi < 1.0):
            raise ValueError(
                f"intermediate_share_range must be inside (0, 1), got [{lo}, {hi}]"
            )
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.n_industries < 1:
            raise ValueError("n_industries must be at least 1")
        if self.lambda_halfwidth < 0:
            raise ValueError("lambda_halfwidth must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "n_industries": self.n_industries,
            "n_trials": self.n_trials,
            "seed": self.seed,
            "intermediate_share_range": list(self.intermediate_share_range),
            "lambda_center": self.lambda_center,
            "lambda_halfwidth": self.lambda_halfwidth,
            "alpha": self.alpha,
            "beta": self.beta,
        }


@dataclass(frozen=True)
class CorrelationReport:
    """Multiplier/growth-rate correlation study over a random ensemble.

    The theoretical slope (alpha*lambda_bar + (beta-1)*gamma_bar) / beta uses
    ensemble sample means. ``assumption_residual_*`` measure how far the
    ensemble is from the conditional-independence idealization behind that
    slope (pooled correlation between the multiplier and the within-trial
    deviation terms); they are diagnostics, not assertions.
    """

    config: EnsembleConfig
    n_trials_used: int
    excluded_trials: int
    per_trial_correlation: np.ndarray
    mean_correlation: float
    sign_agreement_rate: float
    predicted_sign: float
    sign_match: bool
    pooled_slope: float
    pooled_slope_se: float          # trial-clustered (the honest one: samples cluster by trial)
    pooled_slope_se_naive: float    # i.i.d. OLS formula, for reference
    pooled_intercept: float
    theoretical_slope: float
    lambda_bar: float
    gamma_bar: float
    assumption_residual_lambda: float
    assumption_residual_gamma: float
    samples: np.ndarray  # columns: trial, industry, multiplier, gamma0, lambda

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "n_trials_used": self.n_trials_used,
            "excluded_trials": self.excluded_trials,
            "mean_correlation": self.mean_correlation,
            "sign_agreement_rate": self.sign_agreement_rate,
            "predicted_sign": self.predicted_sign,
            "sign_match": self.sign_match,
            "pooled_slope": self.pooled_slope,
            "pooled_slope_se": self.pooled_slope_se,
            "pooled_slope_se_naive": self.pooled_slope_se_naive,
            "pooled_intercept": self.pooled_intercept,
            "theoretical_slope": self.theoretical_slope,
            "lambda_bar": self.lambda_bar,
            "gamma_bar": self.gamma_bar,
            "assumption_residual_lambda": self.assumption_residual_lambda,
            "assumption_residual_gamma": self.assumption_residual_gamma,
            "per_trial_correlation": self.per_trial_correlation.tolist(),
        }

    def sample_header(self) -> list[str]:
        return ["trial", "industry", "multiplier", "gamma0", "lambda"]


def _pooled_ols(
    x: np.ndarray, y: np.ndarray, cluster: np.ndarray
) -> tuple[float, float, float, float]:
    """Slope, intercept, clustered slope SE, and naive slope SE of y on x.

    The clustered standard error sums score contributions within each cluster
    (trial) before squaring, which is the appropriate variance when samples
    are dependent within trials and independent across them.
    """
    x_bar = x.mean()
    y_bar = y.mean()
    xt = x - x_bar
    sxx = float((xt**2).sum())
    if sxx == 0.0:
        raise ValueError("zero variance in the regressor")
    slope = float((xt * (y - y_bar)).sum()) / sxx
    intercept = y_bar - slope * x_bar
    resid = y - (intercept + slope * x)
    dof = max(x.size - 2, 1)
    se_naive = math.sqrt(float((resid**2).sum()) / dof / sxx)
    scores = np.zeros(int(cluster.max()) + 1)
    np.add.at(scores, cluster.astype(int), xt * resid)
    se_cluster = math.sqrt(float((scores**2).sum())) / sxx
    return slope, float(intercept), se_cluster, se_naive


def prop1_study(config: EnsembleConfig) -> CorrelationReport:
    """Correlate output multipliers with steady-state growth rates trial by
    trial and pool the regression of rates on multipliers."""
    if config.beta <= 0:
        raise ValueError("the theoretical slope divides by beta; need beta > 0")
    n = config.n_industries
    alpha, beta = config.alpha, config.beta
    eye = np.eye(n)

    correlations: list[float] = []
    mult_all: list[np.ndarray] = []
    gamma_all: list[np.ndarray] = []
    lam_all: list[np.ndarray] = []
    res_lam_all: list[np.ndarray] = []
    res_gam_all: list[np.ndarray] = []
    rows: list[np.ndarray] = []
    excluded = 0

    for t in range(config.n_trials):
        rng = trial_rng(config.seed, t)
        econ = generate_random_economy(n, rng, config.intermediate_share_range)
        lam = rng.uniform(
            config.lambda_center - config.lambda_halfwidth,
            config.lambda_center + config.lambda_halfwidth,
            n,
        )
        H = leontief_inverse(econ.A, 1.0)
        mult = output_multipliers(H)
        gamma0 = alpha * np.linalg.solve(eye - beta * econ.A, lam)
        if n < 2 or float(np.ptp(mult)) == 0.0:
            excluded += 1
            continue
        correlations.append(float(np.corrcoef(mult, gamma0)[0, 1]))
        mult_all.append(mult)
        gamma_all.append(gamma0)
        lam_all.append(lam)
        res_lam_all.append(H @ (lam - lam.mean()))
        res_gam_all.append(H @ (gamma0 - gamma0.mean()))
        block = np.column_stack(
            [np.full(n, t, dtype=float), np.arange(n, dtype=float), mult, gamma0, lam]
        )
        rows.append(block)

    if not correlations:
        raise ValueError("every trial was degenerate (no multiplier variance)")

    samples = np.vstack(rows)
    mult_pool = np.concatenate(mult_all)
    gamma_pool = np.concatenate(gamma_all)
    lam_pool = np.concatenate(lam_all)
    corr = np.asarray(correlations)
    lambda_bar = float(lam_pool.mean())
    gamma_bar = float(gamma_pool.mean())
    slope, intercept, se, se_naive = _pooled_ols(mult_pool, gamma_pool, samples[:, 0])
    theoretical = (alpha * lambda_bar + (beta - 1.0) * gamma_bar) / beta
    predicted = float(np.sign(alpha * lambda_bar - (1.0 - beta) * gamma_bar))
    agree = float(np.mean(np.sign(corr) == predicted)) if predicted != 0 else 0.0

    res_lam = float(np.corrcoef(mult_pool, np.concatenate(res_lam_all))[0, 1])
    res_gam = float(np.corrcoef(mult_pool, np.concatenate(res_gam_all))[0, 1])

    return CorrelationReport(
        config=config,
        n_trials_used=len(correlations),
        excluded_trials=excluded,
        per_trial_correlation=corr,
        mean_correlation=float(corr.mean()),
        sign_agreement_rate=agree,
        predicted_sign=predicted,
        sign_match=bool(np.sign(corr.mean()) == predicted),
        pooled_slope=slope,
        pooled_slope_se=se,
        pooled_slope_se_naive=se_naive,
        pooled_intercept=intercept,
        theoretical_slope=theoretical,
        lambda_bar=lambda_bar,
        gamma_bar=gamma_bar,
        assumption_residual_lambda=res_lam,
        assumption_residual_gamma=res_gam,
        samples=samples,
    )


@dataclass(frozen=True)
class SweepPoint:
    lambda_center: float
    mean_correlation: float
    lambda_bar: float
    gamma_bar: float
    boundary: float          # realized (1 - beta) * gamma_bar / alpha
    predicted_sign: float
    sign_match: bool

    def to_dict(self) -> dict:
        return {
            "lambda_center": self.lambda_center,
            "mean_correlation": self.mean_correlation,
            "lambda_bar": self.lambda_bar,
            "gamma_bar": self.gamma_bar,
            "boundary": self.boundary,
            "predicted_sign": self.predicted_sign,
            "sign_match": self.sign_match,
        }


@dataclass(frozen=True)
class SweepReport:
    """Mean correlation across a sweep of the endowment-rate center.

    The mean growth rate is recomputed per sweep point (it depends on the
    center), so the boundary is the realized one, not an assumed constant.
    """

    points: tuple[SweepPoint, ...]

    @property
    def all_match(self) -> bool:
        return all(p.sign_match for p in self.points)

    def to_dict(self) -> dict:
        return {"points": [p.to_dict() for p in self.points], "all_match": self.all_match}


def prop1_sweep(config: EnsembleConfig, lambda_centers: Iterable[float]) -> SweepReport:
    points = []
    for center in lambda_centers:
        report = prop1_study(replace(config, lambda_center=float(center)))
        points.append(
            SweepPoint(
                lambda_center=float(center),
                mean_correlation=report.mean_correlation,
                lambda_bar=report.lambda_bar,
                gamma_bar=report.gamma_bar,
                boundary=(1.0 - config.beta) * report.gamma_bar / config.alpha,
                predicted_sign=report.predicted_sign,
                sign_match=report.sign_match,
            )
        )
    return SweepReport(points=tuple(points))


# ---------------------------------------------------------------------------
# Two-economy contrast (equal Domar weights, different gradient forms)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairContrastReport:
    """Two 2-industry economies with identical Domar weights whose gradient
    forms disagree: the dense contraction is blind to the coupling difference
    while the diagonal component form is not. Both are reported unaltered."""

    economy_a: Economy
    economy_b: Economy
    H_a: np.ndarray
    H_b: np.ndarray
    theta_a: np.ndarray
    theta_b: np.ndarray
    matrix_gradient_a: np.ndarray
    matrix_gradient_b: np.ndarray
    component_gradient_a: np.ndarray
    component_gradient_b: np.ndarray
    note: str

    def to_dict(self) -> dict:
        return {
            "economy_a": self.economy_a.to_dict(),
            "economy_b": self.economy_b.to_dict(),
            "H_a": self.H_a.tolist(),
            "H_b": self.H_b.tolist(),
            "theta_a": self.theta_a.tolist(),
            "theta_b": self.theta_b.tolist(),
            "matrix_gradient_a": self.matrix_gradient_a.tolist(),
            "matrix_gradient_b": self.matrix_gradient_b.tolist(),
            "component_gradient_a": self.component_gradient_a.tolist(),
            "component_gradient_b": self.component_gradient_b.tolist(),
            "note": self.note,
        }


def diagonal_pair_economies() -> tuple[Economy, Economy]:
    """The canonical pair: a self-loop-only network and a uniformly coupled
    network, both with labor shares and consumption/preference weights 1/2."""
    half = np.array([0.5, 0.5])
    econ_a = Economy(
        A=np.array([[0.5, 0.0], [0.0, 0.5]]),
        labor_shares=half,
        consumption_shares=half,
        preferences=half,
    )
    econ_b = Economy(
        A=np.full((2, 2), 0.25),
        labor_shares=half,
        consumption_shares=half,
        preferences=half,
    )
    return econ_a, econ_b


def equal_domar_experiment(alpha: float = 1.0, beta: float = 1.0) -> PairContrastReport:
    """Contrast the dense and diagonal gradient forms on the canonical pair."""
    econ_a, econ_b = diagonal_pair_economies()
    H_a = leontief_inverse(econ_a.A, 1.0)
    H_b = leontief_inverse(econ_b.A, 1.0)
    theta_a = domar_weights(econ_a)
    theta_b = domar_weights(econ_b)
    grad_a = policy_gradient_matrix(econ_a, alpha, beta).total
    grad_b = policy_gradient_matrix(econ_b, alpha, beta).total
    comp_a = squared_inverse_diagonal_gradient(H_a, alpha, econ_a.preferences)
    comp_b = squared_inverse_diagonal_gradient(H_b, alpha, econ_b.preferences)
    note = (
        "Domar weights are identical across the pair, yet the gradient forms "
        "split on the coupled network: the dense contraction gives "
        f"{grad_b.tolist()} while the diagonal component form gives "
        f"{comp_b.tolist()} (they agree on the uncoupled network). Both are "
        "reported; neither is silently preferred."
    )
    return PairContrastReport(
        economy_a=econ_a,
        economy_b=econ_b,
        H_a=H_a,
        H_b=H_b,
        theta_a=theta_a,
        theta_b=theta_b,
        matrix_gradient_a=grad_a,
        matrix_gradient_b=grad_b,
        component_gradient_a=comp_a,
        component_gradient_b=comp_b,
        note=note,
    )


# ---------------------------------------------------------------------------
# Gradient-collapse check (no spillovers, unit elasticity)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HultenRecoveryReport:
    """Policy gradient against Domar weights on one random economy.

    In the special case beta = 0, alpha = 1 with no Domar response the two
    must agree exactly; the report asserts that. Outside the special case the
    gap is informative and is reported without assertion.
    """

    n: int
    seed: int
    alpha: float
    beta: float
    domar: np.ndarray
    gradient: np.ndarray
    max_gap: float
    special_case: bool
    recovered: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "alpha": self.alpha,
            "beta": self.beta,
            "domar": self.domar.tolist(),
            "gradient": self.gradient.tolist(),
            "max_gap": self.max_gap,
            "special_case": self.special_case,
            "recovered": self.recovered,
        }


def hulten_recovery_experiment(
    n: int,
    seed: int,
    beta: float = 0.0,
    alpha: float = 1.0,
    intermediate_share_range: tuple[float, float] = (0.2, 0.8),
) -> HultenRecoveryReport:
    economy = generate_random_economy(n, trial_rng(seed, 0), intermediate_share_range)
    theta = domar_weights(economy)
    gradient = policy_gradient_matrix(economy, alpha, beta).total
    gap = float(np.abs(gradient - theta).max())
    special = beta == 0.0 and alpha == 1.0
    if special and gap > 1e-12:
        raise InternalConsistencyError(
            f"gradient should collapse to the Domar weights but differs by {gap:.3e}"
        )
    return HultenRecoveryReport(
        n=n,
        seed=seed,
        alpha=alpha,
        beta=beta,
        domar=theta,
        gradient=gradient,
        max_gap=gap,
        special_case=special,
        recovered=special and gap <= 1e-12,
    )
