"""Growth accounting, sensitivity analysis, and the log-preference equilibrium.

Price propagation, aggregate growth, and its gradients all flow from one
convention set in :mod:`prodnet.core`: row i of A holds industry i's input
spending shares, the wage is the numeraire (w = 1, so nominal and real price
changes coincide), and Domar weights solve theta' (I - A) = c'.

Aggregate growth is always computed along two independent routes, the
sales-weighted route theta . gamma and the consumption-deflator route
-c . r_hat, and the two are asserted to agree to machine precision; any gap
is a defect in this code, never a data problem.

Two gradient contractions of the damped inverse are exposed side by side.
The canonical one fixes the policy column: d gamma0_k / d lambda_j =
alpha * H_beta[k, j], so d g / d lambda_j = alpha * (H_beta' theta)_j plus a
reallocation term when Domar weights respond. The row contraction
alpha * (H_beta theta)_j and the diagonal component form
alpha * psi_j * (H H)_jj are reported alongside because the three coincide on
symmetric networks but differ on coupled asymmetric ones; every report tags
which form produced each number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Economy, InternalConsistencyError, IOTable, TFPConfig
from .network import NetworkStats, leontief_inverse, preference_domar_weights

_AGREEMENT_TOL = 1e-12
_EQUILIBRIUM_RTOL = 1e-9


def real_price_changes(H: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Price growth induced by productivity growth: r_hat = -H gamma."""
    H = np.asarray(H, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if H.shape[1] != gamma.shape[0]:
        raise ValueError(f"H is {H.shape} but gamma has length {gamma.shape[0]}")
    return -H @ gamma


@dataclass(frozen=True)
class AggregateGrowth:
    """Aggregate consumption growth with its decomposition.

    ``g`` and ``g_deflator`` come from the two independent routes and agree
    to machine precision by construction; ``gamma_tilde_table`` is present
    when a monetary table supplied the sales weights directly.
    """

    g: float
    g_deflator: float
    gamma_tilde: float
    weighted_multiplier: float
    gamma_tilde_table: float | None = None

    def to_dict(self) -> dict:
        doc = {
            "g": self.g,
            "g_deflator_route": self.g_deflator,
            "gamma_tilde": self.gamma_tilde,
            "weighted_multiplier": self.weighted_multiplier,
        }
        if self.gamma_tilde_table is not None:
            doc["gamma_tilde_from_table"] = self.gamma_tilde_table
        return doc


def aggregate_growth(
    gamma: np.ndarray,
    economy: Economy,
    stats: NetworkStats,
    io_table: IOTable | None = None,
) -> AggregateGrowth:
    """Aggregate growth via sales weights, cross-checked against the deflator route."""
    gamma = np.asarray(gamma, dtype=float)
    theta = stats.domar
    lbar = stats.weighted_multiplier
    g_sales = float(theta @ gamma)
    gamma_tilde = g_sales / lbar
    r_hat = real_price_changes(stats.H, gamma)
    g_deflator = float(-(economy.consumption_shares @ r_hat))
    if abs(g_sales - g_deflator) > _AGREEMENT_TOL:
        raise InternalConsistencyError(
            f"sales route {g_sales:.17g} and deflator route {g_deflator:.17g} "
            f"disagree by {abs(g_sales - g_deflator):.3e}"
        )
    gamma_tilde_table = None
    if io_table is not None:
        m = io_table.revenues
        gamma_tilde_table = float(gamma @ m / io_table.total_output)
        scale = max(abs(gamma_tilde), abs(gamma_tilde_table), 1e-300)
        if abs(gamma_tilde - gamma_tilde_table) > 1e-8 * scale:
            raise InternalConsistencyError(
                f"sales-weighted mean rate {gamma_tilde:.12g} disagrees with the "
                f"table-weighted value {gamma_tilde_table:.12g}"
            )
    return AggregateGrowth(
        g=g_sales,
        g_deflator=g_deflator,
        gamma_tilde=gamma_tilde,
        weighted_multiplier=lbar,
        gamma_tilde_table=gamma_tilde_table,
    )


def hulten_sensitivities(
    stats: NetworkStats, economy: Economy, fd_step: float = 1e-6
) -> np.ndarray:
    """Growth response to industry productivity growth: the Domar weights.

    Verified on the spot against central finite differences of the deflator
    route, which does not touch the Domar weights and is therefore an
    independent witness.
    """
    theta = stats.domar
    n = theta.shape[0]
    cs = economy.consumption_shares

    def g_of(gamma):
        return float(-(cs @ real_price_changes(stats.H, gamma)))

    fd = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = fd_step
        fd[i] = (g_of(e) - g_of(-e)) / (2 * fd_step)
    gap = float(np.abs(fd - theta).max())
    if gap > 1e-6:
        raise InternalConsistencyError(
            f"finite-difference growth gradient deviates from Domar weights by {gap:.3e}"
        )
    return theta.copy()


def tfp_residual(
    output_growth: np.ndarray,
    input_growth: np.ndarray,
    labor_growth: np.ndarray,
    economy: Economy,
) -> np.ndarray:
    """Productivity growth as the output growth unexplained by inputs.

    ``input_growth[j, i]`` is the growth rate of the quantity of good j used
    by industry i (matching the flow orientation of
    :class:`EquilibriumState`), weighted by industry i's spending share on
    good j; labor growth is weighted by the labor share.
    """
    output_growth = np.asarray(output_growth, dtype=float)
    input_growth = np.asarray(input_growth, dtype=float)
    labor_growth = np.asarray(labor_growth, dtype=float)
    n = economy.n
    if input_growth.shape != (n, n):
        raise ValueError(f"input_growth must be {n}x{n}, got {input_growth.shape}")
    weighted_inputs = np.einsum("ij,ji->i", economy.A, input_growth)
    return output_growth - weighted_inputs - economy.labor_shares * labor_growth


# ---------------------------------------------------------------------------
# Policy gradients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolicyGradient:
    """Growth response to endowment growth rates, term by term.

    ``spillover_term`` contracts the damped inverse over its first index
    (alpha * H_beta' theta), matching d gamma0_k / d lambda_j =
    alpha * H_beta[k, j]; ``row_contraction_total`` swaps the contraction to
    alpha * H_beta theta for comparison (identical on symmetric networks).
    ``reallocation_term`` carries the Domar-weight response and is zero under
    the fixed-share production model.
    """

    alpha: float
    beta: float
    spillover_term: np.ndarray
    reallocation_term: np.ndarray
    row_contraction_total: np.ndarray
    contraction: str = "column"

    @property
    def total(self) -> np.ndarray:
        return self.spillover_term + self.reallocation_term

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "total": self.total.tolist(),
            "spillover_term": self.spillover_term.tolist(),
            "reallocation_term": self.reallocation_term.tolist(),
            "row_contraction_total": self.row_contraction_total.tolist(),
            "contraction": self.contraction,
        }


def policy_gradient_matrix(
    economy: Economy,
    alpha: float,
    beta: float,
    domar_response: np.ndarray | None = None,
    gamma0: np.ndarray | None = None,
) -> PolicyGradient:
    """Policy gradient at explicit (alpha, beta), independent of a TFP config.

    ``domar_response[k, j]`` is the response of Domar weight k to endowment
    rate j; omitted it is zero (the fixed-share case). ``gamma0`` is only
    needed when the response matrix is supplied.
    """
    from .network import domar_weights  # local import keeps module load acyclic

    n = economy.n
    theta = domar_weights(economy)
    H_beta = leontief_inverse(economy.A, beta)
    spillover = alpha * (H_beta.T @ theta)
    row_total = alpha * (H_beta @ theta)
    if domar_response is None:
        realloc = np.zeros(n)
    else:
        domar_response = np.asarray(domar_response, dtype=float)
        if domar_response.shape != (n, n):
            raise ValueError(
                f"domar_response must be {n}x{n}, got {domar_response.shape}"
            )
        if gamma0 is None:
            raise ValueError("gamma0 is required when domar_response is supplied")
        realloc = domar_response.T @ np.asarray(gamma0, dtype=float)
    return PolicyGradient(
        alpha=float(alpha),
        beta=float(beta),
        spillover_term=spillover,
        reallocation_term=realloc,
        row_contraction_total=row_total + realloc,
    )


def policy_gradient(
    economy: Economy,
    config: TFPConfig,
    domar_response: np.ndarray | None = None,
) -> PolicyGradient:
    """Policy gradient for a configured economy; see :func:`policy_gradient_matrix`."""
    gamma0 = None
    if domar_response is not None:
        n = economy.n
        gamma0 = config.alpha * np.linalg.solve(
            np.eye(n) - config.beta * economy.A, config.lam
        )
    return policy_gradient_matrix(
        economy, config.alpha, config.beta, domar_response, gamma0
    )


def squared_inverse_diagonal_gradient(
    H: np.ndarray, alpha: float, psi: np.ndarray
) -> np.ndarray:
    """Component form of the full-spillover gradient: alpha * psi_j * (H H)_jj.

    Sums only round trips j -> k -> j of the undamped inverse, i.e. the
    diagonal of H^2 scaled by the preference weight, in contrast to the dense
    contraction used by :func:`policy_gradient_matrix`; the two disagree on
    coupled networks and are reported side by side.
    """
    H = np.asarray(H, dtype=float)
    psi = np.asarray(psi, dtype=float)
    return alpha * psi * np.diag(H @ H)


# ---------------------------------------------------------------------------
# Log-preference equilibrium
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumState:
    """Competitive equilibrium under unit-elastic production and preferences.

    Wage numeraire w = 1 and unit labor endowment, so total consumption
    spending is 1. ``flows[j, i]`` holds units of good j used by industry i.
    """

    prices: np.ndarray
    outputs: np.ndarray
    flows: np.ndarray
    labor: np.ndarray
    consumption: np.ndarray
    revenues: np.ndarray

    def residuals(self) -> dict[str, float]:
        """Relative residuals of market clearing and both budget identities."""
        sales = self.consumption + self.flows.sum(axis=1)
        clearing = np.abs(self.outputs - sales) / np.maximum(np.abs(self.outputs), 1e-300)
        spending = self.prices @ self.flows + self.labor
        budget = np.abs(spending - self.revenues) / np.maximum(np.abs(self.revenues), 1e-300)
        hh = abs(float(self.consumption @ self.prices) - float(self.labor.sum()))
        return {
            "market_clearing": float(clearing.max()),
            "industry_budget": float(budget.max()),
            "household_budget": hh / max(float(self.labor.sum()), 1e-300),
        }

    def to_dict(self) -> dict:
        return {
            "prices": self.prices.tolist(),
            "outputs": self.outputs.tolist(),
            "flows": self.flows.tolist(),
            "labor": self.labor.tolist(),
            "consumption": self.consumption.tolist(),
            "revenues": self.revenues.tolist(),
            "residuals": self.residuals(),
        }


def cobb_douglas_equilibrium(economy: Economy, Z: np.ndarray) -> EquilibriumState:
    """Closed-form equilibrium at productivity stocks Z.

    Marginal-cost pricing under the share-normalized production scaling gives
    log-linear prices ln p = -H ln Z; revenues are the Domar weights times
    total consumption spending (= 1), and quantities follow from the spending
    shares. All equilibrium identities are asserted before returning.
    """
    if economy.preferences is None:
        raise ValueError("equilibrium requires preference weights on the economy")
    Z = np.asarray(Z, dtype=float)
    n = economy.n
    if Z.shape != (n,):
        raise ValueError(f"Z must have shape ({n},)")
    if np.any(Z <= 0):
        raise ValueError("productivity stocks must be strictly positive")

    H = leontief_inverse(economy.A, 1.0)
    log_p = -H @ np.log(Z)
    p = np.exp(log_p)
    psi = economy.preferences
    theta = preference_domar_weights(economy)
    m = theta * 1.0                      # total consumption spending S = w * L = 1
    Y = m / p
    C = psi / p
    X = (economy.A.T * m[None, :]) / p[:, None]
    L = economy.labor_shares * m

    state = EquilibriumState(
        prices=p, outputs=Y, flows=X, labor=L, consumption=C, revenues=m
    )
    residuals = state.residuals()
    worst = max(residuals.values())
    if worst > _EQUILIBRIUM_RTOL:
        raise InternalConsistencyError(
            f"equilibrium identities violated: {residuals}"
        )
    return state


# ---------------------------------------------------------------------------
# Assembled report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthReport:
    """Bundle of growth-accounting results with method tags per field."""

    hulten: np.ndarray
    r_hat: np.ndarray | None = None
    growth: AggregateGrowth | None = None
    policy: PolicyGradient | None = None
    component_gradient: np.ndarray | None = None
    method_tags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc: dict = {"hulten": self.hulten.tolist(), "method_tags": dict(self.method_tags)}
        if self.r_hat is not None:
            doc["r_hat"] = self.r_hat.tolist()
        if self.growth is not None:
            doc["aggregate_growth"] = self.growth.to_dict()
        if self.policy is not None:
            doc["policy_gradient"] = self.policy.to_dict()
        if self.component_gradient is not None:
            doc["component_gradient"] = self.component_gradient.tolist()
        return doc


def build_growth_report(
    economy: Economy,
    stats: NetworkStats,
    gamma: np.ndarray | None = None,
    config: TFPConfig | None = None,
    domar_response: np.ndarray | None = None,
) -> GrowthReport:
    """Assemble whatever growth accounting the available inputs allow.

    With a rate vector the price and growth fields fill in; with a TFP config
    the policy gradients fill in (using the damped inverse at config.beta);
    the component gradient needs preference weights on the economy.
    """
    tags = {
        "hulten": "Domar weights from theta'(I - A) = c', verified by finite differences",
    }
    hulten = hulten_sensitivities(stats, economy)
    r_hat = None
    agg = None
    if gamma is not None:
        gamma = np.asarray(gamma, dtype=float)
        r_hat = real_price_changes(stats.H, gamma)
        agg = aggregate_growth(gamma, economy, stats)
        tags["r_hat"] = "undamped inverse applied to the rate vector, wage numeraire"
        tags["g"] = "sales-weighted route, cross-checked against the deflator route"
    policy = None
    if config is not None:
        policy = policy_gradient(economy, config, domar_response)
        tags["policy_gradient"] = (
            "column contraction alpha * H_beta' theta; row contraction reported alongside"
        )
    component = None
    if config is not None and economy.preferences is not None:
        component = squared_inverse_diagonal_gradient(
            stats.H, config.alpha, economy.preferences
        )
        tags["component_gradient"] = (
            "diagonal component form alpha * psi_j * (H H)_jj at full spillover"
        )
    return GrowthReport(
        hulten=hulten,
        r_hat=r_hat,
        growth=agg,
        policy=policy,
        component_gradient=component,
        method_tags=tags,
    )
