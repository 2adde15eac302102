import numpy as np
import pytest
from numpy.testing import assert_allclose

from prodnet.core import Economy, TFPConfig, synthesize_io_table
from prodnet.dynamics import steady_state
from prodnet.experiments import generate_random_economy, trial_rng
from prodnet.growth import (
    aggregate_growth,
    build_growth_report,
    cobb_douglas_equilibrium,
    hulten_sensitivities,
    policy_gradient,
    policy_gradient_matrix,
    real_price_changes,
    squared_inverse_diagonal_gradient,
    tfp_residual,
)
from prodnet.network import compute_stats, leontief_inverse


def make_tfp(n, alpha, beta, lam):
    ones = np.ones(n)
    return TFPConfig(alpha=alpha, beta=beta, lam=np.asarray(lam, dtype=float),
                     chi=ones, endowments=ones, stocks0=ones)


class TestRealPriceChanges:
    def test_zero_rates_zero_changes(self, econ_a):
        H = leontief_inverse(econ_a.A)
        assert_allclose(real_price_changes(H, np.zeros(2)), np.zeros(2))

    def test_uncoupled_pair_value(self, econ_a):
        H = leontief_inverse(econ_a.A)
        assert_allclose(real_price_changes(H, np.array([1.0, 0.0])), [-2.0, 0.0])

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            real_price_changes(np.eye(2), np.ones(3))

    def test_equilibrium_finite_difference(self):
        # Price responses from the actual equilibrium match the linear map.
        econ = generate_random_economy(5, 21, with_preferences=True)
        H = leontief_inverse(econ.A)
        Z = trial_rng(21, 5).uniform(0.5, 2.0, 5)
        h = 1e-6
        for j in range(5):
            up, down = Z.copy(), Z.copy()
            up[j] *= np.exp(h)
            down[j] *= np.exp(-h)
            dlnp = (np.log(cobb_douglas_equilibrium(econ, up).prices)
                    - np.log(cobb_douglas_equilibrium(econ, down).prices)) / (2 * h)
            assert_allclose(dlnp, -H[:, j], rtol=1e-6, atol=1e-9)


class TestAggregateGrowth:
    def test_uniform_percent_growth(self, econ_a):
        stats = compute_stats(econ_a)
        result = aggregate_growth(np.array([0.01, 0.01]), econ_a, stats)
        assert result.g == pytest.approx(0.02, abs=1e-15)
        assert result.gamma_tilde == pytest.approx(0.01, abs=1e-15)
        assert result.weighted_multiplier == pytest.approx(2.0)

    def test_zero_rates(self, econ_b):
        stats = compute_stats(econ_b)
        assert aggregate_growth(np.zeros(2), econ_b, stats).g == 0.0

    @pytest.mark.parametrize("seed", range(8))
    def test_two_routes_agree_exactly(self, seed):
        econ = generate_random_economy(9, seed)
        stats = compute_stats(econ)
        gamma = trial_rng(seed, 7).normal(0.0, 1.0, 9)
        result = aggregate_growth(gamma, econ, stats)
        assert abs(result.g - result.g_deflator) <= 1e-12

    def test_table_weights_consistent(self):
        econ = generate_random_economy(6, 33)
        stats = compute_stats(econ)
        table = synthesize_io_table(econ, total_consumption=2.5)
        gamma = trial_rng(33, 1).uniform(-0.5, 1.5, 6)
        result = aggregate_growth(gamma, econ, stats, io_table=table)
        assert result.gamma_tilde_table == pytest.approx(result.gamma_tilde, rel=1e-8)


class TestHultenSensitivities:
    def test_canonical_pair(self, econ_a, econ_b):
        for econ in (econ_a, econ_b):
            stats = compute_stats(econ)
            assert_allclose(hulten_sensitivities(stats, econ), [1.0, 1.0], atol=1e-12)

    def test_empty_network_gives_consumption_shares(self):
        econ = Economy(A=np.zeros((3, 3)), labor_shares=np.ones(3),
                       consumption_shares=np.array([0.1, 0.2, 0.7]))
        stats = compute_stats(econ)
        assert_allclose(hulten_sensitivities(stats, econ), [0.1, 0.2, 0.7], atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_finite_difference_verification_runs(self, seed):
        # The check is built in; a mismatch would raise.
        econ = generate_random_economy(8, seed)
        stats = compute_stats(econ)
        theta = hulten_sensitivities(stats, econ)
        assert_allclose(theta, stats.domar)

    def test_argmax_is_largest_domar_weight(self):
        econ = generate_random_economy(10, 77)
        stats = compute_stats(econ)
        theta = hulten_sensitivities(stats, econ)
        gamma = np.full(10, 0.3)
        h = 1e-6
        gains = np.empty(10)
        for i in range(10):
            up, down = gamma.copy(), gamma.copy()
            up[i] += h
            down[i] -= h
            gains[i] = (aggregate_growth(up, econ, stats).g
                        - aggregate_growth(down, econ, stats).g) / (2 * h)
        assert int(np.argmax(gains)) == int(np.argmax(theta))


class TestTFPResidual:
    def test_balanced_growth_yields_zero(self):
        econ = generate_random_economy(6, 41)
        g0 = 0.17
        residual = tfp_residual(
            np.full(6, g0), np.full((6, 6), g0), np.full(6, g0), econ
        )
        assert_allclose(residual, np.zeros(6), atol=1e-14)

    def test_pure_productivity_growth(self):
        econ = generate_random_economy(4, 42)
        residual = tfp_residual(np.ones(4), np.zeros((4, 4)), np.zeros(4), econ)
        assert_allclose(residual, np.ones(4))

    def test_recovers_rates_from_equilibrium_path(self):
        # Along Z(t) = Z0 * exp(gamma t) the equilibrium quantities move
        # log-linearly; their growth rates must hand back gamma exactly.
        econ = generate_random_economy(6, 43, with_preferences=True)
        gamma = trial_rng(43, 1).uniform(0.05, 0.5, 6)
        Z0 = trial_rng(43, 2).uniform(0.5, 2.0, 6)
        dt = 0.25
        eq0 = cobb_douglas_equilibrium(econ, Z0)
        eq1 = cobb_douglas_equilibrium(econ, Z0 * np.exp(gamma * dt))
        output_growth = (np.log(eq1.outputs) - np.log(eq0.outputs)) / dt
        input_growth = (np.log(eq1.flows) - np.log(eq0.flows)) / dt
        labor_growth = (np.log(eq1.labor) - np.log(eq0.labor)) / dt
        recovered = tfp_residual(output_growth, input_growth, labor_growth, econ)
        assert_allclose(recovered, gamma, atol=1e-8)

    def test_shape_check(self):
        econ = generate_random_economy(3, 44)
        with pytest.raises(ValueError):
            tfp_residual(np.ones(3), np.ones((2, 2)), np.ones(3), econ)


class TestPolicyGradient:
    def test_collapses_to_domar_weights_without_spillovers(self):
        econ = generate_random_economy(7, 51)
        stats = compute_stats(econ)
        grad = policy_gradient_matrix(econ, alpha=1.0, beta=0.0)
        assert_allclose(grad.total, stats.domar, atol=1e-12)
        assert_allclose(grad.row_contraction_total, stats.domar, atol=1e-12)

    def test_uncoupled_pair_full_spillover(self, econ_a):
        grad = policy_gradient_matrix(econ_a, alpha=1.0, beta=1.0)
        assert_allclose(grad.total, [2.0, 2.0], atol=1e-12)

    def test_terms_reported_separately(self):
        econ = generate_random_economy(5, 52)
        rng = trial_rng(52, 1)
        response = rng.normal(0.0, 0.1, (5, 5))
        lam = rng.uniform(0.5, 1.5, 5)
        cfg = make_tfp(5, alpha=0.6, beta=0.5, lam=lam)
        gamma0 = steady_state(cfg, econ)
        grad = policy_gradient(econ, cfg, domar_response=response)
        assert_allclose(grad.reallocation_term, response.T @ gamma0, atol=1e-14)
        assert_allclose(grad.total, grad.spillover_term + grad.reallocation_term)

    def test_response_requires_matching_shape(self):
        econ = generate_random_economy(4, 53)
        cfg = make_tfp(4, alpha=0.5, beta=0.5, lam=np.ones(4))
        with pytest.raises(ValueError):
            policy_gradient(econ, cfg, domar_response=np.zeros((3, 3)))

    @pytest.mark.parametrize("seed", range(4))
    def test_finite_differences_through_steady_state(self, seed):
        # Independent route: differentiate g(gamma0(lambda)) numerically.
        n = 6
        econ = generate_random_economy(n, seed)
        stats = compute_stats(econ)
        lam = trial_rng(seed, 9).uniform(0.5, 1.5, n)
        alpha, beta = 0.7, 0.6
        grad = policy_gradient_matrix(econ, alpha, beta).total

        def g_of(lam_vec):
            cfg = make_tfp(n, alpha, beta, lam_vec)
            return aggregate_growth(steady_state(cfg, econ), econ, stats).g

        h = 1e-6
        fd = np.empty(n)
        for j in range(n):
            up, down = lam.copy(), lam.copy()
            up[j] += h
            down[j] -= h
            fd[j] = (g_of(up) - g_of(down)) / (2 * h)
        assert_allclose(fd, grad, atol=1e-6)

    def test_contractions_differ_on_asymmetric_networks(self):
        econ = generate_random_economy(6, 54)
        grad = policy_gradient_matrix(econ, alpha=1.0, beta=0.9)
        assert np.abs(grad.total - grad.row_contraction_total).max() > 1e-6


class TestComponentGradient:
    def test_canonical_pair_values(self, econ_a, econ_b):
        H_a = leontief_inverse(econ_a.A)
        H_b = leontief_inverse(econ_b.A)
        assert_allclose(
            squared_inverse_diagonal_gradient(H_a, 1.0, econ_a.preferences),
            [2.0, 2.0], atol=1e-14)
        assert_allclose(
            squared_inverse_diagonal_gradient(H_b, 1.0, econ_b.preferences),
            [1.25, 1.25], atol=1e-14)

    def test_identity_network_returns_preferences(self):
        psi = np.array([0.3, 0.3, 0.4])
        assert_allclose(squared_inverse_diagonal_gradient(np.eye(3), 1.0, psi), psi)


class TestCobbDouglasEquilibrium:
    def test_unit_stocks_give_unit_prices(self):
        econ = generate_random_economy(6, 61, with_preferences=True)
        eq = cobb_douglas_equilibrium(econ, np.ones(6))
        assert_allclose(eq.prices, np.ones(6), atol=1e-14)
        assert_allclose(eq.consumption, econ.preferences, atol=1e-14)
        theta = compute_stats(econ).domar
        assert_allclose(eq.revenues, theta, atol=1e-12)

    def test_coupled_pair_flows(self, econ_b):
        eq = cobb_douglas_equilibrium(econ_b, np.ones(2))
        assert_allclose(eq.prices, [1.0, 1.0])
        assert_allclose(eq.revenues, [1.0, 1.0], atol=1e-14)
        assert_allclose(eq.outputs, [1.0, 1.0], atol=1e-14)
        assert_allclose(eq.consumption, [0.5, 0.5])
        assert_allclose(eq.flows, np.full((2, 2), 0.25), atol=1e-14)
        assert_allclose(eq.labor, [0.5, 0.5], atol=1e-14)

    @pytest.mark.parametrize("seed", range(6))
    def test_identities_hold_at_random_stocks(self, seed):
        econ = generate_random_economy(7, seed, with_preferences=True)
        Z = trial_rng(seed, 3).uniform(0.2, 5.0, 7)
        eq = cobb_douglas_equilibrium(econ, Z)
        residuals = eq.residuals()
        assert max(residuals.values()) <= 1e-9

    def test_requires_preferences(self):
        econ = generate_random_economy(3, 62)
        with pytest.raises(ValueError, match="preference"):
            cobb_douglas_equilibrium(econ, np.ones(3))

    def test_requires_positive_stocks(self):
        econ = generate_random_economy(3, 63, with_preferences=True)
        with pytest.raises(ValueError, match="positive"):
            cobb_douglas_equilibrium(econ, np.array([1.0, -1.0, 1.0]))


class TestGrowthReport:
    def test_minimal_report(self, econ_b):
        stats = compute_stats(econ_b)
        report = build_growth_report(econ_b, stats)
        assert_allclose(report.hulten, [1.0, 1.0])
        assert report.r_hat is None
        assert report.policy is None
        doc = report.to_dict()
        assert "hulten" in doc and "method_tags" in doc

    def test_full_report(self, econ_b):
        stats = compute_stats(econ_b, beta=0.9)
        cfg = make_tfp(2, alpha=1.0, beta=0.9, lam=np.ones(2))
        gamma0 = steady_state(cfg, econ_b)
        report = build_growth_report(econ_b, stats, gamma=gamma0, config=cfg)
        assert report.growth is not None
        assert report.policy is not None
        assert report.component_gradient is not None
        assert_allclose(report.r_hat, -stats.H @ gamma0)
        doc = report.to_dict()
        assert set(doc["method_tags"]) >= {"hulten", "g", "policy_gradient"}
