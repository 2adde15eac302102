import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from prodnet.core import Economy, synthesize_io_table
from prodnet.experiments import generate_random_economy
from prodnet.network import (
    IllConditionedWarning,
    compute_stats,
    domar_weights,
    eigenvalue_shift_deviation,
    leontief_inverse,
    output_multipliers,
    preference_domar_weights,
    spectral_radius,
    spectral_report,
    weighted_multiplier,
)


def neumann_sum(A: np.ndarray, beta: float, terms: int = 200) -> np.ndarray:
    """Truncated power-series oracle for the damped inverse."""
    n = A.shape[0]
    total = np.eye(n)
    power = np.eye(n)
    for _ in range(terms):
        power = power @ (beta * A)
        total += power
    return total


class TestLeontiefInverse:
    def test_uncoupled_pair_value(self, econ_a):
        assert_allclose(leontief_inverse(econ_a.A, 1.0), [[2.0, 0.0], [0.0, 2.0]],
                        atol=1e-14)

    def test_coupled_pair_value(self, econ_b):
        assert_allclose(leontief_inverse(econ_b.A, 1.0), [[1.5, 0.5], [0.5, 1.5]],
                        atol=1e-14)

    def test_zero_damping_is_identity(self):
        A = generate_random_economy(6, 3).A
        assert_allclose(leontief_inverse(A, 0.0), np.eye(6), atol=1e-15)

    def test_matches_truncated_power_series(self):
        A = generate_random_economy(5, 11).A
        H = leontief_inverse(A, 0.7)
        assert_allclose(H, neumann_sum(A, 0.7), atol=1e-10)

    @pytest.mark.parametrize("beta", [0.3, 0.9, 1.0])
    def test_left_inverse_identity(self, beta):
        A = generate_random_economy(8, 5).A
        H = leontief_inverse(A, beta)
        assert_allclose(H @ (np.eye(8) - beta * A), np.eye(8), atol=1e-10)

    def test_beta_out_of_range(self):
        with pytest.raises(ValueError):
            leontief_inverse(np.zeros((2, 2)), 1.5)

    def test_ill_conditioning_warning(self):
        # Row sums just below one leave (I - A) with a near-null vector.
        eps = 1e-13
        A = np.array([[0.5, 0.5 - eps], [0.5 - eps, 0.5]])
        with pytest.warns(IllConditionedWarning):
            leontief_inverse(A, 1.0)

    def test_entrywise_monotonicity(self):
        # Raising one coefficient (funded from the labor share) cannot shrink
        # any entry of the inverse.
        rng = np.random.default_rng(17)
        for _ in range(10):
            econ = generate_random_economy(6, rng)
            i, j = rng.integers(0, 6, 2)
            bump = min(0.5 * econ.labor_shares[i], 0.05)
            A2 = econ.A.copy()
            A2[i, j] += bump
            H1 = leontief_inverse(econ.A, 1.0)
            H2 = leontief_inverse(A2, 1.0)
            assert np.all(H2 >= H1 - 1e-12)


class TestOutputMultipliers:
    def test_uncoupled_pair(self, econ_a):
        assert_allclose(output_multipliers(leontief_inverse(econ_a.A)), [2.0, 2.0])

    def test_identity_network(self):
        assert_allclose(output_multipliers(np.eye(4)), np.ones(4))

    def test_fixed_point(self):
        econ = generate_random_economy(9, 23)
        H = leontief_inverse(econ.A)
        mult = output_multipliers(H)
        assert_allclose(mult, 1.0 + econ.A @ mult, atol=1e-10)


class TestWeightedMultiplier:
    def test_canonical_value(self, econ_a):
        mult = output_multipliers(leontief_inverse(econ_a.A))
        assert weighted_multiplier(mult, econ_a.consumption_shares) == pytest.approx(2.0)

    def test_empty_network(self, tiny_economy):
        mult = output_multipliers(leontief_inverse(tiny_economy.A))
        assert weighted_multiplier(mult, tiny_economy.consumption_shares) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_equals_output_over_consumption(self, seed):
        econ = generate_random_economy(7, seed)
        table = synthesize_io_table(econ, total_consumption=3.1)
        mult = output_multipliers(leontief_inverse(econ.A))
        value = weighted_multiplier(mult, econ.consumption_shares, io_table=table)
        assert value == pytest.approx(table.total_output / table.total_consumption,
                                      rel=1e-8)


class TestDomarWeights:
    def test_canonical_pair(self, econ_a, econ_b):
        assert_allclose(domar_weights(econ_a), [1.0, 1.0], atol=1e-14)
        assert_allclose(domar_weights(econ_b), [1.0, 1.0], atol=1e-14)

    def test_empty_network_gives_consumption_shares(self):
        econ = Economy(
            A=np.zeros((3, 3)),
            labor_shares=np.ones(3),
            consumption_shares=np.array([0.2, 0.3, 0.5]),
        )
        assert_allclose(domar_weights(econ), [0.2, 0.3, 0.5])

    @pytest.mark.parametrize("seed", range(5))
    def test_solves_adjoint_system(self, seed):
        econ = generate_random_economy(8, seed)
        theta = domar_weights(econ)
        assert_allclose(theta @ (np.eye(8) - econ.A), econ.consumption_shares,
                        atol=1e-10)

    def test_preference_route_agrees_on_asymmetric_networks(self):
        # Same fixed point from market clearing and from monetary flows,
        # even when the coefficient matrix is far from symmetric.
        for seed in range(5):
            econ = generate_random_economy(6, seed, with_preferences=True)
            assert_allclose(preference_domar_weights(econ), domar_weights(econ),
                            atol=1e-12)

    def test_preference_route_needs_preferences(self, tiny_economy):
        with pytest.raises(ValueError):
            preference_domar_weights(tiny_economy)


class TestComputeStats:
    def test_identities_hold_on_random_economies(self):
        for seed in range(5):
            econ = generate_random_economy(10, seed)
            stats = compute_stats(econ, beta=0.8)
            assert stats.neumann_residual <= 1e-10
            assert stats.domar_residual <= 1e-10
            assert stats.H.min() >= -1e-12
            assert np.diag(stats.H).min() >= 1.0
            assert stats.multipliers.min() >= 1.0

    def test_beta_one_reuses_undamped_inverse(self, econ_b):
        stats = compute_stats(econ_b, beta=1.0)
        assert stats.H_beta is stats.H

    def test_serialization_round_trip(self, econ_b):
        doc = compute_stats(econ_b, beta=0.5).to_dict()
        assert doc["multipliers"] == [2.0, 2.0]
        assert doc["residuals"]["neumann_fixed_point"] <= 1e-12


class TestSpectralReport:
    def test_coupled_pair_analytic_values(self, econ_b):
        # Rank-one symmetric block: eigenvalues of A are 0.5 and 0, so the
        # interaction matrix at beta = 1 has largest real part -0.5.
        report = spectral_report(econ_b.A, beta=1.0)
        assert report.rho == pytest.approx(0.5, abs=1e-12)
        assert report.interaction_max_real == pytest.approx(-0.5, abs=1e-12)
        assert report.all_certified

    def test_empty_network(self):
        report = spectral_report(np.zeros((3, 3)), beta=0.8)
        assert report.rho == 0.0
        assert report.interaction_max_real == pytest.approx(-1.0)
        assert report.all_certified

    def test_random_certificates(self):
        for seed in range(3):
            econ = generate_random_economy(10, seed)
            report = spectral_report(econ.A, beta=0.9, n_samples=50, seed=seed)
            assert report.all_certified
            assert report.sampled_max_real < 0.0
            assert report.m_matrix_min_inverse_entry >= -1e-12
            assert report.m_matrix_min_minor > 0.0

    def test_shift_identity_random(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            econ = generate_random_economy(7, rng)
            k1 = float(rng.uniform(-2.0, 2.0))
            k2 = float(rng.uniform(0.1, 3.0))
            assert eigenvalue_shift_deviation(econ.A, k1, k2) <= 1e-10

    def test_interaction_bounded_by_damped_radius(self):
        for seed in range(5):
            econ = generate_random_economy(8, seed)
            beta = 0.9
            report = spectral_report(econ.A, beta=beta)
            assert report.rho < 1.0
            assert report.interaction_max_real <= beta * report.rho - 1.0 + 1e-12

    def test_k2_must_be_positive(self, econ_a):
        with pytest.raises(ValueError):
            spectral_report(econ_a.A, beta=1.0, k2=-1.0)

    def test_spectral_radius_helper(self, econ_b):
        assert spectral_radius(econ_b.A) == pytest.approx(0.5, abs=1e-13)

    def test_no_warning_for_well_conditioned(self, econ_b):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            spectral_report(econ_b.A, beta=1.0)
