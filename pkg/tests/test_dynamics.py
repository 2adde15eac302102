import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from prodnet.core import Economy, TFPConfig
from prodnet.dynamics import (
    GrowthState,
    NonPositiveRateWarning,
    Trajectory,
    integrate_rates,
    integrate_stocks,
    rate_field,
    steady_state,
)
from prodnet.experiments import generate_random_economy, trial_rng


def make_config(n, alpha=0.9, beta=0.4, lam=None, chi=None, endowments=None, stocks0=None):
    ones = np.ones(n)
    return TFPConfig(
        alpha=alpha,
        beta=beta,
        lam=ones if lam is None else np.asarray(lam, dtype=float),
        chi=ones if chi is None else np.asarray(chi, dtype=float),
        endowments=ones if endowments is None else np.asarray(endowments, dtype=float),
        stocks0=ones if stocks0 is None else np.asarray(stocks0, dtype=float),
    )


def single_industry_economy(a11=0.0):
    return Economy(
        A=np.array([[a11]]),
        labor_shares=np.array([1.0 - a11]),
        consumption_shares=np.array([1.0]),
    )


class TestRateField:
    def test_steady_state_is_fixed_point(self):
        econ = generate_random_economy(8, 1)
        cfg = make_config(8, alpha=0.7, beta=0.6)
        gamma0 = steady_state(cfg, econ)
        assert np.abs(rate_field(gamma0, cfg, econ)).max() <= 1e-12

    def test_componentwise_formula_single_industry(self):
        # gamma * (alpha*lambda + beta*a*gamma - gamma)
        # = 1 * (1 + 0.5*0.5*1 - 1) = 0.25.
        econ = single_industry_economy(a11=0.5)
        cfg = make_config(1, alpha=1.0, beta=0.5, lam=[1.0])
        assert rate_field(np.array([1.0]), cfg, econ)[0] == pytest.approx(0.25)

    def test_origin_is_equilibrium(self):
        econ = generate_random_economy(5, 2)
        cfg = make_config(5)
        assert_allclose(rate_field(np.zeros(5), cfg, econ), np.zeros(5))


class TestSteadyState:
    def test_no_spillovers_reduces_to_scaled_rates(self):
        econ = generate_random_economy(6, 3)
        lam = trial_rng(3, 1).uniform(0.5, 1.5, 6)
        cfg = make_config(6, alpha=0.8, beta=0.0, lam=lam)
        assert_allclose(steady_state(cfg, econ), 0.8 * lam, atol=1e-14)

    def test_coupled_pair_hand_value(self, econ_b):
        # Rows of the coupled block sum to 0.5, and the unit vector is an
        # eigenvector: (I - 0.9 A) gamma = lam gives gamma = 1/0.55 = 20/11.
        cfg = make_config(2, alpha=1.0, beta=0.9, lam=[1.0, 1.0])
        assert_allclose(steady_state(cfg, econ_b), np.full(2, 20.0 / 11.0), atol=1e-12)

    def test_monotone_in_endowment_rates(self):
        econ = generate_random_economy(7, 4)
        lam = trial_rng(4, 1).uniform(0.5, 1.5, 7)
        cfg = make_config(7, beta=0.7, lam=lam)
        base = steady_state(cfg, econ)
        for j in range(7):
            bumped = lam.copy()
            bumped[j] += 0.1
            higher = steady_state(make_config(7, beta=0.7, lam=bumped), econ)
            assert np.all(higher >= base - 1e-12)

    def test_warns_on_nonpositive_lambda(self):
        econ = generate_random_economy(3, 5)
        cfg = make_config(3, lam=[1.0, -0.5, 1.0])
        with pytest.warns(NonPositiveRateWarning):
            steady_state(cfg, econ)

    def test_positive_lambda_gives_positive_rates_silently(self):
        econ = generate_random_economy(6, 6)
        cfg = make_config(6, lam=trial_rng(6, 0).uniform(0.1, 2.0, 6))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            gamma0 = steady_state(cfg, econ)
        assert np.all(gamma0 > 0)


class TestIntegrateRates:
    def test_started_at_fixed_point_stays_there(self):
        econ = generate_random_economy(6, 7)
        cfg = make_config(6, alpha=0.8, beta=0.5)
        gamma0 = steady_state(cfg, econ)
        traj = integrate_rates(gamma0, cfg, econ, 10.0, max_step=0.5)
        assert np.abs(traj.rates - gamma0[None, :]).max() <= 1e-9

    def test_coupled_pair_converges_from_spread_start(self, econ_b):
        cfg = make_config(2, alpha=1.0, beta=0.9, lam=[1.0, 1.0])
        traj = integrate_rates(np.array([0.1, 3.0]), cfg, econ_b, 50.0, max_step=0.25)
        assert traj.convergence.final_gap <= 1e-8
        assert traj.convergence.converged

    def test_many_starts_share_one_limit(self):
        econ = generate_random_economy(10, 8)
        lam = trial_rng(8, 1).uniform(0.5, 1.5, 10)
        cfg = make_config(10, alpha=0.9, beta=0.5, lam=lam)
        target = steady_state(cfg, econ)
        for k in range(20):
            start = trial_rng(8, 100 + k).uniform(0.05, 4.0, 10)
            traj = integrate_rates(start, cfg, econ, 80.0, max_step=0.5)
            assert np.abs(traj.rates[-1] - target).max() <= 1e-8

    def test_positive_orthant_preserved(self):
        econ = generate_random_economy(8, 9)
        cfg = make_config(8, alpha=0.7, beta=0.6)
        start = trial_rng(9, 0).uniform(0.01, 5.0, 8)
        traj = integrate_rates(start, cfg, econ, 40.0, max_step=0.5)
        assert np.all(traj.rates > 0)
        assert np.all(traj.stocks > 0)

    def test_matches_independent_solver(self, econ_b):
        cfg = make_config(2, alpha=1.0, beta=0.9, lam=[1.0, 1.0])
        start = np.array([0.4, 2.2])

        def f(t, g):
            return g * (cfg.alpha * cfg.lam + cfg.beta * (econ_b.A @ g) - g)

        ref = solve_ivp(f, (0.0, 8.0), start, method="DOP853", rtol=1e-12, atol=1e-14)
        traj = integrate_rates(start, cfg, econ_b, 8.0, rtol=1e-11, atol=1e-13)
        assert_allclose(traj.rates[-1], ref.y[:, -1], rtol=1e-8)

    def test_rejects_nonpositive_start(self):
        econ = generate_random_economy(3, 10)
        cfg = make_config(3)
        with pytest.raises(ValueError, match="positive"):
            integrate_rates(np.array([1.0, 0.0, 1.0]), cfg, econ, 5.0)

    def test_rejects_bad_horizon(self):
        econ = generate_random_economy(2, 11)
        cfg = make_config(2)
        with pytest.raises(ValueError):
            integrate_rates(np.ones(2), cfg, econ, 0.0)

    def test_integrator_metadata_populated(self):
        econ = generate_random_economy(4, 12)
        cfg = make_config(4)
        traj = integrate_rates(np.full(4, 0.5), cfg, econ, 20.0, max_step=0.5)
        assert traj.stats.steps_accepted == len(traj.times) - 1
        assert traj.stats.rhs_evaluations > traj.stats.steps_accepted
        assert traj.stats.final_error_estimate <= 1.0


class TestIntegrateStocks:
    def test_linear_growth_closed_form(self):
        # Decoupled single industry with flat endowments: stock grows
        # linearly, Z(t) = 1 + t.
        econ = single_industry_economy(0.0)
        cfg = make_config(1, alpha=1.0, beta=0.5, lam=[0.0])
        with pytest.warns(NonPositiveRateWarning):
            traj = integrate_stocks(cfg, econ, 5.0, rtol=1e-11, atol=1e-13)
        assert_allclose(traj.stocks[:, 0], 1.0 + traj.times, rtol=1e-9)

    def test_implied_rates_reach_steady_state(self):
        for seed in (0, 1, 2):
            econ = generate_random_economy(6, seed)
            lam = trial_rng(seed, 1).uniform(0.8, 1.6, 6)
            cfg = make_config(6, alpha=0.9, beta=0.4, lam=lam)
            traj = integrate_stocks(cfg, econ, 60.0, max_step=0.5)
            target = steady_state(cfg, econ)
            assert np.abs(traj.rates[-1] - target).max() <= 1e-6

    def test_innate_factor_rescaling_leaves_rates(self):
        econ = generate_random_economy(5, 13)
        lam = trial_rng(13, 1).uniform(0.8, 1.6, 5)
        base = make_config(5, alpha=0.9, beta=0.4, lam=lam)
        scaled = make_config(5, alpha=0.9, beta=0.4, lam=lam, chi=np.full(5, 10.0))
        a = integrate_stocks(base, econ, 70.0, max_step=0.5)
        b = integrate_stocks(scaled, econ, 70.0, max_step=0.5)
        assert np.abs(a.rates[-1] - b.rates[-1]).max() <= 1e-10
        # Levels do move: the factor scales stocks, not their growth.
        assert b.stocks[-1].max() / a.stocks[-1].max() > 2.0

    def test_rate_route_and_stock_route_agree(self):
        # The implied-rate path solves the rate system started at the
        # stock-implied initial rates; endpoints must match.
        econ = generate_random_economy(6, 14)
        lam = trial_rng(14, 1).uniform(0.8, 1.6, 6)
        cfg = make_config(6, alpha=0.8, beta=0.5, lam=lam,
                          chi=trial_rng(14, 2).uniform(0.5, 2.0, 6),
                          endowments=trial_rng(14, 3).uniform(0.5, 2.0, 6),
                          stocks0=trial_rng(14, 4).uniform(0.5, 2.0, 6))
        stocks_traj = integrate_stocks(cfg, econ, 30.0, rtol=1e-11, atol=1e-13,
                                       max_step=0.25)
        rates_traj = integrate_rates(stocks_traj.rates[0], cfg, econ, 30.0,
                                     rtol=1e-11, atol=1e-13, max_step=0.25)
        assert_allclose(stocks_traj.rates[-1], rates_traj.rates[-1], rtol=1e-8)


class TestTrajectory:
    def test_export_schema(self):
        econ = generate_random_economy(3, 15)
        cfg = make_config(3)
        traj = integrate_rates(np.full(3, 0.5), cfg, econ, 5.0, max_step=0.5)
        assert traj.header() == ["t", "Z_1", "Z_2", "Z_3",
                                 "gamma_1", "gamma_2", "gamma_3"]
        rows = list(traj.rows())
        assert len(rows) == len(traj.times)
        assert len(rows[0]) == 1 + 2 * 3
        assert rows[0][0] == 0.0

    def test_state_accessors(self):
        econ = generate_random_economy(2, 16)
        cfg = make_config(2)
        traj = integrate_rates(np.full(2, 0.5), cfg, econ, 3.0, max_step=0.5)
        first = traj.state(0)
        assert isinstance(first, GrowthState)
        assert first.t == 0.0
        assert traj.final.t == 3.0

    def test_invariants_enforced(self):
        with pytest.raises(ValueError, match="increasing"):
            Trajectory(
                times=np.array([0.0, 0.0]),
                stocks=np.ones((2, 1)),
                rates=np.ones((2, 1)),
                stats=None,
            )
        with pytest.raises(ValueError, match="positive"):
            GrowthState(t=0.0, Z=np.array([0.0]), gamma=np.array([1.0]))
        with pytest.raises(ValueError, match="finite"):
            GrowthState(t=0.0, Z=np.array([1.0]), gamma=np.array([np.inf]))
