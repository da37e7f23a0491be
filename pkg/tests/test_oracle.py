"""The discretized brute-force estimator and its agreement with the chain."""

import math

import numpy as np
import pytest

from ruinlab import (ClaimDistribution, ConfigError, ModelParams,
                     OracleConfig, ParameterError, PremiumSchedule, SimConfig,
                     compare_with_chain, estimate_ruin_oracle, simulate_path)
from ruinlab.oracle import _estimate_oracle_stats

from conftest import make_params, rng_from


def oracle_cfg(**over):
    base = dict(params=make_params(1.0),
                claims=ClaimDistribution.exponential(1.0),
                premium=PremiumSchedule.zero(),
                n_paths=10_000, t_max=30.0, dt=0.05, seed=0)
    base.update(over)
    return OracleConfig(**base)


class TestConfig:
    def test_default_dt(self):
        cfg = oracle_cfg(dt=None, params=make_params(1.0, alpha=2.0))
        assert cfg.dt_value == pytest.approx(5e-4)

    def test_validation(self):
        with pytest.raises(ParameterError):
            oracle_cfg(n_paths=0)
        with pytest.raises(ParameterError):
            oracle_cfg(t_max=0.0)
        with pytest.raises(ParameterError):
            oracle_cfg(dt=31.0)
        with pytest.raises(ParameterError):
            oracle_cfg(seed=-3)


class TestScalarPath:
    def test_zero_capital_ruins_at_first_claim(self):
        cfg = oracle_cfg()
        ruined, t_ruin = simulate_path(0.0, cfg, rng_from(61))
        assert ruined
        assert 0.0 < t_ruin <= cfg.t_max

    def test_censored_path(self):
        ruined, t_ruin = simulate_path(1e12, oracle_cfg(n_paths=1), rng_from(63))
        assert not ruined and t_ruin is None

    def test_rejects_negative_capital(self):
        with pytest.raises(ParameterError):
            simulate_path(-1.0, oracle_cfg(), rng_from(65))


class TestEstimator:
    def test_unreachable_capital_never_ruins(self):
        # claims of mean 0.1 cannot stack up to 10 inside one time unit
        cfg = oracle_cfg(claims=ClaimDistribution.exponential(0.1),
                         t_max=1.0, n_paths=5000)
        est = estimate_ruin_oracle(10.0, cfg)
        assert est.psi_hat == 0.0
        assert est.n_ruined == 0

    def test_repeatable(self):
        cfg = oracle_cfg(n_paths=8000, t_max=10.0)
        assert estimate_ruin_oracle(5.0, cfg) == estimate_ruin_oracle(5.0, cfg)

    def test_no_ruin_between_claims(self):
        # the one-step map sends nonnegative capital to nonnegative capital,
        # so every observed ruin must coincide with a claim
        cfg = oracle_cfg(premium=PremiumSchedule.constant(1.0),
                         n_paths=20_000, t_max=20.0, dt=0.01)
        est, interjump = _estimate_oracle_stats(5.0, cfg)
        assert interjump == 0
        assert est.n_ruined > 0

    def test_compound_poisson_closed_form(self):
        # sigma = 0 and a = 0 turn every update exact, reducing the process
        # to the classical premium-minus-claims model whose ruin probability
        # with exponential claims is known in closed form
        p = ModelParams(a=0.0, sigma=0.0, alpha=1.0)
        cfg = OracleConfig(params=p, claims=ClaimDistribution.exponential(1.0),
                           premium=PremiumSchedule.constant(2.0),
                           n_paths=50_000, t_max=60.0, dt=0.5, seed=0)
        est = estimate_ruin_oracle(1.0, cfg)
        rho = 1.0                       # premium rate 2 = (1 + rho) * mean load
        psi_exact = math.exp(-rho * 1.0 / (1.0 + rho)) / (1.0 + rho)
        se = math.sqrt(psi_exact * (1 - psi_exact) / cfg.n_paths)
        # horizon censoring can only bias downward, and only slightly
        assert psi_exact - 4 * se - 0.01 <= est.psi_hat <= psi_exact + 4 * se

    def test_step_refinement_consistent(self):
        cfg1 = oracle_cfg(premium=PremiumSchedule.constant(1.0),
                          n_paths=20_000, t_max=20.0, dt=0.02)
        cfg2 = oracle_cfg(premium=PremiumSchedule.constant(1.0),
                          n_paths=20_000, t_max=20.0, dt=0.01, seed=1)
        a = estimate_ruin_oracle(5.0, cfg1)
        b = estimate_ruin_oracle(5.0, cfg2)
        se = math.sqrt(a.psi_hat * (1 - a.psi_hat) / a.n_paths
                       + b.psi_hat * (1 - b.psi_hat) / b.n_paths)
        assert abs(a.psi_hat - b.psi_hat) <= 4 * se + 0.01


class TestComparison:
    def chain_cfg(self, **over):
        base = dict(params=make_params(1.0),
                    claims=ClaimDistribution.exponential(1.0),
                    premium=PremiumSchedule.zero(),
                    n_paths=20_000, max_jumps=200, seed=3, bridge_points=16)
        base.update(over)
        return SimConfig(**base)

    def test_matched_models_agree(self):
        report = compare_with_chain(5.0, oracle_cfg(n_paths=20_000),
                                    self.chain_cfg())
        assert abs(report.z) < 4.0, report
        assert 0.0 < report.psi_chain < 1.0
        assert 0.0 < report.psi_oracle < 1.0

    def test_mismatched_models_rejected(self):
        bad = self.chain_cfg(params=make_params(2.0))
        with pytest.raises(ConfigError):
            compare_with_chain(5.0, oracle_cfg(), bad)

    def test_insufficient_jump_budget_rejected(self):
        shallow = self.chain_cfg(max_jumps=30)
        with pytest.raises(ConfigError):
            compare_with_chain(5.0, oracle_cfg(), shallow)

    def test_perturbed_volatility_detected(self):
        # negative control: inflate the oracle's volatility and the z
        # statistic must blow up
        wrong = make_params(1.0)
        wrong = ModelParams(a=wrong.a, sigma=1.6 * wrong.sigma,
                            alpha=wrong.alpha)
        report = compare_with_chain(
            5.0, oracle_cfg(params=wrong, n_paths=20_000), self.chain_cfg(),
            require_matched=False)
        assert abs(report.z) > 5.0, report
