"""Closed-form constants, the exponent solver and the tail fit."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruinlab import (BracketError, ClaimDistribution, InsufficientDataError,
                     MomentDivergenceError, ParameterError, RuinEstimate,
                     bounds_report, effective_exponent, fit_tail, j_factor,
                     moment_M, mu, solve_exponent, upper_constant, varrho)

from conftest import make_params, rng_from

# frozen independent evaluations (symbolic/quadrature, recomputed by hand):
#   beta=3, sigma^2=0.2, alpha=1: varrho=0.2,
#   j2 = 3*2*(1+(1.2^0.5-1)^-2) = 664.63353450310069,
#   J = (2/(0.2*9))*j2
J_BETA3 = 738.4817050034452
MOMENT_BETA1_Q05 = 0.9876543209876544     # 2 / 2.025
MOMENT_BETA2_Q1 = 0.9523809523809523      # 2 / 2.1


class TestVarrho:
    def test_beta_two(self):
        assert varrho(make_params(2.0)) == pytest.approx(0.05, rel=1e-12)

    def test_beta_three(self):
        assert varrho(make_params(3.0, sigma_sq=0.2, alpha=2.0)) \
            == pytest.approx(0.1, rel=1e-12)

    def test_beta_one_rejected(self):
        with pytest.raises(ParameterError):
            varrho(make_params(1.0))


class TestJFactor:
    def test_first_branch(self):
        assert j_factor(make_params(1.0)) == pytest.approx(20.0, rel=1e-12)

    def test_second_branch(self):
        # varrho = 0.05, j1 = 2 * (1 + 20) = 42, J = (2 / 0.4) * 42 = 210
        assert j_factor(make_params(2.0)) == pytest.approx(210.0, rel=1e-12)

    def test_third_branch(self):
        assert j_factor(make_params(3.0, sigma_sq=0.2)) \
            == pytest.approx(J_BETA3, rel=1e-12)

    def test_branch_boundaries_take_lower_branch(self):
        # at beta exactly 1 and 2 the lower-branch formula applies
        p1 = make_params(1.0)
        assert j_factor(p1) == pytest.approx(
            2 * p1.alpha / (p1.sigma_sq * p1.beta ** 2), rel=1e-12)
        p2 = make_params(2.0)
        r = varrho(p2)
        j1 = p2.beta * (1 + 1 / r)
        assert j_factor(p2) == pytest.approx(
            2 * p2.alpha / (p2.sigma_sq * p2.beta ** 2) * j1, rel=1e-12)

    def test_certain_ruin_rejected(self):
        with pytest.raises(ParameterError):
            j_factor(make_params(-0.5))


class TestUpperConstant:
    def test_beta1_exponential(self):
        assert upper_constant(make_params(1.0), ClaimDistribution.exponential(1.0)) \
            == pytest.approx(20.0, rel=1e-12)

    def test_beta1_constant_half(self):
        assert upper_constant(make_params(1.0), ClaimDistribution.constant(0.5)) \
            == pytest.approx(10.0, rel=1e-12)

    def test_divergent_claim_moment(self):
        with pytest.raises(MomentDivergenceError):
            upper_constant(make_params(2.0), ClaimDistribution.pareto(1.5, 1.0))


class TestMomentM:
    def test_equals_one_at_zero_and_beta(self):
        for beta in [0.5, 1.0, 2.0, 3.3]:
            p = make_params(beta)
            assert moment_M(p, 0.0) == 1.0
            assert moment_M(p, beta) == pytest.approx(1.0, rel=1e-12)

    def test_spot_values(self):
        assert moment_M(make_params(1.0), 0.5) \
            == pytest.approx(MOMENT_BETA1_Q05, rel=1e-14)
        assert moment_M(make_params(2.0), 1.0) \
            == pytest.approx(MOMENT_BETA2_Q1, rel=1e-14)

    @settings(max_examples=50)
    @given(beta=st.floats(0.2, 4.0), frac=st.floats(0.02, 0.98))
    def test_strictly_below_one_inside(self, beta, frac):
        p = make_params(beta)
        assert moment_M(p, frac * beta) < 1.0

    def test_divergence(self):
        p = make_params(1.0)
        # denominator 2 + (1 - q) q * 0.1 <= 0 needs large q
        with pytest.raises(MomentDivergenceError):
            moment_M(p, 15.0)

    def test_monte_carlo_agreement(self):
        # frozen-oracle cross-check: 10^6 draws of the block discount factor
        p = make_params(1.5)
        rng = rng_from(31)
        theta = rng.exponential(1.0 / p.alpha, 1_000_000)
        w = rng.standard_normal(1_000_000) * np.sqrt(theta)
        m = np.exp(-(p.sigma * w + p.kappa * theta))
        for q in (p.beta / 2, p.beta):
            vals = m ** q
            se = vals.std(ddof=1) / math.sqrt(vals.size)
            assert abs(vals.mean() - moment_M(p, q)) <= 4 * se


class TestMu:
    def test_values(self):
        assert mu(make_params(1.0)) == pytest.approx(0.05, rel=1e-12)
        assert mu(make_params(2.0, sigma_sq=0.2, alpha=2.0)) \
            == pytest.approx(0.1, rel=1e-12)

    def test_rejects_certain_ruin(self):
        with pytest.raises(ParameterError):
            mu(make_params(0.0))


class TestEffectiveExponent:
    def test_gamma_zero_is_beta(self):
        p = make_params(1.0)
        assert effective_exponent(p, 0.0) == pytest.approx(1.0)

    def test_shift(self):
        assert effective_exponent(make_params(1.0), -0.05) == pytest.approx(2.0)

    def test_rejects_positive_gamma(self):
        with pytest.raises(ParameterError):
            effective_exponent(make_params(1.0), 0.1)


class TestSolveExponent:
    def _closed_form(self, params):
        def f(q):
            try:
                return moment_M(params, q)
            except MomentDivergenceError:
                return math.inf
        return f

    def test_recovers_beta_one(self):
        p = make_params(1.0)
        root = solve_exponent(self._closed_form(p), (0.1, 5.0))
        assert abs(root - 1.0) <= 1e-10

    def test_recovers_beta_27(self):
        p = make_params(2.7)
        root = solve_exponent(self._closed_form(p), (0.1, 5.0))
        assert abs(root - 2.7) <= 1e-10

    def test_no_sign_change(self):
        p = make_params(2.0)
        with pytest.raises(BracketError):
            solve_exponent(self._closed_form(p), (0.1, 0.5))

    def test_random_parameter_sweep(self):
        rng = rng_from(37)
        for _ in range(50):
            beta = float(rng.uniform(0.2, 4.0))
            sigma_sq = float(rng.uniform(0.02, 1.0))
            alpha = float(rng.uniform(0.2, 4.0))
            p = make_params(beta, sigma_sq=sigma_sq, alpha=alpha)
            root = solve_exponent(self._closed_form(p), (beta / 50, beta * 12))
            assert abs(root - beta) <= 1e-9 * max(1.0, beta)

    def test_empirical_moment_curve(self):
        # noisy moment function from 10^6 draws still brackets the root
        p = make_params(1.0)
        rng = rng_from(41)
        theta = rng.exponential(1.0, 1_000_000)
        w = rng.standard_normal(1_000_000) * np.sqrt(theta)
        m = np.exp(-(p.sigma * w + p.kappa * theta))

        def emp(q):
            return float(np.mean(m ** q))

        root = solve_exponent(emp, (0.2, 3.0), tol=1e-6)
        assert abs(root - 1.0) <= 0.02


def _estimate(u, psi, n_paths=1_000_000, n_ruined=None):
    if n_ruined is None:
        n_ruined = int(round(psi * n_paths))
    half = 1.959963984540054 * math.sqrt(max(psi * (1 - psi), 1e-12) / n_paths)
    return RuinEstimate(u=u, psi_hat=psi, ci_lo=max(psi - half, 0.0),
                        ci_hi=min(psi + half, 1.0), n_paths=n_paths,
                        n_ruined=n_ruined, n_censored=0)


class TestFitTail:
    def test_exact_power_law(self):
        curve = [_estimate(u, 5.0 * u ** -2.0) for u in [10, 20, 40, 80, 160]]
        fit = fit_tail(curve)
        assert fit.slope == pytest.approx(-2.0, abs=1e-9)
        assert fit.stderr <= 1e-9
        assert fit.intercept == pytest.approx(math.log(5.0), abs=1e-9)

    def test_slowly_corrected_power_law(self):
        us = [10.0 * 2 ** k for k in range(7)]       # 10 .. 640
        curve = [_estimate(u, (1.0 / u) * (1 + 0.1 / u)) for u in us]
        fit = fit_tail(curve)
        assert fit.slope == pytest.approx(-1.0, abs=0.02)

    def test_zero_point_excluded(self):
        curve = [_estimate(u, 5.0 * u ** -2.0) for u in [10, 20, 40, 80]]
        curve.append(_estimate(160.0, 0.0, n_ruined=0))
        fit = fit_tail(curve)
        assert fit.n_used == 4
        assert fit.slope == pytest.approx(-2.0, abs=1e-9)

    def test_sparse_ruin_points_excluded(self):
        curve = [_estimate(u, 5.0 * u ** -2.0) for u in [10, 20, 40, 80]]
        curve.append(_estimate(160.0, 0.0005, n_ruined=5))    # < 10 events
        fit = fit_tail(curve)
        assert fit.n_used == 4

    def test_insufficient_data(self):
        curve = [_estimate(u, 0.5 / u) for u in [10, 20, 40]]
        with pytest.raises(InsufficientDataError):
            fit_tail(curve)


class TestBoundsReport:
    def test_json_field_names(self):
        rep = bounds_report(make_params(1.0), ClaimDistribution.exponential(1.0))
        d = rep.to_dict()
        assert list(d) == ["beta", "varrho", "j_factor", "upper_constant",
                           "mu", "claim_beta_moment"]
        assert d["upper_constant"] == pytest.approx(20.0)
        assert d["varrho"] is None                    # undefined for beta <= 1

    def test_varrho_present_above_one(self):
        rep = bounds_report(make_params(2.0), ClaimDistribution.exponential(1.0))
        assert rep.to_dict()["varrho"] == pytest.approx(0.05)

    def test_positive_constants(self):
        for beta in [0.5, 1.0, 1.7, 2.0, 3.1]:
            rep = bounds_report(make_params(beta),
                                ClaimDistribution.exponential(1.0))
            assert rep.j_factor > 0
            assert rep.upper_constant > 0

    def test_certain_ruin_rejected(self):
        with pytest.raises(ParameterError):
            bounds_report(make_params(-0.5), ClaimDistribution.exponential(1.0))
