"""Parameter derivation, claim laws and premium schedules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruinlab import (ClaimDistribution, ModelParams, MomentDivergenceError,
                     ParameterError, PremiumSchedule, claim_moment,
                     derive_params, premium_rate)

from conftest import rng_from


# frozen independent value: quadrature of x^1.5 * exp(-x/2)/2 gave
# 3.759942411938128; the closed form 2^1.5 * Gamma(2.5) below agrees to 8e-12
EXP_MEAN2_Q15 = 3.7599424119465006


class TestDeriveParams:
    def test_beta_one(self):
        p = derive_params(0.1, math.sqrt(0.1), 1.0)
        assert p.beta == pytest.approx(1.0, abs=1e-12)
        assert p.kappa == pytest.approx(0.05, abs=1e-15)
        assert p.regime == "power-law"

    def test_critical_boundary(self):
        p = ModelParams.from_variance(0.05, 0.1, 1.0)
        assert p.beta == pytest.approx(0.0, abs=1e-12)
        assert p.kappa == pytest.approx(0.0, abs=1e-15)
        assert p.regime == "certain-ruin"

    def test_beta_three(self):
        p = ModelParams.from_variance(0.1, 0.05, 2.0)
        assert p.beta == pytest.approx(3.0, abs=1e-12)
        assert p.kappa == pytest.approx(0.075, abs=1e-15)

    def test_rejects_bad_domains(self):
        with pytest.raises(ParameterError):
            derive_params(0.1, 0.0, 1.0)
        with pytest.raises(ParameterError):
            derive_params(0.1, -0.3, 1.0)
        with pytest.raises(ParameterError):
            derive_params(0.1, 0.3, 0.0)
        with pytest.raises(ParameterError):
            derive_params(-0.1, 0.3, 1.0)

    @given(a=st.floats(0.01, 10.0), sigma_sq=st.floats(0.001, 10.0),
           factor=st.floats(0.01, 100.0))
    def test_beta_scale_invariant(self, a, sigma_sq, factor):
        # multiplying drift and variance by the same factor keeps beta
        p1 = ModelParams.from_variance(a, sigma_sq, 1.0)
        p2 = ModelParams.from_variance(a * factor, sigma_sq * factor, 1.0)
        assert p2.beta == pytest.approx(p1.beta, rel=1e-9, abs=1e-9)

    def test_derived_not_stored(self):
        p = derive_params(0.3, 0.5, 2.0)
        assert p.kappa == 0.3 - 0.5 ** 2 / 2
        assert p.beta == 2 * 0.3 / 0.5 ** 2 - 1


class TestClaimMoments:
    def test_exponential_mean(self):
        assert claim_moment(ClaimDistribution.exponential(1.0), 1.0) == pytest.approx(1.0)

    def test_constant_cube(self):
        assert claim_moment(ClaimDistribution.constant(2.0), 3.0) == pytest.approx(8.0)

    def test_exponential_fractional(self):
        got = claim_moment(ClaimDistribution.exponential(2.0), 1.5)
        assert got == pytest.approx(EXP_MEAN2_Q15, rel=1e-12)

    def test_pareto_closed_form(self):
        d = ClaimDistribution.pareto(3.0, 2.0)
        assert claim_moment(d, 1.0) == pytest.approx(3.0 * 2.0 / 2.0)
        assert claim_moment(d, 2.9999) < math.inf

    def test_pareto_divergence(self):
        d = ClaimDistribution.pareto(1.5, 1.0)
        with pytest.raises(MomentDivergenceError):
            claim_moment(d, 1.5)
        with pytest.raises(MomentDivergenceError):
            claim_moment(d, 2.0)

    def test_lognormal_closed_form(self):
        d = ClaimDistribution.lognormal(0.3, 0.7)
        q = 1.7
        assert claim_moment(d, q) == pytest.approx(
            math.exp(q * 0.3 + q * q * 0.7 ** 2 / 2), rel=1e-12)

    def test_zeroth_moment_is_one(self):
        for d in [ClaimDistribution.exponential(2.0),
                  ClaimDistribution.pareto(2.0, 1.0),
                  ClaimDistribution.lognormal(0.0, 1.0),
                  ClaimDistribution.constant(5.0)]:
            assert claim_moment(d, 0.0) == pytest.approx(1.0)

    def test_construction_validation(self):
        with pytest.raises(ParameterError):
            ClaimDistribution.exponential(0.0)
        with pytest.raises(ParameterError):
            ClaimDistribution.pareto(-1.0, 1.0)
        with pytest.raises(ParameterError):
            ClaimDistribution.lognormal(0.0, 0.0)
        with pytest.raises(ParameterError):
            ClaimDistribution.constant(-2.0)


# one Monte Carlo moment check per claim kind; 4 standard errors
@pytest.mark.parametrize("dist,q", [
    (ClaimDistribution.exponential(2.0), 1.5),
    (ClaimDistribution.pareto(5.0, 1.0), 2.0),   # 2q = 4 < 5 keeps the SE finite
    (ClaimDistribution.lognormal(0.2, 0.5), 1.3),
    (ClaimDistribution.constant(3.0), 2.0),
])
def test_sampling_matches_moment(dist, q):
    rng = rng_from(11, hash(dist.kind) % 1000)
    x = dist.sample(rng, 1_000_000)
    assert np.all(x > 0)
    vals = x ** q
    target = claim_moment(dist, q)
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - target) <= 4 * se + 1e-12


def test_sample_scalar_and_shape():
    d = ClaimDistribution.exponential(1.0)
    rng = rng_from(1)
    assert np.isscalar(float(d.sample(rng)))
    assert d.sample(rng, (3, 4)).shape == (3, 4)


class TestPremiumSchedules:
    def test_constant_rate(self):
        s = PremiumSchedule.constant(3.0)
        assert premium_rate(s, 17.0) == pytest.approx(3.0)

    def test_exponential_halving(self):
        s = PremiumSchedule.exponential(2.0, -1.0)
        assert premium_rate(s, math.log(2.0)) == pytest.approx(1.0)

    def test_zero(self):
        s = PremiumSchedule.zero()
        assert premium_rate(s, 5.0) == 0.0
        assert s.is_zero

    def test_exponential_gamma_zero_equals_constant(self):
        s = PremiumSchedule.exponential(2.5, 0.0)
        c = PremiumSchedule.constant(2.5)
        t = np.linspace(0.0, 100.0, 1001)
        assert np.array_equal(s.rate(t), c.rate(t))

    def test_capped_state(self):
        s = PremiumSchedule.capped_state(2.0, 10.0)
        assert premium_rate(s, 0.0, x=5.0) == pytest.approx(1.0)
        assert premium_rate(s, 0.0, x=100.0) == pytest.approx(2.0)
        assert premium_rate(s, 0.0, x=-3.0) == 0.0

    def test_gamma_must_be_nonpositive(self):
        with pytest.raises(ParameterError):
            PremiumSchedule.exponential(1.0, 0.2)

    @pytest.mark.parametrize("sched", [
        PremiumSchedule.constant(2.0),
        PremiumSchedule.exponential(2.0, -0.3),
        PremiumSchedule.zero(),
        PremiumSchedule.capped_state(2.0, 4.0),
    ])
    def test_rate_bounded_on_random_probes(self, sched):
        rng = rng_from(23, hash(sched.kind) % 1000)
        t = rng.uniform(0.0, 1e3, 100_000)
        x = rng.uniform(-10.0, 1e4, 100_000)
        r = sched.rate(t, x)
        assert np.all(r >= 0.0)
        assert np.all(r <= sched.c_star + 1e-15)

    def test_max_rate_from(self):
        s = PremiumSchedule.exponential(2.0, -1.0)
        assert s.max_rate_from(0.0) == pytest.approx(2.0)
        assert s.max_rate_from(np.array([0.0, math.log(2.0)]))[1] == pytest.approx(1.0)
        assert PremiumSchedule.zero().max_rate_from(3.0) == 0.0


@settings(max_examples=30)
@given(q=st.floats(0.01, 4.9))
def test_pareto_moment_monotone_in_q(q):
    d = ClaimDistribution.pareto(5.0, 1.0)
    # scale 1 pareto moments grow with q
    assert claim_moment(d, q) <= claim_moment(d, q + 0.05) + 1e-12
