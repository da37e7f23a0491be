"""Perpetuity samplers and the exact-asymptotics constant.

With M the one-block discount factor and Q = xi * M the discounted claim,
the discounted net claim series

    R = Q_1 + sum_{k>=2} Q_k * prod_{j<k} M_j

satisfies the distributional fixed point R =d Q + M R and is exactly the
supremum of the zero-premium loss: ruin from capital u happens iff R > u.
Its tail is a clean power law, P(R > u) ~ C_1 u^-beta with

    C_1 = 2 alpha * E[(xi + R)^beta - R^beta] / (beta^2 sigma^2),

which the estimator below evaluates by pairing independent claim and R
samples. With a constant premium rate c* the same construction with signed
terms Q*_k = (xi_k - eta*_k) / lam_k gives the running sums Y*_n whose
supremum R* reproduces the constant-premium ruin event exactly:
P(ruin from u) = P(R* > u).

Series are truncated once the running product of M factors drops below
eps_prod (or at k_max terms); the truncated mass is a factor eps_prod
smaller than the kept terms, far below sampling noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import moment_M, mu
from .bridge import sample_eta_batch
from .errors import MomentDivergenceError, ParameterError
from .model import ClaimDistribution, ModelParams, PremiumSchedule

__all__ = [
    "PerpetuityConfig",
    "TailConstantEstimate",
    "GoldieReport",
    "sample_MQ",
    "sample_R",
    "sample_R_batch",
    "sample_Rstar",
    "sample_R_Rstar_batch",
    "estimate_C1",
    "check_goldie_hypotheses",
]


@dataclass(frozen=True)
class PerpetuityConfig:
    """Sampler settings; c_star > 0 switches the starred (premium) series on."""

    params: ModelParams
    claims: ClaimDistribution
    c_star: float = 0.0
    n_samples: int = 100_000
    k_max: int = 100_000
    eps_prod: float = 1e-12
    seed: int = 0
    bridge_points: int = 16

    def __post_init__(self):
        if self.c_star < 0:
            raise ParameterError(f"c_star must be >= 0, got {self.c_star}")
        if self.n_samples < 1:
            raise ParameterError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.k_max < 1:
            raise ParameterError(f"k_max must be >= 1, got {self.k_max}")
        if not 0.0 < self.eps_prod < 1.0:
            raise ParameterError(f"eps_prod must be in (0, 1), got {self.eps_prod}")
        if self.params.sigma <= 0.0:
            raise ParameterError("perpetuity sampling needs sigma > 0")


@dataclass(frozen=True)
class TailConstantEstimate:
    c1_hat: float
    se: float
    n_samples: int
    n_truncated: int


@dataclass(frozen=True)
class GoldieReport:
    """Checks of the implicit-renewal hypotheses behind the power-law tail.

    All closed-form: the discount moment root (E M^beta = 1), its derivative
    mu > 0, and finiteness of the beta+delta moments of M and Q = xi * M
    (independent factors, so the Q moment splits). delta_max is the largest
    exponent overshoot with E M^(beta+delta) finite.
    """

    beta: float
    em_beta: float
    mu: float
    delta: float
    delta_max: float
    m_moment_finite: bool
    q_moment_finite: bool
    ok: bool


def sample_MQ(rng: np.random.Generator, params: ModelParams,
              claims: ClaimDistribution, size=None):
    """Draw the one-block pair (M, Q): discount factor and discounted claim."""
    theta = rng.exponential(1.0 / params.alpha, size)
    w = rng.standard_normal(size) * np.sqrt(theta)
    m = np.exp(-(params.sigma * w + params.kappa * theta))
    xi = claims.sample(rng, size)
    return m, xi * m


def sample_R_batch(rng: np.random.Generator, cfg: PerpetuityConfig,
                   size: int) -> tuple[np.ndarray, int]:
    """Vectorized draws of the zero-premium series R. Returns (samples,
    number of series stopped by k_max rather than eps_prod)."""
    out = np.zeros(size)
    pi = np.ones(size)
    idx = np.arange(size)
    for _ in range(cfg.k_max):
        if not idx.size:
            break
        m, q = sample_MQ(rng, cfg.params, cfg.claims, idx.size)
        out[idx] += pi * q
        pi = pi * m
        live = pi >= cfg.eps_prod
        idx = idx[live]
        pi = pi[live]
    return out, int(idx.size)


def sample_R(rng: np.random.Generator, cfg: PerpetuityConfig) -> float:
    """One draw of R."""
    r, _ = sample_R_batch(rng, cfg, 1)
    return float(r[0])


def sample_R_Rstar_batch(rng: np.random.Generator, cfg: PerpetuityConfig,
                         size: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Paired draws (R, R*) built from shared randomness.

    R uses terms pi_{k-1} xi_k / lam_k; R* subtracts the block premium
    eta*_k from the claim before discounting and takes the supremum of the
    partial sums. Term by term the starred contribution is smaller, so
    R* <= R holds pathwise (exactly, not just in law).
    """
    p = cfg.params
    sched = PremiumSchedule.constant(cfg.c_star) if cfg.c_star > 0 \
        else PremiumSchedule.zero()
    out_r = np.zeros(size)
    y = np.zeros(size)
    sup = np.full(size, -np.inf)
    pi = np.ones(size)
    idx = np.arange(size)
    for _ in range(cfg.k_max):
        if not idx.size:
            break
        m = idx.size
        theta = rng.exponential(1.0 / p.alpha, m)
        w = rng.standard_normal(m) * np.sqrt(theta)
        minv = np.exp(-(p.sigma * w + p.kappa * theta))
        eta = sample_eta_batch(rng, theta, w, sched, p,
                               t_start=0.0, n_points=cfg.bridge_points)
        xi = cfg.claims.sample(rng, m)
        out_r[idx] += pi * xi * minv
        y_new = y[idx] + pi * (xi - eta) * minv
        y[idx] = y_new
        np.maximum(sup[idx], y_new, out=y_new)
        sup[idx] = y_new
        pi = pi * minv
        live = pi >= cfg.eps_prod
        idx = idx[live]
        pi = pi[live]
    return out_r, sup, int(idx.size)


def sample_Rstar(rng: np.random.Generator, cfg: PerpetuityConfig) -> float:
    """One draw of the constant-premium supremum R*."""
    _, r_star, _ = sample_R_Rstar_batch(rng, cfg, 1)
    return float(r_star[0])


def estimate_C1(cfg: PerpetuityConfig) -> TailConstantEstimate:
    """Monte Carlo estimate of the exact tail constant C_1.

    Pairs n_samples independent draws of R with fresh independent claims:
    c1_hat = 2 alpha * mean((xi + R)^beta - R^beta) / (beta^2 sigma^2).
    """
    p = cfg.params
    beta = p.beta
    if beta <= 0.0:
        raise ParameterError(f"C_1 is defined for beta > 0, got beta={beta}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed])))
    r, n_trunc = sample_R_batch(rng, cfg, cfg.n_samples)
    xi = cfg.claims.sample(rng, cfg.n_samples)
    vals = (xi + r) ** beta - r ** beta
    scale = 2.0 * p.alpha / (beta * beta * p.sigma_sq)
    c1 = scale * float(np.mean(vals))
    if cfg.n_samples > 1:
        se = scale * float(np.std(vals, ddof=1)) / math.sqrt(cfg.n_samples)
    else:
        se = math.inf
    return TailConstantEstimate(c1_hat=c1, se=se, n_samples=cfg.n_samples,
                                n_truncated=n_trunc)


def check_goldie_hypotheses(params: ModelParams, claims: ClaimDistribution,
                            delta: float | None = None) -> GoldieReport:
    """Closed-form verification of the renewal-theorem hypotheses.

    delta defaults to half the admissible maximum
    delta_max = sqrt(2 alpha / sigma^2 + beta^2 / 4) - beta / 2.
    """
    beta = params.beta
    if beta <= 0.0:
        raise ParameterError(
            f"hypothesis check applies to the power-law regime, got beta={beta}")
    alpha1 = 2.0 * params.alpha / params.sigma_sq
    delta_max = math.sqrt(alpha1 + beta * beta / 4.0) - beta / 2.0
    if delta is None:
        delta = 0.5 * delta_max
    if delta <= 0.0:
        raise ParameterError(f"delta must be > 0, got {delta}")
    em_beta = moment_M(params, beta)
    try:
        moment_M(params, beta + delta)
        m_fin = True
    except MomentDivergenceError:
        m_fin = False
    try:
        claims.moment(beta + delta)
        q_fin = True
    except MomentDivergenceError:
        q_fin = False
    # E |Q|^(beta+delta) = E xi^(beta+delta) * E M^(beta+delta) by independence
    ok = m_fin and q_fin and abs(em_beta - 1.0) < 1e-12
    return GoldieReport(beta=beta, em_beta=em_beta, mu=mu(params),
                        delta=delta, delta_max=delta_max,
                        m_moment_finite=m_fin, q_moment_finite=q_fin, ok=ok)
