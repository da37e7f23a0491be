"""Closed-form tail analytics and the log-log slope fit.

In the power-law regime (beta > 0) the ruin probability from initial capital
u decays like C / u^beta, and an explicit upper constant is available:

    C_upper(beta) = J(beta) * E xi^beta,

where J depends only on (beta, sigma, alpha) through varrho(beta) =
(beta - 1) sigma^2 / (2 alpha) and switches formula at beta = 1 and beta = 2
(ties go to the lower branch). The one-block discount factor
M = exp(-(sigma * w_theta + kappa * theta)) has the exact moments

    E M^q = 2 alpha / (2 alpha + (beta - q) q sigma^2),

equal to 1 exactly at q = 0 and q = beta, and the derivative at the root is
mu = E M^beta log M = beta sigma^2 / (2 alpha) > 0. Those identities are what
the estimators in the rest of the package are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (BracketError, InsufficientDataError,
                     MomentDivergenceError, ParameterError)
from .model import ClaimDistribution, ModelParams

__all__ = [
    "Z95",
    "varrho",
    "j_factor",
    "upper_constant",
    "moment_M",
    "mu",
    "effective_exponent",
    "solve_exponent",
    "TailFit",
    "fit_tail",
    "BoundsReport",
    "bounds_report",
]

# two-sided 95% normal quantile, shared by every confidence interval here
Z95 = 1.959963984540054


def varrho(params: ModelParams) -> float:
    """(beta - 1) sigma^2 / (2 alpha); defined for beta > 1 only."""
    beta = params.beta
    if beta <= 1.0:
        raise ParameterError(f"varrho needs beta > 1, got beta={beta}")
    return (beta - 1.0) * params.sigma_sq / (2.0 * params.alpha)


def j_factor(params: ModelParams) -> float:
    """Claim-independent factor J(beta) of the tail upper constant.

    Branches:
        0 < beta <= 1:  2 alpha / (sigma^2 beta^2)
        1 < beta <= 2:  ... * beta (1 + 1/varrho)
        beta > 2:       ... * beta 2^(beta-2) (1 + ((1+varrho)^(1/(beta-1)) - 1)^(1-beta))
    """
    beta = params.beta
    if beta <= 0.0:
        raise ParameterError(f"j_factor needs beta > 0, got beta={beta}")
    base = 2.0 * params.alpha / (params.sigma_sq * beta * beta)
    if beta <= 1.0:
        return base
    rho = varrho(params)
    if beta <= 2.0:
        return base * beta * (1.0 + 1.0 / rho)
    inner = (1.0 + rho) ** (1.0 / (beta - 1.0)) - 1.0
    return base * beta * 2.0 ** (beta - 2.0) * (1.0 + inner ** (1.0 - beta))


def upper_constant(params: ModelParams, claims: ClaimDistribution) -> float:
    """C_upper(beta) = J(beta) * E xi^beta.

    Raises MomentDivergenceError when the claim law has no beta moment
    (heavy pareto claims), in which case the power-law bound is vacuous.
    """
    return j_factor(params) * claims.moment(params.beta)


def moment_M(params: ModelParams, q: float) -> float:
    """Exact E M^q of the one-block discount factor.

    Finite iff 2 alpha + (beta - q) q sigma^2 > 0; diverges at and beyond
    the positive root of that quadratic.
    """
    beta = params.beta
    denom = 2.0 * params.alpha + (beta - q) * q * params.sigma_sq
    if denom <= 0.0:
        raise MomentDivergenceError(
            f"E M^q diverges at q={q} (denominator {denom} <= 0)")
    return 2.0 * params.alpha / denom


def mu(params: ModelParams) -> float:
    """E M^beta log M = beta sigma^2 / (2 alpha), for beta > 0."""
    beta = params.beta
    if beta <= 0.0:
        raise ParameterError(f"mu needs beta > 0, got beta={beta}")
    return beta * params.sigma_sq / (2.0 * params.alpha)


def effective_exponent(params: ModelParams, gamma: float) -> float:
    """Tail exponent with an exponentially decaying premium rate.

    A premium rate c(t) = c* exp(gamma t) with gamma <= 0 shifts the root of
    the adjusted moment equation to beta - 2 gamma / sigma^2 >= beta.
    """
    if not (math.isfinite(gamma) and gamma <= 0.0):
        raise ParameterError(f"gamma must be <= 0, got {gamma!r}")
    return params.beta - 2.0 * gamma / params.sigma_sq


def solve_exponent(moment_fn: Callable[[float], float],
                   bracket: tuple[float, float],
                   tol: float = 1e-12,
                   max_iter: int = 200) -> float:
    """Root of moment_fn(q) = 1 by plain bisection on the given bracket.

    moment_fn may be the closed form or an empirical moment curve; it must
    return +inf (not raise) past a divergence point if the bracket can touch
    one. Stops when |moment_fn(mid) - 1| <= tol or the bracket has shrunk to
    floating-point resolution. Raises BracketError when moment_fn - 1 has the
    same sign at both ends.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f"empty bracket {bracket!r}")
    f_lo = moment_fn(lo) - 1.0
    f_hi = moment_fn(hi) - 1.0
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise BracketError(
            f"no sign change on bracket {bracket!r}: f(lo)-1={f_lo}, f(hi)-1={f_hi}")
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = moment_fn(mid) - 1.0
        if abs(f_mid) <= tol or (hi - lo) < 1e-15 * max(1.0, abs(mid)):
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid


@dataclass(frozen=True)
class TailFit:
    """Weighted log-log slope of an estimated ruin curve."""

    slope: float
    stderr: float
    n_used: int
    intercept: float


def fit_tail(estimates: Sequence) -> TailFit:
    """Weighted least squares of log psi_hat against log u.

    Accepts any sequence of estimates exposing u, psi_hat, ci_lo, ci_hi and
    n_ruined (the chain module's RuinEstimate does). Points with psi_hat <= 0
    or fewer than 10 observed ruin events are excluded; fewer than 4 usable
    points raises InsufficientDataError. Weights are the inverse squared
    relative CI half-widths, i.e. inverse variance of log psi_hat to first
    order.
    """
    xs, ys, ws = [], [], []
    for est in estimates:
        if est.psi_hat <= 0.0 or est.n_ruined < 10:
            continue
        half = 0.5 * (est.ci_hi - est.ci_lo)
        rel = max(half / est.psi_hat, 1e-12)
        xs.append(math.log(est.u))
        ys.append(math.log(est.psi_hat))
        ws.append(1.0 / (rel * rel))
    n = len(xs)
    if n < 4:
        raise InsufficientDataError(
            f"tail fit needs >= 4 usable points, got {n}")
    x = np.asarray(xs)
    y = np.asarray(ys)
    w = np.asarray(ws)
    xb = float(np.sum(w * x) / np.sum(w))
    yb = float(np.sum(w * y) / np.sum(w))
    sxx = float(np.sum(w * (x - xb) ** 2))
    slope = float(np.sum(w * (x - xb) * (y - yb)) / sxx)
    intercept = yb - slope * xb
    resid = y - (intercept + slope * x)
    s2 = float(np.sum(w * resid * resid) / (n - 2))
    return TailFit(slope=slope, stderr=math.sqrt(s2 / sxx),
                   n_used=n, intercept=intercept)


@dataclass(frozen=True)
class BoundsReport:
    """Closed-form tail bound summary, JSON-stable field names."""

    beta: float
    varrho: float | None
    j_factor: float
    upper_constant: float
    mu: float
    claim_beta_moment: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "varrho": self.varrho,
            "j_factor": self.j_factor,
            "upper_constant": self.upper_constant,
            "mu": self.mu,
            "claim_beta_moment": self.claim_beta_moment,
        }


def bounds_report(params: ModelParams, claims: ClaimDistribution) -> BoundsReport:
    """Assemble the closed-form constants for a power-law configuration."""
    beta = params.beta
    if beta <= 0.0:
        raise ParameterError(
            f"bounds are defined in the power-law regime only (beta={beta})")
    return BoundsReport(
        beta=beta,
        varrho=varrho(params) if beta > 1.0 else None,
        j_factor=j_factor(params),
        upper_constant=upper_constant(params, claims),
        mu=mu(params),
        claim_beta_moment=claims.moment(beta),
    )
