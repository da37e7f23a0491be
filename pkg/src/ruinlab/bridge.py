"""Premium accrual over one inter-claim block.

Conditional on the block length theta and the Brownian endpoint w_theta, the
premium collected and carried to the end of the block is

    eta = integral_0^theta c(t0 + s, x0) * exp(kappa (theta - s)
                                               + sigma (w_theta - w_s)) ds,

with the interior Brownian values filled in from the endpoint-conditioned
(bridge) law and the integral approximated by the trapezoid rule on a
uniform grid. The quadrature is exact whenever the integrand is constant
(zero schedule, or sigma == 0 with kappa == 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .model import ModelParams, PremiumSchedule

__all__ = ["BridgeGrid", "sample_bridge", "eta_integral", "sample_eta",
           "sample_eta_batch"]


@dataclass(frozen=True, eq=False)
class BridgeGrid:
    """Uniform grid over one block with endpoint-pinned Brownian values.

    times[0] == 0, times[-1] == theta, w[0] == 0, w[-1] == w_theta;
    n_points is the number of sub-intervals (len(times) == n_points + 1).
    """

    theta: float
    times: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)

    @property
    def n_points(self) -> int:
        return len(self.times) - 1


def sample_bridge(rng: np.random.Generator, theta: float, w_theta: float,
                  n_points: int = 64) -> BridgeGrid:
    """Draw the interior Brownian values given the block endpoint.

    Sequential conditioning: each w(u_k) given (w(u_{k-1}), w(theta)) is
    normal with mean w_prev + du * (w_theta - w_prev) / (theta - u_{k-1})
    and variance du * (theta - u_k) / (theta - u_{k-1}).
    """
    if not (theta > 0.0 and math.isfinite(theta)):
        raise ParameterError(f"theta must be finite and > 0, got {theta!r}")
    if n_points < 2:
        raise ParameterError(f"n_points must be >= 2, got {n_points}")
    times = np.linspace(0.0, theta, n_points + 1)
    w = np.empty(n_points + 1)
    w[0] = 0.0
    w[-1] = w_theta
    z = rng.standard_normal(n_points - 1)
    du = theta / n_points
    for k in range(1, n_points):
        rem = theta - times[k - 1]
        mean = w[k - 1] + du * (w_theta - w[k - 1]) / rem
        var = du * (theta - times[k]) / rem
        w[k] = mean + math.sqrt(var) * z[k - 1]
    return BridgeGrid(theta=theta, times=times, w=w)


def _integrand(grid: BridgeGrid, sched: PremiumSchedule, params: ModelParams,
               t_start: float, x_start):
    if sched.kind == "capped_state" and x_start is None:
        raise ParameterError("capped_state schedule needs x_start")
    c = sched.rate(np.asarray(grid.times) + t_start, x_start)
    growth = np.exp(params.kappa * (grid.theta - grid.times)
                    + params.sigma * (grid.w[-1] - grid.w))
    return c * growth


def eta_integral(grid: BridgeGrid, sched: PremiumSchedule, params: ModelParams,
                 t_start: float = 0.0, x_start: float | None = None) -> float:
    """Trapezoid value of the discounted premium over one block, >= 0."""
    if sched.is_zero:
        return 0.0
    g = _integrand(grid, sched, params, t_start, x_start)
    h = grid.theta / grid.n_points
    return float(h * (0.5 * g[0] + g[1:-1].sum() + 0.5 * g[-1]))


def sample_eta(rng: np.random.Generator, theta: float, w_theta: float,
               sched: PremiumSchedule, params: ModelParams,
               t_start: float = 0.0, x_start: float | None = None,
               n_points: int = 64) -> float:
    """Bridge draw plus quadrature; skips sampling entirely for a zero rate."""
    if sched.is_zero:
        return 0.0
    grid = sample_bridge(rng, theta, w_theta, n_points)
    return eta_integral(grid, sched, params, t_start, x_start)


def sample_eta_batch(rng: np.random.Generator, theta: np.ndarray,
                     w_theta: np.ndarray, sched: PremiumSchedule,
                     params: ModelParams, t_start, x_start=None,
                     n_points: int = 64) -> np.ndarray:
    """Vectorized premium accrual for a batch of blocks.

    Interior values come from unpinned increments plus the linear endpoint
    correction, which is the same conditional Gaussian law the sequential
    sampler produces. Rows whose schedule rate has already decayed to zero
    are skipped without consuming draws.
    """
    n = theta.size
    out = np.zeros(n)
    if sched.is_zero or n == 0:
        return out
    t_start = np.broadcast_to(np.asarray(t_start, dtype=float), (n,))
    need = np.asarray(sched.max_rate_from(t_start)) > 0.0
    m = int(need.sum())
    if m == 0:
        return out
    th = theta[need]
    wt = w_theta[need]
    ts = t_start[need]
    if sched.kind == "capped_state":
        if x_start is None:
            raise ParameterError("capped_state schedule needs x_start")
        xs = np.broadcast_to(np.asarray(x_start, dtype=float), (n,))[need]
    else:
        xs = None

    h = th / n_points                                   # per-row spacing
    z = rng.standard_normal((m, n_points))
    s = np.cumsum(z * np.sqrt(h)[:, None], axis=1)      # unpinned w at u_1..u_n
    frac = np.arange(1, n_points + 1) / n_points
    w_grid = s + frac[None, :] * (wt - s[:, -1])[:, None]
    u_grid = frac[None, :] * th[:, None]

    # integrand on u_1..u_n, then the u_0 = 0 column separately
    expo = params.kappa * (th[:, None] - u_grid) + params.sigma * (wt[:, None] - w_grid)
    g = sched.rate(ts[:, None] + u_grid, xs[:, None] if xs is not None else None) \
        * np.exp(expo)
    g0 = sched.rate(ts, xs) * np.exp(params.kappa * th + params.sigma * wt)
    out[need] = h * (0.5 * g0 + g[:, :-1].sum(axis=1) + 0.5 * g[:, -1])
    return out
