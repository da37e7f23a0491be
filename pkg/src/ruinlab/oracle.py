"""Brute-force time-discretized simulation of the capital process.

Independent check on the jump-time chain: the capital is advanced on a fine
uniform grid, with each claim time inserted as an extra step boundary so the
multiplicative growth over every sub-interval is exact in distribution. One
step of length h from time t updates

    X <- exp(kappa h + sigma sqrt(h) Z) X + c(t, X) h exp(a h / 2),

the last factor being the average discount of premium income accrued across
the step (a = kappa + sigma^2 / 2). Ruin is checked after every advance and
after every claim; between claims the update maps nonnegative capital to
nonnegative capital, so ruin can only be observed at claims (the estimator
counts any violation of that separately and tests pin the counter to zero).

Both this estimator and the chain estimator it is compared against censor
at the same time horizon t_max, so the two-sample z statistic compares two
estimates of the identical quantity P(ruin at some claim time <= t_max).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chain import CHUNK_PATHS, RuinEstimate, SimConfig, estimate_ruin, wilson_interval
from .errors import ConfigError, ParameterError
from .model import ClaimDistribution, ModelParams, PremiumSchedule

__all__ = [
    "OracleConfig",
    "ComparisonReport",
    "simulate_path",
    "estimate_ruin_oracle",
    "compare_with_chain",
]

_STREAM_DOMAIN = 1_000_003  # keeps oracle streams disjoint from chain streams


@dataclass(frozen=True)
class OracleConfig:
    """Discretization settings. dt defaults to 1e-3 / alpha."""

    params: ModelParams
    claims: ClaimDistribution
    premium: PremiumSchedule
    n_paths: int = 10_000
    t_max: float = 50.0
    dt: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_paths < 1:
            raise ParameterError(f"n_paths must be >= 1, got {self.n_paths}")
        if not self.t_max > 0:
            raise ParameterError(f"t_max must be > 0, got {self.t_max}")
        if self.dt is not None and not 0 < self.dt <= self.t_max:
            raise ParameterError(f"dt must be in (0, t_max], got {self.dt}")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ParameterError(f"seed must be a nonnegative int, got {self.seed!r}")

    @property
    def dt_value(self) -> float:
        return self.dt if self.dt is not None else 1e-3 / self.params.alpha


@dataclass(frozen=True)
class ComparisonReport:
    """Two-sample comparison of the chain and oracle ruin estimates."""

    u: float
    psi_chain: float
    psi_oracle: float
    z: float


def _advance(x, t, h, z, params: ModelParams, premium: PremiumSchedule):
    growth = np.exp(params.kappa * h + params.sigma * np.sqrt(h) * z)
    income = premium.rate(t, x) * h * np.exp(0.5 * params.a * h)
    return growth * x + income


def _simulate_path_detail(u: float, cfg: OracleConfig,
                          rng: np.random.Generator):
    """Scalar path. Returns (ruined, t_ruin, ruined_at_jump)."""
    if u < 0:
        raise ParameterError(f"initial capital must be >= 0, got {u}")
    p = cfg.params
    dt = cfg.dt_value
    x = float(u)
    t = 0.0
    k = 0
    next_jump = rng.exponential(1.0 / p.alpha)
    while t < cfg.t_max:
        grid_next = min((k + 1) * dt, cfg.t_max)
        s = min(grid_next, next_jump)
        h = s - t
        if h > 0.0:
            z = float(rng.standard_normal())
            x = float(_advance(x, t, h, z, p, cfg.premium))
            if x < 0.0:
                return True, s, False
        if s == next_jump:
            x -= float(cfg.claims.sample(rng))
            if x < 0.0:
                return True, s, True
            next_jump = s + rng.exponential(1.0 / p.alpha)
        if s == grid_next:
            k += 1
        t = s
    return False, None, False


def simulate_path(u: float, cfg: OracleConfig,
                  rng: np.random.Generator) -> tuple[bool, float | None]:
    """One discretized path; (ruined, ruin time) with None when censored."""
    ruined, t_ruin, _ = _simulate_path_detail(u, cfg, rng)
    return ruined, t_ruin


def _oracle_chunk(args) -> tuple[int, int]:
    """Vectorized chunk run. Returns (n_ruined, n_interjump_ruin)."""
    u, cfg, chunk_index, n = args
    p = cfg.params
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([cfg.seed, _STREAM_DOMAIN, chunk_index])))
    dt = cfg.dt_value
    n_steps = int(math.ceil(cfg.t_max / dt - 1e-9))
    x = np.full(n, float(u))
    t_cur = np.zeros(n)
    next_jump = rng.exponential(1.0 / p.alpha, n)
    ruined = 0
    interjump = 0
    for k in range(n_steps):
        if not x.size:
            break
        t1 = min((k + 1) * dt, cfg.t_max)
        alive = np.ones(x.size, dtype=bool)
        # claims (possibly several) landing inside this step
        while True:
            pend = alive & (next_jump <= t1)
            if not pend.any():
                break
            ii = np.nonzero(pend)[0]
            h = next_jump[ii] - t_cur[ii]
            z = rng.standard_normal(ii.size)
            x[ii] = _advance(x[ii], t_cur[ii], h, z, p, cfg.premium)
            xi = cfg.claims.sample(rng, ii.size)
            x[ii] -= xi
            t_cur[ii] = next_jump[ii]
            next_jump[ii] = t_cur[ii] + rng.exponential(1.0 / p.alpha, ii.size)
            dead = x[ii] < 0.0
            if dead.any():
                ruined += int(dead.sum())
                alive[ii[dead]] = False
        # advance the remainder of the step for everyone still alive
        ii = np.nonzero(alive & (t_cur < t1))[0]
        if ii.size:
            h = t1 - t_cur[ii]
            z = rng.standard_normal(ii.size)
            x[ii] = _advance(x[ii], t_cur[ii], h, z, p, cfg.premium)
            dead = x[ii] < 0.0
            if dead.any():            # should be impossible; counted, not hidden
                interjump += int(dead.sum())
                ruined += int(dead.sum())
                alive[ii[dead]] = False
        t_cur = np.full(int(alive.sum()), t1)
        x = x[alive]
        next_jump = next_jump[alive]
    return ruined, interjump


def _estimate_oracle_stats(u: float, cfg: OracleConfig,
                           workers: int = 1) -> tuple[RuinEstimate, int]:
    if u < 0:
        raise ParameterError(f"initial capital must be >= 0, got {u}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    full, rem = divmod(cfg.n_paths, CHUNK_PATHS)
    plan = [CHUNK_PATHS] * full + ([rem] if rem else [])
    tasks = [(u, cfg, k, m) for k, m in enumerate(plan)]
    if workers == 1 or len(tasks) == 1:
        results = [_oracle_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_oracle_chunk, tasks))
    n_ruined = sum(r for r, _ in results)
    interjump = sum(i for _, i in results)
    ci_lo, ci_hi = wilson_interval(n_ruined, cfg.n_paths)
    est = RuinEstimate(u=float(u), psi_hat=n_ruined / cfg.n_paths,
                       ci_lo=ci_lo, ci_hi=ci_hi, n_paths=cfg.n_paths,
                       n_ruined=n_ruined, n_censored=cfg.n_paths - n_ruined)
    return est, interjump


def estimate_ruin_oracle(u: float, cfg: OracleConfig, *,
                         workers: int = 1) -> RuinEstimate:
    """Ruin frequency by time t_max from the discretized process."""
    est, _ = _estimate_oracle_stats(u, cfg, workers)
    return est


def compare_with_chain(u: float, oracle_cfg: OracleConfig,
                       chain_cfg: SimConfig, *, workers: int = 1,
                       require_matched: bool = True) -> ComparisonReport:
    """Two-sample z statistic between oracle and chain ruin estimates.

    Both sides censor at oracle_cfg.t_max. The chain config must carry the
    same model, claims and premium (set require_matched=False only for
    deliberate perturbation experiments) and enough max_jumps to cover the
    claims arriving before t_max.
    """
    if require_matched:
        if (oracle_cfg.params != chain_cfg.params
                or oracle_cfg.claims != chain_cfg.claims
                or oracle_cfg.premium != chain_cfg.premium):
            raise ConfigError("oracle and chain configurations do not match")
    lam_budget = oracle_cfg.params.alpha * oracle_cfg.t_max
    needed = int(lam_budget + 10.0 * math.sqrt(lam_budget) + 10.0)
    if chain_cfg.max_jumps < needed:
        raise ConfigError(
            f"chain max_jumps {chain_cfg.max_jumps} cannot cover the time "
            f"horizon (needs >= {needed})")
    est_oracle, _ = _estimate_oracle_stats(u, oracle_cfg, workers)
    est_chain = estimate_ruin(u, chain_cfg, workers=workers,
                              t_horizon=oracle_cfg.t_max)
    x1, n1 = est_chain.n_ruined, est_chain.n_paths
    x2, n2 = est_oracle.n_ruined, est_oracle.n_paths
    pooled = (x1 + x2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        z = 0.0
    else:
        z = (x1 / n1 - x2 / n2) / math.sqrt(
            pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    return ComparisonReport(u=float(u), psi_chain=est_chain.psi_hat,
                            psi_oracle=est_oracle.psi_hat, z=z)
