"""Random-coefficient AR(1) averaging and descending ladder epochs.

In the critical regime (kappa == 0, i.e. beta == 0) the jump chain has no
log drift, so ruin is certain but only via excursions. Subsampling the chain
at the descending ladder epochs of the Brownian block increments turns it
into a contracting random-coefficient AR(1),

    x_n = a_n x_{n-1} + b_n,      a_n = exp(sigma * (block increment sum)) < 1,

whose Cesaro averages of bounded test functions converge to the stationary
mean. The helpers here provide the AR machinery (paths, the stationary
series x_inf = sum prod(a) b, Cesaro averages with a batch-means standard
error), ladder epoch extraction, a vectorized tail sampler for the first
epoch, and a demonstration that the critical chain ruins with probability
approaching one as the jump budget grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bridge import sample_eta_batch
from .errors import ParameterError
from .model import ClaimDistribution, ModelParams, PremiumSchedule

__all__ = [
    "ArSpec",
    "LadderSequence",
    "F_LIBRARY",
    "ar_path",
    "cesaro_average",
    "cesaro_se",
    "sample_x_infinity",
    "check_contraction",
    "ladder_epochs",
    "first_ladder_epoch_tail",
    "ladder_block_sampler",
    "critical_certain_ruin_demo",
]


@dataclass(frozen=True)
class ArSpec:
    """Random-coefficient AR(1) specification.

    sampler(rng, n) must return a pair of length-n arrays (a, b), i.i.d.
    across calls and entries. delta and rho declare the contraction moment:
    rho = E |a|^delta < 1 (checked statistically by check_contraction, not
    assumed).
    """

    sampler: Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray]]
    x0: float = 0.0
    delta: float = 1.0
    rho: float | None = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError(f"delta must be > 0, got {self.delta}")
        if self.rho is not None and not 0 <= self.rho < 1:
            raise ParameterError(f"declared rho must be in [0, 1), got {self.rho}")


# bounded, uniformly continuous test functions for the averaging checks
F_LIBRARY: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sine": np.sin,
    "tanh": np.tanh,
    "neg_square_clamped": lambda x: np.minimum(x * x, 1.0) * (x <= 0.0),
}


def ar_path(spec: ArSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """The trajectory x_1 .. x_n started from spec.x0 (x0 not included)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    a, b = spec.sampler(rng, n)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (n,) or b.shape != (n,):
        raise ParameterError("sampler must return two arrays of shape (n,)")
    out = np.empty(n)
    x = spec.x0
    for k in range(n):
        x = a[k] * x + b[k]
        out[k] = x
    return out


def cesaro_average(f: Callable, path: np.ndarray) -> float:
    """Plain path average of f."""
    return float(np.mean(f(np.asarray(path, dtype=float))))


def cesaro_se(f: Callable, path: np.ndarray, n_blocks: int = 100) -> float:
    """Batch-means standard error of the path average (the path is
    autocorrelated, so the i.i.d. formula would be too optimistic)."""
    vals = np.asarray(f(np.asarray(path, dtype=float)), dtype=float)
    n = vals.size
    if n < 2 * n_blocks:
        n_blocks = max(2, n // 2)
    means = np.array([b.mean() for b in np.array_split(vals, n_blocks)])
    return float(np.std(means, ddof=1) / math.sqrt(n_blocks))


def sample_x_infinity(spec: ArSpec, rng: np.random.Generator, size=None,
                      k_max: int = 10_000, eps_prod: float = 1e-12):
    """Draws of the stationary series sum_k prod_{j<k} a_j * b_k.

    Truncated once |prod a| < eps_prod or after k_max terms; with a
    contracting spec the truncation error is below sampling noise.
    """
    n = 1 if size is None else int(size)
    out = np.zeros(n)
    pi = np.ones(n)
    idx = np.arange(n)
    for _ in range(k_max):
        if not idx.size:
            break
        a, b = spec.sampler(rng, idx.size)
        out[idx] += pi * np.asarray(b, dtype=float)
        pi = pi * np.asarray(a, dtype=float)
        live = np.abs(pi) >= eps_prod
        idx = idx[live]
        pi = pi[live]
    return float(out[0]) if size is None else out


def check_contraction(spec: ArSpec, rng: np.random.Generator,
                      n: int = 100_000) -> tuple[float, float]:
    """Monte Carlo (rho_hat, se) for E |a|^delta."""
    a, _ = spec.sampler(rng, n)
    v = np.abs(np.asarray(a, dtype=float)) ** spec.delta
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(n))


@dataclass(frozen=True, eq=False)
class LadderSequence:
    """Descending ladder epochs of a cumulative-sum sequence.

    epochs holds 1-based indices t_1 < t_2 < ...; exhausted is True when the
    input ended while scanning for one more epoch.
    """

    epochs: np.ndarray
    n_steps: int
    exhausted: bool


def ladder_epochs(nu, max_epochs: int | None = None) -> LadderSequence:
    """Successive first times the within-block partial sum of nu goes
    strictly negative; each epoch restarts the sum at zero."""
    nu = np.asarray(nu, dtype=float)
    n = nu.size
    epochs: list[int] = []
    p = 0
    exhausted = False
    while p < n and (max_epochs is None or len(epochs) < max_epochs):
        found = -1
        q = p
        run = 0.0
        win = 64
        while q < n:
            blk = np.cumsum(nu[q:q + win]) + run
            neg = blk < 0.0
            if neg.any():
                found = q + int(np.argmax(neg))
                break
            run = float(blk[-1])
            q += blk.size
            win *= 2
        if found < 0:
            exhausted = True
            break
        epochs.append(found + 1)
        p = found + 1
    return LadderSequence(epochs=np.asarray(epochs, dtype=np.int64),
                          n_steps=n, exhausted=exhausted)


def first_ladder_epoch_tail(rng: np.random.Generator, n_reps: int,
                            n_max: int, block: int = 1024) -> np.ndarray:
    """First descending ladder epoch of a standard normal walk, one draw per
    replication, censored at n_max (sentinel -1). Vectorized in blocks."""
    if n_reps < 1 or n_max < 1:
        raise ParameterError("n_reps and n_max must be >= 1")
    t1 = np.full(n_reps, -1, dtype=np.int64)
    idx = np.arange(n_reps)
    run = np.zeros(n_reps)
    done = 0
    while done < n_max and idx.size:
        b = min(block, n_max - done)
        z = rng.standard_normal((idx.size, b))
        cs = np.cumsum(z, axis=1) + run[:, None]
        neg = cs < 0.0
        hit = neg.any(axis=1)
        t1[idx[hit]] = done + np.argmax(neg[hit], axis=1) + 1
        keep = ~hit
        idx = idx[keep]
        run = cs[keep, -1]
        done += b
    return t1


def _require_critical(params: ModelParams) -> None:
    if abs(params.kappa) > 1e-12:
        raise ParameterError(
            f"critical-regime machinery needs kappa == 0, got {params.kappa}")


def ladder_block_sampler(params: ModelParams, claims: ClaimDistribution,
                         c_star: float, bridge_points: int = 16,
                         step_cap: int = 1_000_000):
    """Coefficient sampler for the ladder-subsampled critical chain.

    Returns a callable (rng, n) -> (a, b) drawing one ladder block per
    entry: a is the block growth product exp(sigma * S) with S the (negative)
    Brownian sum at the epoch, so a < 1 pathwise; b is the block's
    accumulated net premium-minus-claim flow. Blocks still open after
    step_cap steps are closed as-is (vanishing fraction, diagnostic use)."""
    _require_critical(params)
    sched = PremiumSchedule.constant(c_star) if c_star > 0 else PremiumSchedule.zero()

    def sampler(rng: np.random.Generator, n: int):
        a_out = np.empty(n)
        b_out = np.empty(n)
        idx = np.arange(n)
        cum = np.zeros(n)
        bacc = np.zeros(n)
        for _ in range(step_cap):
            if not idx.size:
                break
            m = idx.size
            theta = rng.exponential(1.0 / params.alpha, m)
            w = rng.standard_normal(m) * np.sqrt(theta)
            lam = np.exp(params.sigma * w + params.kappa * theta)
            eta = sample_eta_batch(rng, theta, w, sched, params,
                                   t_start=0.0, n_points=bridge_points)
            xi = claims.sample(rng, m)
            bacc = lam * bacc + (eta - xi)
            cum = cum + w
            closed = cum < 0.0
            if closed.any():
                a_out[idx[closed]] = np.exp(params.sigma * cum[closed])
                b_out[idx[closed]] = bacc[closed]
                keep = ~closed
                idx = idx[keep]
                cum = cum[keep]
                bacc = bacc[keep]
        if idx.size:
            a_out[idx] = np.exp(params.sigma * cum)
            b_out[idx] = bacc
        return a_out, b_out

    return sampler


def critical_certain_ruin_demo(u: float, params: ModelParams,
                               claims: ClaimDistribution, c_star: float,
                               budgets, n_paths: int = 2000, seed: int = 0,
                               bridge_points: int = 16) -> list[dict]:
    """Fraction of critical-regime paths ruined at a ladder epoch within
    each jump budget. One simulation run at the largest budget serves all
    budgets, so the reported fractions are non-decreasing by construction.

    Requires claims with unbounded support (a bounded claim cannot push an
    arbitrarily high excursion below zero, and the demonstration would say
    nothing)."""
    _require_critical(params)
    if not claims.unbounded_support:
        raise ParameterError("certain-ruin demonstration needs unbounded claims")
    if u < 0:
        raise ParameterError(f"initial capital must be >= 0, got {u}")
    budgets = [int(b) for b in budgets]
    if not budgets or any(b < 1 for b in budgets) \
            or any(y <= x for x, y in zip(budgets, budgets[1:])):
        raise ParameterError(f"budgets must be strictly increasing, got {budgets}")
    sched = PremiumSchedule.constant(c_star) if c_star > 0 else PremiumSchedule.zero()
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([seed, 424243, 0])))
    ruin_step = np.full(n_paths, -1, dtype=np.int64)
    s = np.full(n_paths, float(u))
    cum = np.zeros(n_paths)
    idx = np.arange(n_paths)
    for step in range(1, budgets[-1] + 1):
        if not idx.size:
            break
        m = idx.size
        theta = rng.exponential(1.0 / params.alpha, m)
        w = rng.standard_normal(m) * np.sqrt(theta)
        lam = np.exp(params.sigma * w + params.kappa * theta)
        eta = sample_eta_batch(rng, theta, w, sched, params,
                               t_start=0.0, n_points=bridge_points)
        xi = claims.sample(rng, m)
        s = lam * s + eta - xi
        cum = cum + w
        at_epoch = cum < 0.0
        ruined = at_epoch & (s < 0.0)
        ruin_step[idx[ruined]] = step
        cum[at_epoch & ~ruined] = 0.0           # epoch passed, sum restarts
        keep = ~ruined
        idx = idx[keep]
        s = s[keep]
        cum = cum[keep]
    hit = ruin_step >= 0
    return [{"budget": b,
             "ruined_fraction": float((hit & (ruin_step <= b)).mean()),
             "n_paths": n_paths}
            for b in budgets]
