"""Model primitives: process parameters, claim-size laws, premium schedules.

The capital process starts at u, earns investment returns with drift ``a``
and volatility ``sigma`` (applied multiplicatively to current capital),
collects premiums at a bounded time/state dependent rate, and pays i.i.d.
positive claims at the arrival times of a Poisson process with intensity
``alpha``. Everything downstream (chain simulation, tail analytics, the
brute-force oracle) consumes the three small value types defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MomentDivergenceError, ParameterError

__all__ = [
    "ModelParams",
    "ClaimDistribution",
    "PremiumSchedule",
    "derive_params",
    "claim_moment",
    "premium_rate",
]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


@dataclass(frozen=True)
class ModelParams:
    """Investment and arrival parameters, with the derived exponents.

    Attributes:
        a: investment drift, >= 0.
        sigma: investment volatility. Must be > 0 for anything involving the
            tail exponent; sigma == 0 is tolerated only so degenerate
            diagnostics (pure drift, classical premium-only dynamics) can
            reuse the kappa-based machinery.
        alpha: claim arrival intensity, > 0.

    ``kappa`` and ``beta`` are always derived on access, never stored, so
    they cannot drift out of sync with the primitives.
    """

    a: float
    sigma: float
    alpha: float

    def __post_init__(self):
        _require(math.isfinite(self.a) and self.a >= 0.0,
                 f"drift a must be finite and >= 0, got {self.a!r}")
        _require(math.isfinite(self.sigma) and self.sigma >= 0.0,
                 f"volatility sigma must be finite and >= 0, got {self.sigma!r}")
        _require(math.isfinite(self.alpha) and self.alpha > 0.0,
                 f"arrival intensity alpha must be finite and > 0, got {self.alpha!r}")

    @property
    def sigma_sq(self) -> float:
        return self.sigma * self.sigma

    @property
    def kappa(self) -> float:
        """Drift of the log capital between claims: a - sigma^2 / 2."""
        return self.a - 0.5 * self.sigma_sq

    @property
    def beta(self) -> float:
        """Tail exponent 2a / sigma^2 - 1. Positive iff kappa is positive."""
        if self.sigma == 0.0:
            raise ParameterError("tail exponent undefined for sigma == 0")
        return 2.0 * self.a / self.sigma_sq - 1.0

    @property
    def regime(self) -> str:
        """'power-law' when beta > 0, else 'certain-ruin' (beta <= 0)."""
        return "power-law" if self.beta > 0.0 else "certain-ruin"

    @classmethod
    def from_variance(cls, a: float, sigma_sq: float, alpha: float) -> "ModelParams":
        """Construct from the variance sigma^2 instead of the volatility."""
        _require(math.isfinite(sigma_sq) and sigma_sq >= 0.0,
                 f"sigma_sq must be finite and >= 0, got {sigma_sq!r}")
        return cls(a=a, sigma=math.sqrt(sigma_sq), alpha=alpha)


def derive_params(a: float, sigma: float, alpha: float) -> ModelParams:
    """Validated constructor used by everything that simulates.

    Requires sigma > 0 so that the derived exponent beta is well defined.
    """
    params = ModelParams(a=float(a), sigma=float(sigma), alpha=float(alpha))
    _require(params.sigma > 0.0, "sigma must be > 0 for a usable model")
    return params


@dataclass(frozen=True)
class ClaimDistribution:
    """Positive claim-size law with closed-form fractional moments.

    Construct through the classmethods; the raw fields exist only to keep the
    type frozen, hashable and picklable.

    Kinds and parameters:
        exponential(mean)       E xi^q = mean^q * Gamma(q + 1)
        pareto(shape, scale)    survival (scale/x)^shape on x >= scale,
                                E xi^q = shape * scale^q / (shape - q), q < shape
        lognormal(meanlog, sdlog)  E xi^q = exp(q*meanlog + q^2 sdlog^2 / 2)
        constant(value)         E xi^q = value^q
    """

    kind: str
    args: tuple

    @classmethod
    def exponential(cls, mean: float) -> "ClaimDistribution":
        _require(math.isfinite(mean) and mean > 0.0, f"mean must be > 0, got {mean!r}")
        return cls("exponential", (float(mean),))

    @classmethod
    def pareto(cls, shape: float, scale: float) -> "ClaimDistribution":
        _require(math.isfinite(shape) and shape > 0.0, f"shape must be > 0, got {shape!r}")
        _require(math.isfinite(scale) and scale > 0.0, f"scale must be > 0, got {scale!r}")
        return cls("pareto", (float(shape), float(scale)))

    @classmethod
    def lognormal(cls, meanlog: float, sdlog: float) -> "ClaimDistribution":
        _require(math.isfinite(meanlog), f"meanlog must be finite, got {meanlog!r}")
        _require(math.isfinite(sdlog) and sdlog > 0.0, f"sdlog must be > 0, got {sdlog!r}")
        return cls("lognormal", (float(meanlog), float(sdlog)))

    @classmethod
    def constant(cls, value: float) -> "ClaimDistribution":
        _require(math.isfinite(value) and value > 0.0, f"value must be > 0, got {value!r}")
        return cls("constant", (float(value),))

    @property
    def unbounded_support(self) -> bool:
        """True when the claim law puts mass on every right tail."""
        return self.kind != "constant"

    def sample(self, rng: np.random.Generator, size=None):
        """Draw claims. Returns a scalar for size=None, else an ndarray."""
        if self.kind == "exponential":
            return rng.exponential(self.args[0], size)
        if self.kind == "pareto":
            shape, scale = self.args
            # inverse transform on 1-U in (0, 1] so the draw is always finite
            u = rng.random(size)
            return scale * (1.0 - u) ** (-1.0 / shape)
        if self.kind == "lognormal":
            meanlog, sdlog = self.args
            return rng.lognormal(meanlog, sdlog, size)
        if self.kind == "constant":
            v = self.args[0]
            return v if size is None else np.full(size, v)
        raise ParameterError(f"unknown claim kind {self.kind!r}")

    def moment(self, q: float) -> float:
        """Closed-form E xi^q for real q >= 0.

        Raises MomentDivergenceError when the moment does not exist
        (pareto with q >= shape).
        """
        _require(math.isfinite(q) and q >= 0.0, f"moment order must be >= 0, got {q!r}")
        if self.kind == "exponential":
            mean = self.args[0]
            # log-gamma route keeps large q away from Gamma overflow
            return math.exp(q * math.log(mean) + math.lgamma(q + 1.0))
        if self.kind == "pareto":
            shape, scale = self.args
            if q >= shape:
                raise MomentDivergenceError(
                    f"pareto moment of order {q} diverges at shape {shape}")
            return shape * scale**q / (shape - q)
        if self.kind == "lognormal":
            meanlog, sdlog = self.args
            return math.exp(q * meanlog + 0.5 * q * q * sdlog * sdlog)
        if self.kind == "constant":
            return self.args[0] ** q
        raise ParameterError(f"unknown claim kind {self.kind!r}")

    def scale_hint(self) -> float:
        """A finite typical claim size, defined for every kind (pareto mean
        may diverge, so the median is used there)."""
        if self.kind == "pareto":
            shape, scale = self.args
            return scale * 2.0 ** (1.0 / shape)
        if self.kind == "lognormal":
            return math.exp(self.args[0])
        return self.args[0]


def claim_moment(dist: ClaimDistribution, q: float) -> float:
    """Closed-form fractional moment E xi^q of a claim law."""
    return dist.moment(q)


@dataclass(frozen=True)
class PremiumSchedule:
    """Deterministic-in-(t, x) premium rate, bounded by c_star.

    Kinds:
        zero                    rate 0
        constant(c_star)        rate c_star
        exponential(c_star, gamma)  rate c_star * exp(gamma * t), gamma <= 0
        capped_state(c_star, scale) rate c_star * min(1, x / scale), clipped
                                to [0, c_star]; x is the capital at the start
                                of the current inter-claim block. min(1, x/s)
                                is Lipschitz in x, so the capital dynamics
                                stay well posed.
    """

    kind: str
    c_star: float
    gamma: float = 0.0
    scale: float = 1.0

    @classmethod
    def zero(cls) -> "PremiumSchedule":
        return cls("zero", 0.0)

    @classmethod
    def constant(cls, c_star: float) -> "PremiumSchedule":
        _require(math.isfinite(c_star) and c_star >= 0.0,
                 f"c_star must be >= 0, got {c_star!r}")
        return cls("constant", float(c_star))

    @classmethod
    def exponential(cls, c_star: float, gamma: float) -> "PremiumSchedule":
        _require(math.isfinite(c_star) and c_star >= 0.0,
                 f"c_star must be >= 0, got {c_star!r}")
        _require(math.isfinite(gamma) and gamma <= 0.0,
                 f"gamma must be <= 0, got {gamma!r}")
        return cls("exponential", float(c_star), gamma=float(gamma))

    @classmethod
    def capped_state(cls, c_star: float, scale: float) -> "PremiumSchedule":
        _require(math.isfinite(c_star) and c_star >= 0.0,
                 f"c_star must be >= 0, got {c_star!r}")
        _require(math.isfinite(scale) and scale > 0.0,
                 f"scale must be > 0, got {scale!r}")
        return cls("capped_state", float(c_star), scale=float(scale))

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.c_star == 0.0

    def rate(self, t, x=None):
        """Premium rate at time t and capital x. Vectorizes over arrays."""
        if self.kind == "zero":
            return np.zeros_like(t, dtype=float) if isinstance(t, np.ndarray) else 0.0
        if self.kind == "constant":
            if isinstance(t, np.ndarray):
                return np.full_like(t, self.c_star, dtype=float)
            return self.c_star
        if self.kind == "exponential":
            return self.c_star * np.exp(self.gamma * np.asarray(t, dtype=float)) \
                if isinstance(t, np.ndarray) else self.c_star * math.exp(self.gamma * t)
        if self.kind == "capped_state":
            if x is None:
                raise ParameterError("capped_state premium rate needs the capital x")
            frac = np.clip(np.asarray(x, dtype=float) / self.scale, 0.0, 1.0)
            out = self.c_star * frac
            return out if isinstance(x, np.ndarray) else float(out)
        raise ParameterError(f"unknown premium kind {self.kind!r}")

    def max_rate_from(self, t):
        """Upper bound on the rate over [t, inf). Used to skip premium work
        once an exponentially decaying schedule has underflowed to zero."""
        if self.kind == "zero":
            return np.zeros_like(t, dtype=float) if isinstance(t, np.ndarray) else 0.0
        if self.kind == "exponential":
            return self.rate(t)
        if isinstance(t, np.ndarray):
            return np.full_like(t, self.c_star, dtype=float)
        return self.c_star


def premium_rate(sched: PremiumSchedule, t: float, x: float | None = None) -> float:
    """Premium rate of a schedule at time t (and capital x where relevant)."""
    return sched.rate(t, x)
