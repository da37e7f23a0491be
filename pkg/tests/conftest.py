"""Shared fixtures and the acceptance-line reporter.

Acceptance tests register one PASS/FAIL line each; the terminal summary hook
prints the collected block so the verdicts are visible even under output
capture.
"""

import numpy as np
import pytest

from ruinlab import ClaimDistribution, ModelParams, PremiumSchedule

ACCEPTANCE_LINES = []


def record_acceptance(number: int, name: str, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number:2d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


def make_params(beta: float, sigma_sq: float = 0.1, alpha: float = 1.0) -> ModelParams:
    """Parameters with a chosen tail exponent: a = (beta + 1) sigma^2 / 2."""
    a = 0.5 * (beta + 1.0) * sigma_sq
    return ModelParams.from_variance(a, sigma_sq, alpha)


def rng_from(*entropy) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(entropy))))


@pytest.fixture
def beta1_params() -> ModelParams:
    return make_params(1.0)


@pytest.fixture
def exp_claims() -> ClaimDistribution:
    return ClaimDistribution.exponential(1.0)


@pytest.fixture
def zero_premium() -> PremiumSchedule:
    return PremiumSchedule.zero()
