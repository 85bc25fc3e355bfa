"""Shared fixtures and the acceptance-summary reporter."""

import datetime

import numpy as np
import pytest

from semiscale.gaussmix import JumpDiffusionParams
from semiscale.returns import ReturnSeries

ACCEPTANCE_LINES = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {number:02d} {status}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line("  " + line)


def make_dates(n: int, start_ordinal: int = 733000) -> tuple:
    return tuple(datetime.date.fromordinal(start_ordinal + i) for i in range(n))


def make_return_series(values, delta_t: float = 1.0 / 252.0) -> ReturnSeries:
    values = np.asarray(values, dtype=float)
    return ReturnSeries(dates=make_dates(len(values)), values=values, delta_t=delta_t)


def sample_jump_diffusion_returns(
    params: JumpDiffusionParams, n: int, delta_t: float, rng: np.random.Generator
) -> np.ndarray:
    """Exact per-step draws from the jump-diffusion return law: a normal
    diffusion increment plus a Poisson-count sum of normal jump sizes."""
    a = (params.mu - 0.5 * params.sigma**2) * delta_t
    diffusion = rng.normal(a, params.sigma * np.sqrt(delta_t), size=n)
    counts = rng.poisson(params.lam * delta_t, size=n)
    jumps = np.where(
        counts > 0,
        rng.normal(counts * params.mu_q, params.sigma_q * np.sqrt(np.maximum(counts, 1))),
        0.0,
    )
    return diffusion + jumps


@pytest.fixture
def rng():
    return np.random.default_rng(123)
