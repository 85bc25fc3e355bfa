"""Closed-form semivariance for Gaussian and Gaussian-mixture returns.

The below-target semivariance of a density f at threshold D is
``integral_{-inf}^{D} (D - r)^2 f(r) dr``. For a single normal
N(mu1, sigma1^2) it has the exact form

    (D - mu1)^2 Phi(Dt) + sigma1 (D - mu1) phi(Dt) + sigma1^2 Phi(Dt),

with Dt = (D - mu1) / sigma1, obtained by the change of variable
x = (w - mu1)/sigma1 and the identities
``int_{-inf}^a x phi = -phi(a)`` and ``int_{-inf}^a x^2 phi = Phi(a) - a phi(a)``.

For the jump-diffusion mixture the semivariance is the Poisson-weighted sum
of the per-component forms. Truncating the sum at k_max jumps drops only the
Poisson tail mass, which is reported alongside the value rather than ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussmix import (
    JumpDiffusionParams,
    _mixture_arrays,
    std_normal_cdf,
    std_normal_pdf,
)

__all__ = [
    "SemivarianceQuery",
    "SemivarianceResult",
    "normal_semivariance",
    "jump_diffusion_semivariance",
    "pure_diffusion_semivariance",
    "sqrt_time_semideviation",
]

#: Trading days per year used to resolve the default series truncation.
STEPS_PER_YEAR = 252


@dataclass(frozen=True)
class SemivarianceQuery:
    """Everything the mixture semivariance needs beyond model parameters.

    ``threshold`` is the return target D (0 by default), ``horizon`` the
    evaluation horizon in years, ``jump_cap`` the per-period jump cap m, and
    ``k_max`` the series truncation. ``k_max=None`` resolves to
    m * round(horizon * 252) (at least m), i.e. up to m jumps per trading day.
    """

    threshold: float = 0.0
    horizon: float = 1.0
    jump_cap: int = 5
    k_max: int | None = None

    def __post_init__(self) -> None:
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.jump_cap < 1:
            raise ValueError(f"jump_cap must be >= 1, got {self.jump_cap}")
        if self.k_max is not None and self.k_max < 0:
            raise ValueError(f"k_max must be >= 0, got {self.k_max}")

    def resolved_k_max(self) -> int:
        if self.k_max is not None:
            return self.k_max
        n = max(1, round(self.horizon * STEPS_PER_YEAR))
        return self.jump_cap * n


@dataclass(frozen=True)
class SemivarianceResult:
    """Semivariance (squared log-return units), its square root, and the
    probability mass ignored by series truncation."""

    semivariance: float
    semideviation: float
    truncation_tail: float

    def __post_init__(self) -> None:
        if self.semivariance < 0.0:
            raise ValueError(f"semivariance must be >= 0, got {self.semivariance}")
        if not (0.0 <= self.truncation_tail <= 1.0):
            raise ValueError(f"truncation_tail outside [0, 1]: {self.truncation_tail}")

    @staticmethod
    def from_semivariance(sv: float, tail: float = 0.0) -> "SemivarianceResult":
        sv = max(0.0, sv)
        return SemivarianceResult(
            semivariance=sv, semideviation=math.sqrt(sv), truncation_tail=tail
        )


def normal_semivariance(mu1, sigma1, threshold):
    """Exact below-target semivariance of N(mu1, sigma1^2); vectorized."""
    mu1 = np.asarray(mu1, dtype=float)
    sigma1 = np.asarray(sigma1, dtype=float)
    if np.any(sigma1 <= 0.0):
        raise ValueError("sigma1 must be positive")
    d = np.asarray(threshold, dtype=float) - mu1
    dt = d / sigma1
    out = (d * d + sigma1 * sigma1) * std_normal_cdf(dt) + sigma1 * d * std_normal_pdf(dt)
    return float(out) if np.ndim(out) == 0 else out


def jump_diffusion_semivariance(
    params: JumpDiffusionParams, query: SemivarianceQuery
) -> SemivarianceResult:
    """Poisson-weighted sum of per-component semivariances, truncated at
    ``query.resolved_k_max()`` jumps."""
    k_max = query.resolved_k_max()
    w, means, variances = _mixture_arrays(params, query.horizon, k_max)
    sv = float(w @ normal_semivariance(means, np.sqrt(variances), query.threshold))
    tail = min(1.0, max(0.0, 1.0 - float(w.sum())))
    return SemivarianceResult.from_semivariance(sv, tail)


def pure_diffusion_semivariance(
    mu: float, sigma: float, t: float, threshold: float
) -> SemivarianceResult:
    """No-jump special case: one component N((mu - sigma^2/2) t, sigma^2 t)."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    mu0 = (mu - 0.5 * sigma**2) * t
    sv = float(normal_semivariance(mu0, sigma * math.sqrt(t), threshold))
    return SemivarianceResult.from_semivariance(sv, 0.0)


def sqrt_time_semideviation(daily_semideviation: float, steps_per_year: int) -> float:
    """Square-root-of-time scaling applied at the semideviation level.

    Variance grows linearly in time for a driftless diffusion, so the
    deviation-like quantity scales with the square root of the step count.
    """
    if daily_semideviation < 0.0:
        raise ValueError("daily_semideviation must be >= 0")
    if steps_per_year < 0:
        raise ValueError("steps_per_year must be >= 0")
    return daily_semideviation * math.sqrt(steps_per_year)
