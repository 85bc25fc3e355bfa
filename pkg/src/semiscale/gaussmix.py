"""Scalar probability kernel for Gaussian-mixture return models.

A constant-volatility jump-diffusion with drift ``mu``, diffusion volatility
``sigma``, jump intensity ``lam`` (all per year) and i.i.d. normal log jump
sizes N(mu_q, sigma_q^2) makes the t-period log return an infinite mixture of
normals: component k (the "k jumps happened" branch) has

    weight    e^{-lam t} (lam t)^k / k!
    mean      (mu - sigma^2/2) t + k mu_q
    variance  sigma^2 t + k sigma_q^2

This module provides the standard-normal pdf/cdf, the Poisson weights (raw
and with the tail mass folded into the last term), the mixture density, and
the closed-form mean/variance of the compound-Poisson jump sum together with
its large-intensity normal limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtr

__all__ = [
    "JumpDiffusionParams",
    "PoissonWeights",
    "MixtureComponent",
    "std_normal_pdf",
    "std_normal_cdf",
    "poisson_terms",
    "poisson_weights",
    "poisson_tail_bound",
    "mixture_components",
    "mixture_density",
    "compound_poisson_moments",
    "normal_limit_params",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class JumpDiffusionParams:
    """Constant-volatility jump-diffusion parameters, all in per-year units.

    ``lam`` is the Poisson jump intensity; ``mu_q``/``sigma_q`` describe the
    normal law of a single log jump size (dimensionless).
    """

    mu: float
    sigma: float
    lam: float
    mu_q: float
    sigma_q: float

    def __post_init__(self) -> None:
        vals = (self.mu, self.sigma, self.lam, self.mu_q, self.sigma_q)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite parameter in {vals}")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.lam < 0.0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.sigma_q < 0.0:
            raise ValueError(f"sigma_q must be nonnegative, got {self.sigma_q}")

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.sigma, self.lam, self.mu_q, self.sigma_q])

    @staticmethod
    def from_array(theta: np.ndarray) -> "JumpDiffusionParams":
        mu, sigma, lam, mu_q, sigma_q = (float(v) for v in theta)
        return JumpDiffusionParams(mu, sigma, lam, mu_q, sigma_q)


@dataclass(frozen=True)
class PoissonWeights:
    """Truncated Poisson pmf with the tail absorbed into the last weight.

    ``weights[k] = e^{-lam_t} lam_t^k / k!`` for k < m and
    ``weights[m] = 1 - sum of the others``, so the vector always sums to one.
    """

    weights: np.ndarray
    lambda_t: float
    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.lambda_t < 0.0:
            raise ValueError(f"lambda_t must be >= 0, got {self.lambda_t}")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.m + 1,):
            raise ValueError("weights must have length m + 1")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if self.weight < 0.0:
            raise ValueError(f"weight must be >= 0, got {self.weight}")
        if self.variance <= 0.0:
            raise ValueError(f"variance must be > 0, got {self.variance}")


def std_normal_pdf(x):
    """phi(x) = exp(-x^2/2) / sqrt(2 pi); accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return float(out) if out.ndim == 0 else out

def std_normal_cdf(x):
    """Phi(x) via the erf-based ``scipy.special.ndtr`` (abs error < 1e-15)."""
    x = np.asarray(x, dtype=float)
    out = ndtr(x)
    return float(out) if out.ndim == 0 else out


def poisson_terms(lambda_t: float, k_max: int) -> np.ndarray:
    """Raw Poisson probabilities p_k = e^{-lam_t} lam_t^k / k!, k = 0..k_max.

    Uses the multiplicative recurrence p_{k+1} = p_k * lam_t / (k+1); falls
    back to log-space (lgamma) when e^{-lam_t} underflows.
    """
    if lambda_t < 0.0:
        raise ValueError(f"lambda_t must be >= 0, got {lambda_t}")
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    p0 = math.exp(-lambda_t)
    if p0 > 0.0:
        out = np.empty(k_max + 1)
        out[0] = p0
        for k in range(k_max):
            out[k + 1] = out[k] * lambda_t / (k + 1.0)
        return out
    # lam_t beyond ~708: individual terms still representable near k ~ lam_t
    k = np.arange(k_max + 1, dtype=float)
    logs = -lambda_t + k * math.log(lambda_t) - gammaln(k + 1.0)
    return np.exp(logs)


def poisson_weights(lambda_t: float, m: int) -> PoissonWeights:
    """Jump-count distribution capped at m: the mass beyond m-1 is folded
    into the m-th weight so that the result is a proper distribution."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    raw = poisson_terms(lambda_t, m - 1)
    w = np.empty(m + 1)
    w[:m] = raw
    w[m] = max(0.0, 1.0 - raw.sum())
    return PoissonWeights(weights=w, lambda_t=lambda_t, m=m)


def poisson_tail_bound(m: int) -> float:
    """Worst-case probability of more than m jumps in one period when the
    per-period rate stays below one: 1 - sum_{k<=m} e^{-1}/k!.

    The tail is increasing in the rate (its derivative telescopes to the
    pmf at m, which is positive), so the supremum over rates in [0, 1) is
    attained at rate 1.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return float(1.0 - poisson_terms(1.0, m).sum())


def _mixture_arrays(
    params: JumpDiffusionParams, t: float, k_max: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(weights, means, variances) of mixture components 0..k_max."""
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    k = np.arange(k_max + 1, dtype=float)
    w = poisson_terms(params.lam * t, k_max)
    means = (params.mu - 0.5 * params.sigma**2) * t + k * params.mu_q
    variances = params.sigma**2 * t + k * params.sigma_q**2
    return w, means, variances


def mixture_components(
    params: JumpDiffusionParams, t: float, k_max: int
) -> list[MixtureComponent]:
    """Explicit component list of the t-period return mixture, truncated at
    k_max jumps. Weights are the raw Poisson terms; the ignored tail mass is
    ``1 - sum(weights)``."""
    w, means, variances = _mixture_arrays(params, t, k_max)
    return [
        MixtureComponent(weight=float(wk), mean=float(mk), variance=float(vk))
        for wk, mk, vk in zip(w, means, variances)
    ]


def mixture_density(y, params: JumpDiffusionParams, t: float, k_max: int):
    """Density of the t-period log return, truncated at k_max jumps.

    Integrates to 1 minus the Poisson tail mass beyond k_max.
    """
    w, means, variances = _mixture_arrays(params, t, k_max)
    y_arr = np.asarray(y, dtype=float)
    z = (y_arr[..., None] - means) / np.sqrt(variances)
    dens = np.exp(-0.5 * z * z) / (_SQRT_2PI * np.sqrt(variances))
    out = dens @ w
    return float(out) if out.ndim == 0 else out


def compound_poisson_moments(
    params: JumpDiffusionParams, t: float
) -> tuple[float, float]:
    """Mean and variance of the summed jump contribution over [0, t].

    By the laws of total expectation and total variance,
    mean = lam t mu_q and variance = lam t (sigma_q^2 + mu_q^2).
    """
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    lt = params.lam * t
    return lt * params.mu_q, lt * (params.sigma_q**2 + params.mu_q**2)


def normal_limit_params(
    params: JumpDiffusionParams, t: float
) -> tuple[float, float]:
    """Mean and variance of the normal law the return converges to when the
    jump count grows large: the diffusion moments plus the compound-Poisson
    moments."""
    jump_mean, jump_var = compound_poisson_moments(params, t)
    mean = (params.mu - 0.5 * params.sigma**2) * t + jump_mean
    variance = params.sigma**2 * t + jump_var
    return mean, variance
