"""Likelihood machinery for the constant-volatility return models.

Three nested model kinds share one parameter vector
(mu, sigma, lam, mu_q, sigma_q):

* ``pure_diffusion``   per-step density N(a, s2) with a = (mu - sigma^2/2) dt,
                       s2 = sigma^2 dt; lam, mu_q, sigma_q inert.
* ``ball_torous``      two-component Bernoulli mixture
                       (1 - lam dt) N(a, s2) + lam dt N(a + mu_q, s2 + sigma_q^2).
* ``generalized``      capped multi-jump mixture: up to m jumps per step with
                       truncated-Poisson weights (tail folded into the m-th),
                       component k being N(a + k mu_q, s2 + k sigma_q^2).

Mixture likelihoods of this kind are unbounded in corners of the parameter
space, so optimization always runs inside a finite box and densities are
floored at 1e-300 before taking logs, which keeps the objective total and
comparable everywhere in the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussmix import JumpDiffusionParams, poisson_weights
from .returns import ReturnSeries

__all__ = [
    "PURE_DIFFUSION",
    "BALL_TOROUS",
    "GENERALIZED",
    "ParamBounds",
    "ModelSpec",
    "FitResult",
    "ball_torous_density",
    "generalized_density",
    "log_likelihood",
    "negative_log_likelihood_batch",
    "pure_diffusion_mle",
    "pure_diffusion_mle_vector",
]

PURE_DIFFUSION = "pure_diffusion"
BALL_TOROUS = "ball_torous"
GENERALIZED = "generalized_m_jump"
_KINDS = (PURE_DIFFUSION, BALL_TOROUS, GENERALIZED)

PARAM_NAMES = ("mu", "sigma", "lam", "mu_q", "sigma_q")

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_DENSITY_FLOOR = 1e-300


@dataclass(frozen=True)
class ParamBounds:
    """Box constraints for (mu, sigma, lam, mu_q, sigma_q)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (5,) or hi.shape != (5,):
            raise ValueError("bounds must have 5 entries")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("bounds must be finite")
        if np.any(lo >= hi):
            raise ValueError("each lower bound must be below its upper bound")
        lo, hi = lo.copy(), hi.copy()
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, theta: np.ndarray, atol: float = 0.0) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(
            np.all(theta >= self.lower - atol) and np.all(theta <= self.upper + atol)
        )


def default_bounds(delta_t: float, lambda_cap: float | None = None) -> ParamBounds:
    """Generous calibration box. The intensity is capped at min(lambda_cap,
    1/delta_t) so that the per-step expected jump count never exceeds one."""
    cap = 1.0 / delta_t
    if lambda_cap is not None:
        if lambda_cap <= 0.0:
            raise ValueError("lambda_cap must be positive")
        cap = min(cap, lambda_cap)
    lower = np.array([-2.0, 1e-4, 0.0, -0.5, 1e-6])
    upper = np.array([2.0, 2.0, cap, 0.5, 0.5])
    return ParamBounds(lower=lower, upper=upper)


@dataclass(frozen=True)
class ModelSpec:
    """Model kind, jump cap, step size and calibration box."""

    kind: str = GENERALIZED
    m: int = 5
    delta_t: float = 1.0 / 252.0
    bounds: ParamBounds | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {_KINDS}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.delta_t <= 0.0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        bounds = self.bounds if self.bounds is not None else default_bounds(self.delta_t)
        if bounds.upper[2] > 1.0 / self.delta_t + 1e-12:
            raise ValueError(
                f"lambda upper bound {bounds.upper[2]} exceeds 1/delta_t = {1.0 / self.delta_t}"
            )
        object.__setattr__(self, "bounds", bounds)


@dataclass(frozen=True)
class FitResult:
    params: JumpDiffusionParams
    log_likelihood: float
    converged: bool
    evaluations: int
    history: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.log_likelihood):
            raise ValueError("log_likelihood must be finite")


def _normal_pdf(y, mean, var):
    return np.exp(-0.5 * (y - mean) ** 2 / var) / np.sqrt(2.0 * math.pi * var)


def ball_torous_density(y, params: JumpDiffusionParams, delta_t: float):
    """At-most-one-jump density: Bernoulli(lam dt) mixture of the diffusion
    component and its convolution with one jump."""
    p1 = params.lam * delta_t
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"lam * delta_t = {p1} outside [0, 1]")
    a = (params.mu - 0.5 * params.sigma**2) * delta_t
    s2 = params.sigma**2 * delta_t
    y = np.asarray(y, dtype=float)
    out = (1.0 - p1) * _normal_pdf(y, a, s2) + p1 * _normal_pdf(
        y, a + params.mu_q, s2 + params.sigma_q**2
    )
    return float(out) if out.ndim == 0 else out


def generalized_density(y, params: JumpDiffusionParams, delta_t: float, m: int):
    """Capped multi-jump density: truncated-Poisson weights over components
    N(a + k mu_q, s2 + k sigma_q^2), k = 0..m, tail folded into k = m.

    Valid for lam * delta_t in [0, 1]; the box constraint lam <= 1/delta_t
    means the boundary value must evaluate, so 1 is accepted inclusively.
    """
    lt = params.lam * delta_t
    if not 0.0 <= lt <= 1.0:
        raise ValueError(f"lam * delta_t = {lt} outside [0, 1]")
    w = poisson_weights(lt, m).weights
    a = (params.mu - 0.5 * params.sigma**2) * delta_t
    s2 = params.sigma**2 * delta_t
    k = np.arange(m + 1, dtype=float)
    means = a + k * params.mu_q
    variances = s2 + k * params.sigma_q**2
    y = np.asarray(y, dtype=float)
    dens = _normal_pdf(y[..., None], means, variances) @ w
    return float(dens) if dens.ndim == 0 else dens


def _density(y, params: JumpDiffusionParams, spec: ModelSpec):
    if spec.kind == PURE_DIFFUSION:
        a = (params.mu - 0.5 * params.sigma**2) * spec.delta_t
        return _normal_pdf(np.asarray(y, dtype=float), a, params.sigma**2 * spec.delta_t)
    if spec.kind == BALL_TOROUS:
        return ball_torous_density(y, params, spec.delta_t)
    return generalized_density(y, params, spec.delta_t, spec.m)


def log_likelihood(
    returns: ReturnSeries, params: JumpDiffusionParams, spec: ModelSpec
) -> float:
    """Sum of per-observation log densities, with each density floored at
    1e-300 so the result stays finite (and comparable) across the box."""
    if len(returns) == 0:
        raise ValueError("returns must be nonempty")
    theta = params.as_array()
    if not spec.bounds.contains(theta):
        raise ValueError(f"params {theta} outside the model bounds")
    dens = np.asarray(_density(returns.values, params, spec))
    return float(np.sum(np.log(np.maximum(dens, _DENSITY_FLOOR))))


def negative_log_likelihood_batch(
    y: np.ndarray, population: np.ndarray, spec: ModelSpec
) -> np.ndarray:
    """-log L for each parameter row of ``population`` (shape (v, 5)).

    Vectorized over both candidates and observations; this is the hot path
    the optimizer drives, so no parameter objects are built here.
    """
    pop = np.asarray(population, dtype=float)
    if pop.ndim == 1:
        pop = pop[None, :]
    y = np.asarray(y, dtype=float)
    dt = spec.delta_t
    mu, sigma, lam, mu_q, sigma_q = (pop[:, i] for i in range(5))
    a = (mu - 0.5 * sigma**2) * dt
    s2 = sigma**2 * dt

    if spec.kind == PURE_DIFFUSION:
        dens = _normal_pdf(y[None, :], a[:, None], s2[:, None])
    else:
        if spec.kind == BALL_TOROUS:
            k = np.arange(2, dtype=float)
            p1 = np.clip(lam * dt, 0.0, 1.0)
            w = np.stack([1.0 - p1, p1], axis=1)
        else:
            k = np.arange(spec.m + 1, dtype=float)
            lt = np.clip(lam * dt, 0.0, 1.0)
            # truncated-Poisson weights, tail folded into the last column
            logf = -lt[:, None] + np.outer(np.log(np.maximum(lt, 1e-300)), k[:-1]) - _log_factorials(len(k) - 1)
            w_head = np.exp(logf)
            w = np.concatenate([w_head, np.maximum(0.0, 1.0 - w_head.sum(axis=1))[:, None]], axis=1)
        means = a[:, None] + k[None, :] * mu_q[:, None]          # (v, K)
        variances = s2[:, None] + k[None, :] * sigma_q[:, None] ** 2
        z2 = (y[None, None, :] - means[:, :, None]) ** 2 / variances[:, :, None]
        comp = np.exp(-0.5 * z2) / np.sqrt(2.0 * math.pi * variances[:, :, None])
        dens = np.einsum("vk,vkn->vn", w, comp)
    return -np.sum(np.log(np.maximum(dens, _DENSITY_FLOOR)), axis=1)


def _log_factorials(n: int) -> np.ndarray:
    out = np.zeros(n)
    for i in range(2, n):
        out[i] = out[i - 1] + math.log(i)
    return out


def pure_diffusion_mle_vector(y: np.ndarray, spec: ModelSpec) -> np.ndarray:
    """Closed-form normal MLE mapped back to (mu, sigma): the per-step mean
    is (mu - sigma^2/2) dt and the per-step variance sigma^2 dt. Estimates
    are clamped into the spec's box; jump parameters sit at inert values
    (lam = 0), where every model kind collapses to the same normal."""
    y = np.asarray(y, dtype=float)
    dt = spec.delta_t
    a = float(y.mean())
    s2 = float(np.mean((y - a) ** 2))
    lo, hi = spec.bounds.lower, spec.bounds.upper
    sigma = min(max(math.sqrt(max(s2, 1e-300) / dt), lo[1]), hi[1])
    mu = min(max(a / dt + 0.5 * sigma**2, lo[0]), hi[0])
    lam = max(0.0, lo[2])
    mu_q = min(max(0.0, lo[3]), hi[3])
    sigma_q = min(max(1e-6, lo[4]), hi[4])
    return np.array([mu, sigma, lam, mu_q, sigma_q])


def pure_diffusion_mle(returns: ReturnSeries, spec: ModelSpec) -> FitResult:
    theta = pure_diffusion_mle_vector(returns.values, spec)
    params = JumpDiffusionParams.from_array(theta)
    pure = ModelSpec(kind=PURE_DIFFUSION, m=spec.m, delta_t=spec.delta_t, bounds=spec.bounds)
    ll = log_likelihood(returns, params, pure)
    return FitResult(params=params, log_likelihood=ll, converged=True, evaluations=1)
