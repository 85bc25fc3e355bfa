"""Stochastic-volatility model with contemporaneous jumps in returns and
variance, discretized daily:

    dY_t = mu dt + sqrt(V_t) dW1            + xi_y dN
    dV_t = kappa (theta - V_t) dt
           + sigma_nu sqrt(V_t) (rho dW1 + sqrt(1-rho^2) dW2) + xi_nu dN

The jump counter N has daily intensity ``lam``; a variance jump is
exponential with mean ``mu_nu`` and the paired return jump is
N(mu_y + rho_j * xi_nu, sigma_y^2). All parameters are per-day quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SVJJParams", "SVJJLatentState", "PriorSpec", "ChainOutput", "DiagnosticBundle"]

SVJJ_PARAM_NAMES = (
    "mu",
    "kappa",
    "theta",
    "rho",
    "sigma_nu",
    "mu_y",
    "sigma_y",
    "rho_j",
    "mu_nu",
    "lam",
)


@dataclass(frozen=True)
class SVJJParams:
    mu: float
    kappa: float
    theta: float
    rho: float
    sigma_nu: float
    mu_y: float
    sigma_y: float
    rho_j: float
    mu_nu: float
    lam: float

    def __post_init__(self) -> None:
        for name in ("kappa", "theta", "sigma_nu", "sigma_y", "mu_nu"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must be inside (-1, 1), got {self.rho}")
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"lam must be in [0, 1), got {self.lam}")
        vals = [getattr(self, n) for n in SVJJ_PARAM_NAMES]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite parameter in {vals}")

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in SVJJ_PARAM_NAMES}

    @staticmethod
    def from_dict(d: dict) -> "SVJJParams":
        return SVJJParams(**{n: float(d[n]) for n in SVJJ_PARAM_NAMES})


@dataclass
class SVJJLatentState:
    """Per-day latent variables.

    ``variance`` has one extra leading slot (the pre-sample level), so
    ``variance[t-1]`` is the variance driving day t's increments. ``counts``
    holds the jump count per day; ``jump_y``/``jump_nu`` hold the per-jump
    sizes shared by that day's jumps, so a day's total jump contribution is
    count * size.
    """

    variance: np.ndarray
    counts: np.ndarray
    jump_y: np.ndarray
    jump_nu: np.ndarray
    degenerate: bool = False

    def __post_init__(self) -> None:
        t = len(self.counts)
        if len(self.variance) != t + 1:
            raise ValueError("variance must have one more entry than counts")
        if len(self.jump_y) != t or len(self.jump_nu) != t:
            raise ValueError("jump size arrays must match counts in length")
        if np.any(self.variance < 0.0):
            raise ValueError("variance path must be nonnegative")
        if np.any(self.jump_nu < 0.0):
            raise ValueError("variance jump sizes must be nonnegative")

    def copy(self) -> "SVJJLatentState":
        return SVJJLatentState(
            variance=self.variance.copy(),
            counts=self.counts.copy(),
            jump_y=self.jump_y.copy(),
            jump_nu=self.jump_nu.copy(),
            degenerate=self.degenerate,
        )


@dataclass(frozen=True)
class PriorSpec:
    """Prior hyperparameters, weakly informative on percent-unit returns.

    Conventions: normal entries are (mean, variance); inverse-gamma entries
    are (shape, scale) on the variance parameter itself; ``mu_nu`` is
    (shape, rate) on the inverse mean jump size, making the exponential
    block conjugate; ``lam`` is a Beta(a, b). The ``theta`` entry is applied
    to the level term kappa*theta of the variance regression, which is what
    keeps the joint (kappa, theta) update conjugate.
    """

    mu: tuple = (0.0, 1.0)
    kappa: tuple = (0.0, 1.0)
    theta: tuple = (0.0, 1.0)
    rho: tuple = (-1.0, 1.0)
    sigma_nu_sq: tuple = (2.5, 0.1)
    mu_y: tuple = (0.0, 100.0)
    rho_j: tuple = (0.0, 1.0)
    sigma_y_sq: tuple = (5.0, 20.0)
    mu_nu: tuple = (20.0, 10.0)
    lam: tuple = (2.0, 40.0)

    def __post_init__(self) -> None:
        for name in ("mu", "kappa", "theta", "mu_y", "rho_j"):
            if getattr(self, name)[1] <= 0.0:
                raise ValueError(f"prior variance for {name} must be positive")
        for name in ("sigma_nu_sq", "sigma_y_sq", "mu_nu", "lam"):
            a, b = getattr(self, name)
            if a <= 0.0 or b <= 0.0:
                raise ValueError(f"prior hyperparameters for {name} must be positive")
        if self.rho[0] >= self.rho[1]:
            raise ValueError("rho prior interval is empty")

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "kappa": self.kappa,
            "theta": self.theta,
            "rho": self.rho,
            "sigma_nu_sq": self.sigma_nu_sq,
            "mu_y": self.mu_y,
            "rho_j": self.rho_j,
            "sigma_y_sq": self.sigma_y_sq,
            "mu_nu": self.mu_nu,
            "lam": self.lam,
        }


@dataclass
class ChainOutput:
    """Stored draws and summaries from one chain.

    Parameter draws cover every post-burn-in iteration; latent states are
    thinned. ``scale`` records the return multiplier applied before
    estimation (100 = the chain ran on percent returns), so downstream
    consumers can convert.
    """

    draws: dict
    latent_draws: dict
    posterior_mean: dict
    posterior_std: dict
    acceptance: dict
    iterations: int
    burn_in: int
    thin: int
    seed: int
    priors: PriorSpec
    scale: float = 100.0
    m: int = 5

    def param_names(self) -> tuple:
        return tuple(self.draws.keys())

    def mean_params(self) -> SVJJParams:
        return SVJJParams.from_dict(self.posterior_mean)

    def credible_interval(self, name: str, level: float = 0.95) -> tuple:
        x = np.sort(self.draws[name])
        alpha = 0.5 * (1.0 - level)
        lo = x[int(alpha * (len(x) - 1))]
        hi = x[int((1.0 - alpha) * (len(x) - 1))]
        return float(lo), float(hi)


@dataclass
class DiagnosticBundle:
    traces: dict
    acf: dict
    residuals: np.ndarray
    residual_mean: float
    residual_var: float
    qq_theoretical: np.ndarray
    qq_sample: np.ndarray
    non_mixing: tuple = ()

    def acf_lags(self) -> np.ndarray:
        any_key = next(iter(self.acf))
        return np.arange(len(self.acf[any_key]))
