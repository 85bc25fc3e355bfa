"""Downside-risk analytics for jump-diffusion return models: exact
semivariance formulas, maximum-likelihood calibration with a memory-stabilized
differential-evolution optimizer, rolling-window time scaling, and a
stochastic-volatility extension estimated by MCMC and evaluated by Monte
Carlo."""

__version__ = "0.1.0"

from .gaussmix import (
    JumpDiffusionParams,
    MixtureComponent,
    PoissonWeights,
    compound_poisson_moments,
    mixture_components,
    mixture_density,
    normal_limit_params,
    poisson_tail_bound,
    poisson_weights,
    std_normal_cdf,
    std_normal_pdf,
)
from .likelihood import (
    BALL_TOROUS,
    GENERALIZED,
    PURE_DIFFUSION,
    FitResult,
    ModelSpec,
    ParamBounds,
    ball_torous_density,
    default_bounds,
    generalized_density,
    log_likelihood,
    pure_diffusion_mle,
)
from .optimize import DEConfig, DEMemory, DEOutcome, de_minimize, push_memory
from .returns import (
    PriceSeries,
    ReturnSeries,
    SampleStats,
    compound_to_prices,
    empirical_semivariance,
    load_prices,
    sample_stats,
    to_log_returns,
)
from .rolling import RollingConfig, RollingRow, lambda_constraint_sweep, roll
from .semivariance import (
    SemivarianceQuery,
    SemivarianceResult,
    jump_diffusion_semivariance,
    normal_semivariance,
    pure_diffusion_semivariance,
    sqrt_time_semideviation,
)

__all__ = [
    "__version__",
    "JumpDiffusionParams",
    "PoissonWeights",
    "MixtureComponent",
    "std_normal_pdf",
    "std_normal_cdf",
    "poisson_weights",
    "poisson_tail_bound",
    "mixture_components",
    "mixture_density",
    "compound_poisson_moments",
    "normal_limit_params",
    "SemivarianceQuery",
    "SemivarianceResult",
    "normal_semivariance",
    "jump_diffusion_semivariance",
    "pure_diffusion_semivariance",
    "sqrt_time_semideviation",
    "PriceSeries",
    "ReturnSeries",
    "SampleStats",
    "load_prices",
    "to_log_returns",
    "compound_to_prices",
    "sample_stats",
    "empirical_semivariance",
    "PURE_DIFFUSION",
    "BALL_TOROUS",
    "GENERALIZED",
    "ModelSpec",
    "ParamBounds",
    "FitResult",
    "default_bounds",
    "ball_torous_density",
    "generalized_density",
    "log_likelihood",
    "pure_diffusion_mle",
    "DEConfig",
    "DEMemory",
    "DEOutcome",
    "de_minimize",
    "push_memory",
    "RollingConfig",
    "RollingRow",
    "roll",
    "lambda_constraint_sweep",
]
