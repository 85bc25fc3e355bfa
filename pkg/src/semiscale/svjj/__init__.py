"""Stochastic-volatility model with correlated jumps in returns and
variance: Bayesian estimation (mcmc) and forward Monte Carlo (simulate)."""

from .model import ChainOutput, DiagnosticBundle, PriorSpec, SVJJLatentState, SVJJParams
from .mcmc import (
    bivariate_loglik,
    diagnostics,
    init_latent_state,
    jump_count_posterior,
    run_mcmc,
)
from .simulate import (
    DensityEstimate,
    SimulationConfig,
    euler_step,
    kde,
    semivariance_from_density,
    simulate_daily_path,
    simulate_horizon_return,
    simulate_horizon_sample,
    simulate_jump_times,
)

__all__ = [
    "SVJJParams",
    "SVJJLatentState",
    "PriorSpec",
    "ChainOutput",
    "DiagnosticBundle",
    "init_latent_state",
    "bivariate_loglik",
    "jump_count_posterior",
    "run_mcmc",
    "diagnostics",
    "SimulationConfig",
    "DensityEstimate",
    "simulate_jump_times",
    "euler_step",
    "simulate_horizon_return",
    "simulate_horizon_sample",
    "simulate_daily_path",
    "kde",
    "semivariance_from_density",
]
