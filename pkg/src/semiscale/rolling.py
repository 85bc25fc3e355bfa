"""Rolling-window risk estimation.

A fixed-length window (252 observations by default) slides over a daily
return series. For each window-ending date the annualized semideviation is
computed by up to three methods:

* ``sqrt_time``        empirical daily semideviation at the threshold,
                       scaled by sqrt(steps per year);
* ``pure_diffusion``   closed-form normal MLE on the window, then the exact
                       one-Gaussian semivariance at a one-year horizon;
* ``jump_diffusion``   capped multi-jump MLE via differential evolution,
                       then the mixture semivariance at a one-year horizon.

Fitting happens on per-step densities at delta_t, so the fitted parameters
are in annual units and the one-year evaluation needs no further scaling.

Stability across dates comes from three mechanisms working together: the
optimizer's initial population is fed the most recent solutions (the
memory), every DE result gets a deterministic Nelder-Mead polish, and the
previous date's solution is kept unless the fresh fit beats it by more than
``switch_tolerance``. The last rule means an unchanged objective reproduces
the previous parameters bit for bit instead of wandering between equal-
likelihood optima.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import Bounds, minimize

from .errors import InputError
from .gaussmix import JumpDiffusionParams
from .likelihood import (
    GENERALIZED,
    ModelSpec,
    default_bounds,
    negative_log_likelihood_batch,
    pure_diffusion_mle,
    pure_diffusion_mle_vector,
)
from .optimize import DEConfig, DEMemory, DEOutcome, de_minimize, push_memory
from .returns import ReturnSeries, empirical_semivariance
from .semivariance import (
    SemivarianceQuery,
    jump_diffusion_semivariance,
    pure_diffusion_semivariance,
    sqrt_time_semideviation,
)

__all__ = [
    "METHOD_SQRT_TIME",
    "METHOD_PURE",
    "METHOD_JUMP",
    "RollingConfig",
    "MethodResult",
    "RollingRow",
    "WindowFitter",
    "roll",
    "lambda_constraint_sweep",
    "rows_to_csv_lines",
]

log = logging.getLogger(__name__)

METHOD_SQRT_TIME = "sqrt_time"
METHOD_PURE = "pure_diffusion"
METHOD_JUMP = "jump_diffusion"
_ALL_METHODS = (METHOD_SQRT_TIME, METHOD_PURE, METHOD_JUMP)


@dataclass(frozen=True)
class RollingConfig:
    window: int = 252
    methods: tuple = _ALL_METHODS
    lambda_cap: float = 252.0
    m: int = 5
    threshold: float = 0.0
    use_memory: bool = True
    memory_capacity: int = 50
    de_population: int = 200
    de_iterations: int = 250
    crossover_prob: float = 0.5
    differential_weight: float = 0.8
    rng_seed: int = 0
    switch_tolerance: float = 1e-8
    polish: bool = True
    threads: int = 1

    def __post_init__(self) -> None:
        if self.window < 30:
            raise ValueError(f"window must be >= 30, got {self.window}")
        bad = [m for m in self.methods if m not in _ALL_METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; expected subset of {_ALL_METHODS}")
        if not self.methods:
            raise ValueError("at least one method required")
        if self.lambda_cap <= 0.0:
            raise ValueError("lambda_cap must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True)
class MethodResult:
    semideviation: float
    params: JumpDiffusionParams | None = None
    log_likelihood: float | None = None
    flagged: bool = False


@dataclass(frozen=True)
class RollingRow:
    date: object
    results: dict = field(default_factory=dict)

    def semideviation(self, method: str) -> float:
        return self.results[method].semideviation


class WindowFitter:
    """Jump-diffusion fitting for one window at a time, with memory.

    Owns the DE memory ring and the per-window seeding: the ring's vectors
    (newest first) plus the window's embedded pure-diffusion MLE, which pins
    the fit's likelihood at or above the nested no-jump model's optimum.
    """

    def __init__(self, spec: ModelSpec, config: RollingConfig):
        self.spec = spec
        self.config = config
        bounds_pairs = tuple(
            (float(lo), float(hi))
            for lo, hi in zip(spec.bounds.lower, spec.bounds.upper)
        )
        self._bounds_pairs = bounds_pairs
        self.memory = DEMemory(bounds=bounds_pairs, capacity=config.memory_capacity)

    def fit(self, y: np.ndarray, window_index: int) -> tuple[np.ndarray, float, DEOutcome]:
        """Return (theta, negative log likelihood, raw DE outcome)."""
        spec = self.spec
        cfg = self.config

        def batch_obj(pop: np.ndarray) -> np.ndarray:
            return negative_log_likelihood_batch(y, pop, spec)

        def scalar_obj(theta: np.ndarray) -> float:
            return float(negative_log_likelihood_batch(y, theta[None, :], spec)[0])

        seeds = self.memory.newest_first() if cfg.use_memory else []
        seeds = seeds + [pure_diffusion_mle_vector(y, spec)]

        seed = _window_seed(cfg.rng_seed, window_index)
        de_config = DEConfig(
            bounds=self._bounds_pairs,
            population_size=cfg.de_population,
            crossover_prob=cfg.crossover_prob,
            differential_weight=cfg.differential_weight,
            max_iterations=cfg.de_iterations,
            rng_seed=seed,
        )
        outcome = de_minimize(batch_obj, de_config, memory=seeds, vectorized=True)
        theta, value = outcome.best_vector, outcome.best_value
        if cfg.polish:
            theta, value = _polish(scalar_obj, theta, value, self._bounds_pairs)

        if cfg.use_memory and len(self.memory):
            incumbent = self.memory.newest_first()[0]
            inc_value = scalar_obj(incumbent)
            if value >= inc_value - cfg.switch_tolerance:
                theta, value = incumbent, inc_value
        if cfg.use_memory:
            self.memory = push_memory(self.memory, theta)
        return theta, value, outcome


def _polish(scalar_obj, theta, value, bounds_pairs):
    lo = np.array([b[0] for b in bounds_pairs])
    hi = np.array([b[1] for b in bounds_pairs])
    res = minimize(
        scalar_obj,
        theta,
        method="Nelder-Mead",
        bounds=Bounds(lo, hi),
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000, "maxfev": 6000},
    )
    if res.fun < value:
        return np.clip(res.x, lo, hi), float(res.fun)
    return theta, value


def _window_seed(base_seed: int, window_index: int) -> int:
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(window_index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def roll(returns: ReturnSeries, config: RollingConfig) -> list[RollingRow]:
    """One row per window-ending date, from index window-1 onward."""
    n = len(returns)
    if n < config.window:
        raise InputError(
            f"series has {n} observations, need at least window = {config.window}"
        )
    delta_t = returns.delta_t
    steps_per_year = max(1, round(1.0 / delta_t))
    bounds = default_bounds(delta_t, lambda_cap=config.lambda_cap)
    spec = ModelSpec(kind=GENERALIZED, m=config.m, delta_t=delta_t, bounds=bounds)
    jump_query = SemivarianceQuery(
        threshold=config.threshold,
        horizon=1.0,
        jump_cap=config.m,
        k_max=config.m * steps_per_year,
    )
    fitter = WindowFitter(spec, config)
    starts = range(0, n - config.window + 1)

    if METHOD_JUMP in config.methods and not config.use_memory and config.threads > 1:
        jump_results = _parallel_jump_fits(returns, config, spec, starts)
    else:
        jump_results = None

    rows: list[RollingRow] = []
    for w, start in enumerate(starts):
        stop = start + config.window
        window = returns.slice(start, stop)
        results: dict[str, MethodResult] = {}
        if METHOD_SQRT_TIME in config.methods:
            daily_sd = math.sqrt(empirical_semivariance(window, config.threshold))
            results[METHOD_SQRT_TIME] = MethodResult(
                semideviation=sqrt_time_semideviation(daily_sd, steps_per_year)
            )
        if METHOD_PURE in config.methods:
            results[METHOD_PURE] = _pure_method(window, spec, config)
        if METHOD_JUMP in config.methods:
            if jump_results is not None:
                results[METHOD_JUMP] = jump_results[w]
            else:
                results[METHOD_JUMP] = _jump_method(
                    window.values, fitter, jump_query, w
                )
        rows.append(RollingRow(date=window.dates[-1], results=results))
    return rows


def _pure_method(window: ReturnSeries, spec: ModelSpec, config: RollingConfig) -> MethodResult:
    fit = pure_diffusion_mle(window, spec)
    res = pure_diffusion_semivariance(
        fit.params.mu, fit.params.sigma, 1.0, config.threshold
    )
    return MethodResult(
        semideviation=res.semideviation,
        params=fit.params,
        log_likelihood=fit.log_likelihood,
    )


def _jump_method(
    y: np.ndarray, fitter: WindowFitter, query: SemivarianceQuery, window_index: int
) -> MethodResult:
    try:
        theta, negll, _ = fitter.fit(y, window_index)
        params = JumpDiffusionParams.from_array(theta)
        res = jump_diffusion_semivariance(params, query)
        return MethodResult(
            semideviation=res.semideviation,
            params=params,
            log_likelihood=-negll,
        )
    except Exception:  # a failed window is flagged, never fatal
        log.exception("jump-diffusion fit failed at window %d", window_index)
        return MethodResult(semideviation=float("nan"), flagged=True)


def _parallel_jump_fits(returns, config, spec, starts) -> list[MethodResult]:
    """Memory-off windows are independent; fan them across threads. Each
    window keeps its own index-derived seed, so the schedule cannot change
    the results."""
    steps_per_year = max(1, round(1.0 / returns.delta_t))
    query = SemivarianceQuery(
        threshold=config.threshold,
        horizon=1.0,
        jump_cap=config.m,
        k_max=config.m * steps_per_year,
    )

    def one(args):
        w, start = args
        fitter = WindowFitter(spec, replace(config, use_memory=False))
        y = returns.values[start : start + config.window]
        return _jump_method(y, fitter, query, w)

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        return list(pool.map(one, enumerate(starts)))


def lambda_constraint_sweep(
    returns: ReturnSeries, caps: list, config: RollingConfig | None = None
) -> dict:
    """Jump-diffusion rolling semideviations under different intensity caps.

    Returns {cap: list[RollingRow]} with identical dates across caps. Caps
    must lie in (0, 1/delta_t].
    """
    config = config or RollingConfig()
    out = {}
    max_cap = 1.0 / returns.delta_t
    for cap in caps:
        if not 0.0 < cap <= max_cap + 1e-9:
            raise InputError(f"cap {cap} outside (0, {max_cap}]")
        cfg = replace(config, lambda_cap=float(cap), methods=(METHOD_JUMP,))
        out[float(cap)] = roll(returns, cfg)
    return out


def rows_to_csv_lines(rows: list[RollingRow]) -> list[str]:
    """Long-format CSV: date,method,semideviation,mu,sigma,lambda,mu_q,sigma_q,loglik."""
    lines = ["date,method,semideviation,mu,sigma,lambda,mu_q,sigma_q,loglik"]
    for row in rows:
        for method, res in row.results.items():
            if res.params is not None:
                p = res.params
                pcols = [
                    f"{p.mu:.17g}",
                    f"{p.sigma:.17g}",
                    f"{p.lam:.17g}",
                    f"{p.mu_q:.17g}",
                    f"{p.sigma_q:.17g}",
                ]
            else:
                pcols = ["", "", "", "", ""]
            ll = "" if res.log_likelihood is None else f"{res.log_likelihood:.17g}"
            sd = "" if math.isnan(res.semideviation) else f"{res.semideviation:.17g}"
            lines.append(
                ",".join([str(row.date), method, sd, *pcols, ll])
            )
    return lines
