"""Gibbs/Metropolis estimation of the stochastic-volatility jump model.

The sampler sweeps the blocks in this order: parameters, per-day jump
counts, per-day jump sizes, then the latent variance path. Conjugate blocks
(drift, the variance-equation regression pair, jump-size law, intensity)
draw from exact full conditionals; the vol-of-vol draw proposes from the
conjugate inverse gamma of the correlation-free model and corrects by
Metropolis; the diffusion correlation uses an independence Metropolis step
proposed around the sample correlation of the standardized Brownian
increments; each variance state moves by random-walk Metropolis over a
checkerboard (even sites given odd, then odd given even), with the step
size adapted toward a 30-50% acceptance rate during burn-in and frozen
afterwards.

Convention notes, which the conditionals below depend on:

* the chain runs on PERCENT returns (input units times 100); the weakly
  informative default priors are calibrated for that scale, and all draws
  are reported in percent units (``ChainOutput.scale`` records the factor);
* jump sizes are stored per jump and shared within a day, so a day with
  count J contributes J * xi to the increment; size priors therefore do not
  depend on the count and the count posterior is exactly
  ``p_k * exp(day log likelihood at J = k)``;
* the variance path carries one leading pre-sample slot, so ``variance[t]``
  with t >= 1 belongs to day t and ``variance[t-1]`` drives day t's noise.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.special import ndtr, ndtri

from ..errors import DegeneracyError, InputError
from ..gaussmix import poisson_weights
from ..returns import ReturnSeries
from .model import (
    SVJJ_PARAM_NAMES,
    ChainOutput,
    DiagnosticBundle,
    PriorSpec,
    SVJJLatentState,
    SVJJParams,
)

__all__ = [
    "init_latent_state",
    "count_from_jump_size",
    "bivariate_loglik",
    "jump_count_posterior",
    "run_mcmc",
    "diagnostics",
    "acf",
]

log = logging.getLogger(__name__)

PERCENT_SCALE = 100.0

_LOG_2PI = math.log(2.0 * math.pi)
_SENTINEL = -1e300
_V_FLOOR = 1e-10
_ROLL_WINDOW = 63


# ---------------------------------------------------------------------------
# likelihood core


def day_loglik(dy, dv, v_prev, jump_y_total, jump_nu_total, p: SVJJParams):
    """Log bivariate normal density of (return, variance) increments for one
    or more days; ``jump_*_total`` are the day totals (count times size).
    Invalid rows (nonpositive driving variance) get a large negative
    sentinel instead of NaN."""
    dy = np.asarray(dy, dtype=float)
    dv = np.asarray(dv, dtype=float)
    v_prev = np.asarray(v_prev, dtype=float)
    one_m_r2 = 1.0 - p.rho**2
    e_y = dy - p.mu - jump_y_total
    e_v = dv - p.kappa * (p.theta - v_prev) - jump_nu_total
    safe_v = np.where(v_prev > 0.0, v_prev, 1.0)
    quad = (
        e_y * e_y - 2.0 * p.rho * e_y * e_v / p.sigma_nu + e_v * e_v / p.sigma_nu**2
    ) / (safe_v * one_m_r2)
    logdet = 2.0 * np.log(safe_v) + 2.0 * math.log(p.sigma_nu) + math.log(one_m_r2)
    ll = -_LOG_2PI - 0.5 * logdet - 0.5 * quad
    out = np.where(v_prev > 0.0, ll, _SENTINEL)
    return float(out) if out.ndim == 0 else out


def bivariate_loglik(t: int, params: SVJJParams, state: SVJJLatentState, dy: np.ndarray) -> float:
    """Day-t log density of (dy_t, dV_t) given the latent state; ``dy`` is
    the percent-unit return array and t is zero-based."""
    v = state.variance
    j = float(state.counts[t])
    return float(
        day_loglik(
            dy[t],
            v[t + 1] - v[t],
            v[t],
            j * state.jump_y[t],
            j * state.jump_nu[t],
            params,
        )
    )


def jump_count_posterior(
    t: int, params: SVJJParams, state: SVJJLatentState, dy: np.ndarray, m: int
) -> np.ndarray:
    """Normalized posterior over the day-t jump count 0..m: truncated
    Poisson weight times the day likelihood at that count."""
    v = state.variance
    dv = v[t + 1] - v[t]
    w = poisson_weights(params.lam, m).weights
    k = np.arange(m + 1, dtype=float)
    ll = day_loglik(
        np.full(m + 1, dy[t]),
        np.full(m + 1, dv),
        np.full(m + 1, v[t]),
        k * state.jump_y[t],
        k * state.jump_nu[t],
        params,
    )
    with np.errstate(divide="ignore"):
        logw = np.log(w) + ll
    logw -= logw.max()
    out = np.exp(logw)
    return out / out.sum()


# ---------------------------------------------------------------------------
# initialization


def count_from_jump_size(size: float, mu_nu: float, m: int) -> int:
    """Most plausible jump count for an observed variance-jump total: the k
    in 1..m whose k-fold exponential convolution (gamma with shape k, scale
    mu_nu) has the highest density there. Ties go to the smaller count."""
    if size <= 0.0 or mu_nu <= 0.0:
        return 1
    k = np.arange(1, m + 1, dtype=float)
    logpdf = (
        (k - 1.0) * math.log(size)
        - size / mu_nu
        - k * math.log(mu_nu)
        - np.array([math.lgamma(v) for v in k])
    )
    # analytic ties (e.g. at integer multiples of the mean) must not flip on
    # rounding noise: take the smallest count within tolerance of the peak
    best = float(logpdf.max())
    return int(np.flatnonzero(logpdf >= best - 1e-9)[0]) + 1


def _rolling_variance(x: np.ndarray, window: int) -> np.ndarray:
    """Trailing-window variance, backfilled over the warm-up span."""
    n = len(x)
    out = np.empty(n)
    first_full = min(window, n) - 1
    for t in range(first_full, n):
        seg = x[t - first_full : t + 1] if t < window else x[t - window + 1 : t + 1]
        out[t] = np.var(seg)
    out[:first_full] = out[first_full]
    return out


def init_latent_state(
    returns: ReturnSeries, m: int = 5
) -> tuple[SVJJLatentState, SVJJParams]:
    """Deterministic starting point for the chain.

    The variance path comes from a 63-day trailing variance of the percent
    returns. Jump days are where the return sits more than 2.57 trimmed
    standard deviations from the trimmed mean (the two-sided 1% band of a
    normal); on those days the observed return and variance increment are
    taken as the day's jump totals, and the count is the gamma-density
    argmax over 1..m. The intensity starts at the jump-day ratio.
    """
    T = len(returns)
    if T < 90:
        raise InputError(f"need at least 90 observations, got {T}")
    dy = returns.values * PERCENT_SCALE

    rv = np.maximum(_rolling_variance(dy, _ROLL_WINDOW), 1e-8)
    variance = np.empty(T + 1)
    variance[0] = rv[0]
    variance[1:] = rv

    m1, s1 = float(dy.mean()), float(dy.std())
    degenerate = float(np.ptp(dy)) == 0.0 or s1 < 1e-12 * (1.0 + abs(m1))
    if degenerate:
        jump_mask = np.zeros(T, dtype=bool)
        log.warning("init_latent_state: zero-variance series, no jumps detectable")
        m2, s2 = m1, s1
    else:
        trimmed = dy[np.abs(dy - m1) <= 5.0 * s1]
        m2, s2 = float(trimmed.mean()), float(trimmed.std())
        if s2 == 0.0:
            m2, s2 = m1, s1
        jump_mask = np.abs(dy - m2) > 2.57 * s2

    counts = np.zeros(T, dtype=np.int64)
    jump_y = np.zeros(T)
    jump_nu = np.zeros(T)
    dv = np.diff(variance)
    jump_idx = np.flatnonzero(jump_mask)
    pos_inc = np.maximum(dv[jump_idx], 0.0) if jump_idx.size else np.empty(0)
    mu_nu0 = float(pos_inc[pos_inc > 0.0].mean()) if np.any(pos_inc > 0.0) else 0.1 * float(
        np.median(variance)
    )
    mu_nu0 = max(mu_nu0, 1e-6)
    for t in jump_idx:
        obs_nu = max(dv[t], 1e-8)
        k = count_from_jump_size(obs_nu, mu_nu0, m)
        counts[t] = k
        jump_nu[t] = obs_nu / k
        jump_y[t] = dy[t] / k
    jump_nu[~jump_mask] = mu_nu0

    theta0 = max(float(variance.mean()), 1e-8)
    v_prev = variance[:-1]
    slope = (
        float(np.cov(v_prev, dv, ddof=0)[0, 1] / np.var(v_prev))
        if np.var(v_prev) > 0.0
        else -0.2
    )
    kappa0 = float(np.clip(-slope, 0.05, 1.5))
    resid = dv - kappa0 * (theta0 - v_prev)
    sigma_nu0 = float(np.clip(np.std(resid / np.sqrt(v_prev)), 1e-3, 5.0))
    n_jump = int(jump_mask.sum())
    lam0 = float(np.clip(n_jump / T, 1e-4, 0.5))
    if n_jump:
        mu_y0 = float(dy[jump_mask].mean())
        sigma_y0 = float(max(dy[jump_mask].std(), 0.25 * s1 if s1 > 0 else 1e-3))
    else:
        mu_y0 = 0.0
        sigma_y0 = max(s1, 1e-3)
    params = SVJJParams(
        mu=m2,
        kappa=kappa0,
        theta=theta0,
        rho=0.0,
        sigma_nu=sigma_nu0,
        mu_y=mu_y0,
        sigma_y=sigma_y0,
        rho_j=0.0,
        mu_nu=mu_nu0,
        lam=lam0,
    )
    state = SVJJLatentState(
        variance=variance,
        counts=counts,
        jump_y=jump_y,
        jump_nu=jump_nu,
        degenerate=degenerate,
    )
    return state, params


# ---------------------------------------------------------------------------
# conjugate full-conditional hyperparameters (pure, unit-testable)


def mu_conditional(dy, v_prev, e_v, jump_y_total, p, priors: PriorSpec):
    """Normal full conditional of the drift given the variance residuals."""
    cond_var = v_prev * (1.0 - p.rho**2)
    obs = dy - jump_y_total - (p.rho / p.sigma_nu) * e_v
    prec = np.sum(1.0 / cond_var) + 1.0 / priors.mu[1]
    mean = (np.sum(obs / cond_var) + priors.mu[0] / priors.mu[1]) / prec
    return float(mean), float(1.0 / prec)


def kappa_theta_conditional(dv, v_prev, e_y, jump_nu_total, p, priors: PriorSpec):
    """Normal full conditional of the variance-regression pair
    (c0, c1) = (kappa*theta, -kappa); returns (mean vector, covariance)."""
    z = dv - jump_nu_total - p.rho * p.sigma_nu * e_y
    w = 1.0 / (p.sigma_nu**2 * (1.0 - p.rho**2) * v_prev)
    x0 = np.sum(w)
    x1 = np.sum(w * v_prev)
    x2 = np.sum(w * v_prev**2)
    a = np.array(
        [
            [x0 + 1.0 / priors.theta[1], x1],
            [x1, x2 + 1.0 / priors.kappa[1]],
        ]
    )
    rhs = np.array(
        [
            np.sum(w * z) + priors.theta[0] / priors.theta[1],
            np.sum(w * z * v_prev) - priors.kappa[0] / priors.kappa[1],
        ]
    )
    cov = np.linalg.inv(a)
    return cov @ rhs, cov


def sigma_nu_sq_proposal(e_v, v_prev, priors: PriorSpec):
    """Inverse-gamma (shape, scale) fitted to the correlation-free model;
    exact conditional at rho = 0, Metropolis proposal otherwise."""
    shape = priors.sigma_nu_sq[0] + 0.5 * len(e_v)
    scale = priors.sigma_nu_sq[1] + 0.5 * float(np.sum(e_v * e_v / v_prev))
    return shape, scale


def mu_y_conditional(jump_y, jump_nu, p, priors: PriorSpec):
    obs = jump_y - p.rho_j * jump_nu
    prec = len(obs) / p.sigma_y**2 + 1.0 / priors.mu_y[1]
    mean = (np.sum(obs) / p.sigma_y**2 + priors.mu_y[0] / priors.mu_y[1]) / prec
    return float(mean), float(1.0 / prec)


def rho_j_conditional(jump_y, jump_nu, p, priors: PriorSpec):
    resid = jump_y - p.mu_y
    prec = np.sum(jump_nu**2) / p.sigma_y**2 + 1.0 / priors.rho_j[1]
    mean = (np.sum(jump_nu * resid) / p.sigma_y**2 + priors.rho_j[0] / priors.rho_j[1]) / prec
    return float(mean), float(1.0 / prec)


def sigma_y_sq_conditional(jump_y, jump_nu, p, priors: PriorSpec):
    dev = jump_y - p.mu_y - p.rho_j * jump_nu
    shape = priors.sigma_y_sq[0] + 0.5 * len(dev)
    scale = priors.sigma_y_sq[1] + 0.5 * float(np.sum(dev * dev))
    return shape, scale


def mu_nu_conditional(jump_nu, priors: PriorSpec):
    """Inverse-gamma (shape, scale) on the exponential mean: the stated
    gamma prior applies to the rate, which is what makes this conjugate."""
    shape = priors.mu_nu[0] + len(jump_nu)
    scale = priors.mu_nu[1] + float(np.sum(jump_nu))
    return shape, scale


def lam_conditional(counts, priors: PriorSpec):
    """Beta(a + jump days, b + quiet days); a success is any day with at
    least one jump."""
    n_jump = int(np.sum(counts >= 1))
    return priors.lam[0] + n_jump, priors.lam[1] + (len(counts) - n_jump)


def draw_inverse_gamma(rng: np.random.Generator, shape: float, scale: float, size=None):
    return scale / rng.gamma(shape, 1.0, size=size)


def draw_truncated_normal_nonneg(rng, mean, sd, size=None):
    """N(mean, sd^2) conditioned on the nonnegative half line, by inverse
    transform; stable far into either tail."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    lo = ndtr(-mean / sd)
    u = lo + (1.0 - lo) * rng.random(size if size is not None else mean.shape)
    u = np.clip(u, 1e-16, 1.0 - 1e-16)
    return np.maximum(mean + sd * ndtri(u), 0.0)


# ---------------------------------------------------------------------------
# Metropolis blocks


def _loglik_sigma_rho(e_y, e_v, v_prev, sigma_nu_sq, rho):
    """Log likelihood terms depending on (sigma_nu^2, rho): the conditional
    law of the variance residual given the return residual."""
    cond_var = sigma_nu_sq * (1.0 - rho**2) * v_prev
    dev = e_v - rho * math.sqrt(sigma_nu_sq) * e_y
    return float(-0.5 * np.sum(np.log(cond_var)) - 0.5 * np.sum(dev * dev / cond_var))


def _metropolis_sigma_nu_sq(rng, e_y, e_v, v_prev, p, priors):
    shape, scale = sigma_nu_sq_proposal(e_v, v_prev, priors)
    cur = p.sigma_nu**2
    prop = float(draw_inverse_gamma(rng, shape, scale))
    a0, b0 = priors.sigma_nu_sq

    def log_target(s2):
        return (
            _loglik_sigma_rho(e_y, e_v, v_prev, s2, p.rho)
            - (a0 + 1.0) * math.log(s2)
            - b0 / s2
        )

    def log_prop(s2):
        return -(shape + 1.0) * math.log(s2) - scale / s2

    log_alpha = log_target(prop) - log_target(cur) + log_prop(cur) - log_prop(prop)
    if math.log(rng.random()) < log_alpha:
        return prop, True
    return cur, False


def _metropolis_rho(rng, e_y, e_v, v_prev, p, priors):
    s2 = p.sigma_nu**2
    eps_y = e_y / np.sqrt(v_prev)
    eps_v = e_v / (p.sigma_nu * np.sqrt(v_prev))
    r_hat = float(np.corrcoef(eps_y, eps_v)[0, 1])
    if not math.isfinite(r_hat):
        r_hat = 0.0
    r_hat = min(max(r_hat, -0.995), 0.995)
    width = max(1.5 * (1.0 - r_hat**2) / math.sqrt(len(e_y)), 0.02)
    prop = float(rng.normal(r_hat, width))
    lo, hi = priors.rho
    if not (lo < prop < hi) or abs(prop) >= 0.999:
        return p.rho, False

    def log_target(r):
        return _loglik_sigma_rho(e_y, e_v, v_prev, s2, r)

    def log_prop(r):
        return -0.5 * ((r - r_hat) / width) ** 2

    log_alpha = log_target(prop) - log_target(p.rho) + log_prop(p.rho) - log_prop(prop)
    if math.log(rng.random()) < log_alpha:
        return prop, True
    return p.rho, False


def _v_group_update(rng, dy, v, counts, jump_y, jump_nu, p, step, sites):
    """Random-walk Metropolis on the variance sites in ``sites`` (mutates
    ``v``); neighbors must not be in the group. Returns (accepted, attempted)."""
    T = len(dy)
    n = len(sites)
    if n == 0:
        return 0, 0
    prop = v[sites] + step * rng.standard_normal(n)
    delta = np.zeros(n)
    valid = prop > _V_FLOOR

    jy_tot = counts * jump_y
    jn_tot = counts * jump_nu

    left = sites >= 1  # day index s-1: site enters as the new variance level
    if np.any(left):
        s = sites[left]
        d = s - 1
        cur = day_loglik(dy[d], v[s] - v[s - 1], v[s - 1], jy_tot[d], jn_tot[d], p)
        new = day_loglik(dy[d], prop[left] - v[s - 1], v[s - 1], jy_tot[d], jn_tot[d], p)
        delta[left] += new - cur

    right = sites <= T - 1  # day index s: site drives the next increment
    if np.any(right):
        s = sites[right]
        d = s
        cur = day_loglik(dy[d], v[s + 1] - v[s], v[s], jy_tot[d], jn_tot[d], p)
        new = day_loglik(dy[d], v[s + 1] - prop[right], prop[right], jy_tot[d], jn_tot[d], p)
        delta[right] += new - cur

    accept = valid & (np.log(rng.random(n)) < delta)
    v[sites[accept]] = prop[accept]
    return int(accept.sum()), n


# ---------------------------------------------------------------------------
# main sweep


def run_mcmc(
    returns: ReturnSeries,
    priors: PriorSpec | None = None,
    iterations: int = 20000,
    burn_in: int = 5000,
    m: int = 5,
    rng_seed: int = 0,
    thin: int = 10,
) -> ChainOutput:
    """Run one chain and return every post-burn-in parameter draw plus
    thinned latent states. Non-convergence is a matter for the diagnostics,
    not an error; numerically degenerate days raise DegeneracyError."""
    if burn_in < 0 or iterations <= burn_in:
        raise ValueError("need iterations > burn_in >= 0")
    if thin < 1:
        raise ValueError("thin must be >= 1")
    priors = priors or PriorSpec()
    dy = returns.values * PERCENT_SCALE
    T = len(dy)
    state, p = init_latent_state(returns, m)
    if state.degenerate:
        raise DegeneracyError("zero-variance input series")
    rng = np.random.Generator(np.random.PCG64(rng_seed))

    v = state.variance.copy()
    counts = state.counts.copy()
    jump_y = state.jump_y.copy()
    jump_nu = state.jump_nu.copy()

    step = max(0.5 * float(np.median(v)), 1e-6)
    evens = np.arange(0, T + 1, 2)
    odds = np.arange(1, T + 1, 2)

    kept = iterations - burn_in
    draws = {name: np.empty(kept) for name in SVJJ_PARAM_NAMES}
    n_latent = (kept + thin - 1) // thin
    latent = {
        "variance": np.empty((n_latent, T + 1)),
        "counts": np.empty((n_latent, T), dtype=np.int8),
        "jump_y": np.empty((n_latent, T), dtype=np.float32),
        "jump_nu": np.empty((n_latent, T), dtype=np.float32),
    }
    acc = {"variance": 0, "rho": 0, "sigma_nu_sq": 0}
    att = {"variance": 0, "rho": 0, "sigma_nu_sq": 0}
    window_acc, window_att = 0, 0

    k_grid = np.arange(m + 1, dtype=float)

    for it in range(iterations):
        v_prev = v[:-1]
        dv = np.diff(v)
        jy_tot = counts * jump_y
        jn_tot = counts * jump_nu

        # drift
        e_v = dv - p.kappa * (p.theta - v_prev) - jn_tot
        mean, var = mu_conditional(dy, v_prev, e_v, jy_tot, p, priors)
        p = _with(p, mu=float(rng.normal(mean, math.sqrt(var))))

        # variance-equation regression pair
        e_y = dy - p.mu - jy_tot
        mean2, cov2 = kappa_theta_conditional(dv, v_prev, e_y, jn_tot, p, priors)
        chol = np.linalg.cholesky(cov2)
        for _ in range(100):
            c0, c1 = mean2 + chol @ rng.standard_normal(2)
            kappa, theta = -c1, None
            if 1e-4 < kappa < 2.0:
                theta = c0 / kappa
                if theta > 1e-8:
                    p = _with(p, kappa=float(kappa), theta=float(theta))
                    break
        # vol of vol
        e_v = dv - p.kappa * (p.theta - v_prev) - jn_tot
        s2, ok = _metropolis_sigma_nu_sq(rng, e_y, e_v, v_prev, p, priors)
        p = _with(p, sigma_nu=math.sqrt(s2))
        acc["sigma_nu_sq"] += ok
        att["sigma_nu_sq"] += 1

        # diffusion correlation
        rho, ok = _metropolis_rho(rng, e_y, e_v, v_prev, p, priors)
        p = _with(p, rho=rho)
        acc["rho"] += ok
        att["rho"] += 1

        # jump-size law
        mean, var = mu_y_conditional(jump_y, jump_nu, p, priors)
        p = _with(p, mu_y=float(rng.normal(mean, math.sqrt(var))))
        mean, var = rho_j_conditional(jump_y, jump_nu, p, priors)
        p = _with(p, rho_j=float(rng.normal(mean, math.sqrt(var))))
        shape, scale = sigma_y_sq_conditional(jump_y, jump_nu, p, priors)
        p = _with(p, sigma_y=math.sqrt(float(draw_inverse_gamma(rng, shape, scale))))
        shape, scale = mu_nu_conditional(jump_nu, priors)
        p = _with(p, mu_nu=float(draw_inverse_gamma(rng, shape, scale)))

        # intensity
        a_lam, b_lam = lam_conditional(counts, priors)
        p = _with(p, lam=min(float(rng.beta(a_lam, b_lam)), 1.0 - 1e-12))

        # jump counts, all days at once
        w = poisson_weights(p.lam, m).weights
        with np.errstate(divide="ignore"):
            logw = np.log(w)
        ll_k = np.empty((T, m + 1))
        for k in range(m + 1):
            ll_k[:, k] = day_loglik(
                dy, dv, v_prev, k_grid[k] * jump_y, k_grid[k] * jump_nu, p
            )
        logpost = logw[None, :] + ll_k
        logpost -= logpost.max(axis=1, keepdims=True)
        post = np.exp(logpost)
        post /= post.sum(axis=1, keepdims=True)
        u = rng.random(T)
        counts = (np.cumsum(post, axis=1) < u[:, None]).sum(axis=1)
        counts = np.minimum(counts, m).astype(np.int64)

        # jump sizes
        jump_idx = np.flatnonzero(counts >= 1)
        quiet_idx = np.flatnonzero(counts == 0)
        jump_nu[quiet_idx] = rng.exponential(p.mu_nu, size=quiet_idx.size)
        jump_y[quiet_idx] = rng.normal(
            p.mu_y + p.rho_j * jump_nu[quiet_idx], p.sigma_y
        )
        if jump_idx.size:
            kk = counts[jump_idx].astype(float)
            vp = v_prev[jump_idx]
            one_m_r2 = 1.0 - p.rho**2
            p11 = 1.0 / (vp * one_m_r2)
            p12 = -p.rho / (p.sigma_nu * vp * one_m_r2)
            p22 = 1.0 / (p.sigma_nu**2 * vp * one_m_r2)
            r_y = dy[jump_idx] - p.mu
            r_v = dv[jump_idx] - p.kappa * (p.theta - vp)
            # variance jump size (truncated normal on the half line)
            e_y_j = r_y - kk * jump_y[jump_idx]
            a_coef = kk**2 * p22 + p.rho_j**2 / p.sigma_y**2
            b_coef = (
                kk * (p22 * r_v + p12 * e_y_j)
                + p.rho_j * (jump_y[jump_idx] - p.mu_y) / p.sigma_y**2
                - 1.0 / p.mu_nu
            )
            jump_nu[jump_idx] = draw_truncated_normal_nonneg(
                rng, b_coef / a_coef, np.sqrt(1.0 / a_coef)
            )
            # return jump size (normal)
            e_v_j = r_v - kk * jump_nu[jump_idx]
            a_coef = kk**2 * p11 + 1.0 / p.sigma_y**2
            b_coef = (
                kk * (p11 * r_y + p12 * e_v_j)
                + (p.mu_y + p.rho_j * jump_nu[jump_idx]) / p.sigma_y**2
            )
            jump_y[jump_idx] = rng.normal(b_coef / a_coef, np.sqrt(1.0 / a_coef))

        # variance path
        na, nt = _v_group_update(rng, dy, v, counts, jump_y, jump_nu, p, step, evens)
        acc["variance"] += na
        att["variance"] += nt
        window_acc += na
        window_att += nt
        na, nt = _v_group_update(rng, dy, v, counts, jump_y, jump_nu, p, step, odds)
        acc["variance"] += na
        att["variance"] += nt
        window_acc += na
        window_att += nt

        if it < burn_in and (it + 1) % 100 == 0 and window_att:
            rate = window_acc / window_att
            if rate < 0.30:
                step *= 0.85
            elif rate > 0.50:
                step *= 1.15
            window_acc, window_att = 0, 0

        if not math.isfinite(p.mu + p.theta + p.kappa + p.sigma_nu):
            raise DegeneracyError(f"non-finite parameter state at iteration {it}")

        if it >= burn_in:
            g = it - burn_in
            for name in SVJJ_PARAM_NAMES:
                draws[name][g] = getattr(p, name)
            if g % thin == 0:
                gi = g // thin
                latent["variance"][gi] = v
                latent["counts"][gi] = counts
                latent["jump_y"][gi] = jump_y
                latent["jump_nu"][gi] = jump_nu

    posterior_mean = {k: float(x.mean()) for k, x in draws.items()}
    posterior_std = {k: float(x.std(ddof=1)) for k, x in draws.items()}
    acceptance = {k: (acc[k] / att[k] if att[k] else 0.0) for k in acc}
    return ChainOutput(
        draws=draws,
        latent_draws=latent,
        posterior_mean=posterior_mean,
        posterior_std=posterior_std,
        acceptance=acceptance,
        iterations=iterations,
        burn_in=burn_in,
        thin=thin,
        seed=rng_seed,
        priors=priors,
        scale=PERCENT_SCALE,
        m=m,
    )


def _with(p: SVJJParams, **kw) -> SVJJParams:
    d = p.as_dict()
    d.update(kw)
    return SVJJParams(**d)


# ---------------------------------------------------------------------------
# diagnostics


def acf(x: np.ndarray, max_lag: int = 50) -> np.ndarray:
    """Autocorrelation at lags 0..max_lag; a constant series reports 1 at
    every lag (flagging non-mixing is the caller's business)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    dev = x - x.mean()
    denom = float(np.sum(dev * dev))
    out = np.empty(min(max_lag, n - 1) + 1)
    if denom == 0.0 or float(np.ptp(x)) == 0.0:
        out[:] = 1.0
        return out
    for lag in range(len(out)):
        out[lag] = float(np.sum(dev[: n - lag] * dev[lag:]) / denom)
    return out


def diagnostics(
    chain: ChainOutput,
    returns: ReturnSeries,
    state: SVJJLatentState | None = None,
    max_lag: int = 50,
) -> DiagnosticBundle:
    """Trace views, chain autocorrelations, and standardized residuals
    (return increment minus drift and jump part, over sqrt of the driving
    variance) evaluated at posterior means. Constant chains are flagged as
    non-mixing."""
    dy = returns.values * chain.scale
    T = len(dy)
    acfs = {name: acf(x, max_lag) for name, x in chain.draws.items()}
    non_mixing = tuple(
        name for name, x in chain.draws.items() if float(np.ptp(x)) == 0.0
    )
    if state is not None:
        v_mean = state.variance
        jump_part = state.counts * state.jump_y
    else:
        v_mean = chain.latent_draws["variance"].mean(axis=0)
        jump_part = (
            chain.latent_draws["counts"].astype(float) * chain.latent_draws["jump_y"]
        ).mean(axis=0)
    mu_hat = chain.posterior_mean["mu"]
    resid = (dy - mu_hat - jump_part) / np.sqrt(np.maximum(v_mean[:-1], 1e-12))
    order = np.argsort(resid)
    theoretical = ndtri((np.arange(1, T + 1) - 0.5) / T)
    return DiagnosticBundle(
        traces=chain.draws,
        acf=acfs,
        residuals=resid,
        residual_mean=float(resid.mean()),
        residual_var=float(resid.var(ddof=1)),
        qq_theoretical=theoretical,
        qq_sample=resid[order],
        non_mixing=non_mixing,
    )
