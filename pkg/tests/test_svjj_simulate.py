"""Forward simulation, kernel density estimation, and the quadrature route
to a semideviation."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from semiscale.errors import QuadratureError
from semiscale.gaussmix import JumpDiffusionParams
from semiscale.semivariance import SemivarianceQuery, jump_diffusion_semivariance
from semiscale.svjj import (
    DensityEstimate,
    SimulationConfig,
    SVJJParams,
    euler_step,
    kde,
    semivariance_from_density,
    simulate_daily_path,
    simulate_horizon_return,
    simulate_horizon_sample,
    simulate_jump_times,
)

CALM = SVJJParams(
    mu=4e-4, kappa=0.9, theta=4e-5, rho=0.0, sigma_nu=1e-12,
    mu_y=0.0, sigma_y=1e-12, rho_j=0.0, mu_nu=1e-14, lam=1e-12,
)


class TestJumpTimes:
    def test_zero_rate_always_empty(self, rng):
        for _ in range(100):
            assert simulate_jump_times(0.0, 5.0, rng).size == 0

    def test_count_moments(self, rng):
        lam, tau, n = 6.0, 1.0, 100_000
        counts = np.array([simulate_jump_times(lam, tau, rng).size for _ in range(n)])
        se_mean = counts.std(ddof=1) / math.sqrt(n)
        assert counts.mean() == pytest.approx(lam * tau, abs=4 * se_mean)
        se_var = np.std((counts - counts.mean()) ** 2, ddof=1) / math.sqrt(n)
        assert counts.var(ddof=1) == pytest.approx(lam * tau, abs=4 * se_var)

    def test_sorted_within_horizon(self, rng):
        times = simulate_jump_times(50.0, 2.0, rng)
        assert np.all(np.diff(times) >= 0)
        assert times.min() > 0 and times.max() <= 2.0


class TestEulerStep:
    def test_negative_variance_truncated(self):
        p = SVJJParams(mu=0.0, kappa=0.5, theta=0.2, rho=0.0, sigma_nu=0.3,
                       mu_y=0.0, sigma_y=1.0, rho_j=0.0, mu_nu=0.1, lam=0.1)
        y1, v1 = euler_step(0.0, -0.05, p, 1.0, 3.0, -2.0)
        assert y1 == 0.0  # diffusion term vanished with truncated variance
        assert v1 == pytest.approx(-0.05 + 0.5 * 0.2)

    def test_fixed_point_without_vol_noise(self):
        p = SVJJParams(mu=0.1, kappa=0.7, theta=0.2, rho=0.0, sigma_nu=1e-300,
                       mu_y=0.0, sigma_y=1.0, rho_j=0.0, mu_nu=0.1, lam=0.1)
        _, v1 = euler_step(0.0, 0.2, p, 1.0, 1.3, 0.4)
        assert v1 == pytest.approx(0.2, abs=1e-15)

    def test_drift_moment_vectorized(self, rng):
        # constant variance at the long-run level: terminal mean is mu * span
        p = SVJJParams(mu=2e-3, kappa=0.9, theta=4e-5, rho=0.0, sigma_nu=1e-300,
                       mu_y=0.0, sigma_y=1.0, rho_j=0.0, mu_nu=0.1, lam=0.1)
        n_paths, n_steps = 100_000, 252
        y = np.zeros(n_paths)
        v = np.full(n_paths, p.theta)
        for _ in range(n_steps):
            z1 = rng.standard_normal(n_paths)
            z2 = rng.standard_normal(n_paths)
            y, v = euler_step(y, v, p, 1.0, z1, z2)
        expected = p.mu * n_steps
        se = math.sqrt(p.theta * n_steps / n_paths)
        assert y.mean() == pytest.approx(expected, abs=4 * se)

    def test_no_nan_under_adversarial_params(self, rng):
        p = SVJJParams(mu=0.0, kappa=0.01, theta=0.04, rho=-0.9, sigma_nu=5.0,
                       mu_y=0.0, sigma_y=1.0, rho_j=0.0, mu_nu=0.1, lam=0.1)
        n_paths, n_steps = 10_000, 100
        y = np.zeros(n_paths)
        v = np.full(n_paths, p.theta)
        for _ in range(n_steps):
            y, v = euler_step(y, v, p, 1.0, rng.standard_normal(n_paths),
                              rng.standard_normal(n_paths))
        assert np.all(np.isfinite(y)) and np.all(np.isfinite(v))


class TestHorizonReturn:
    def test_normal_limit_no_jumps_no_vol_noise(self):
        cfg = SimulationConfig(horizon=1.0, paths=100_000, rng_seed=10)
        sample = simulate_horizon_sample(CALM, cfg)
        mean_expect = CALM.mu * 252.0
        var_expect = CALM.theta * 252.0
        se_mean = math.sqrt(var_expect / cfg.paths)
        assert sample.mean() == pytest.approx(mean_expect, abs=4 * se_mean)
        se_var = var_expect * math.sqrt(2.0 / cfg.paths)
        assert sample.var(ddof=1) == pytest.approx(var_expect, abs=4 * se_var)

    def test_small_jumps_shift_mean(self, rng):
        p = SVJJParams(mu=4e-4, kappa=0.9, theta=4e-5, rho=0.0, sigma_nu=1e-12,
                       mu_y=-3e-3, sigma_y=1e-9, rho_j=0.0, mu_nu=1e-12, lam=30.0 / 252.0)
        cfg = SimulationConfig(horizon=1.0, paths=30_000, rng_seed=3)
        sample = simulate_horizon_sample(p, cfg)
        expected = p.mu * 252.0 + 30.0 * (-3e-3)
        se = sample.std(ddof=1) / math.sqrt(cfg.paths)
        assert sample.mean() == pytest.approx(expected, abs=4 * se)

    def test_deterministic_per_seed(self):
        cfg = SimulationConfig(horizon=0.5, paths=1, rng_seed=77)
        rng1 = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=77, spawn_key=(0,))))
        rng2 = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=77, spawn_key=(0,))))
        p = SVJJParams(mu=1e-3, kappa=0.8, theta=2e-4, rho=-0.4, sigma_nu=1e-3,
                       mu_y=-2e-3, sigma_y=4e-3, rho_j=0.1, mu_nu=1e-4, lam=0.1)
        r1, meta1 = simulate_horizon_return(p, cfg, rng1)
        r2, meta2 = simulate_horizon_return(p, cfg, rng2)
        assert r1 == r2 and meta1 == meta2

    def test_stream_stable_in_path_count(self):
        p = CALM
        small = simulate_horizon_sample(p, SimulationConfig(paths=50, rng_seed=5))
        large = simulate_horizon_sample(p, SimulationConfig(paths=200, rng_seed=5))
        assert np.array_equal(small, large[:50])

    def test_metadata_counts_jumps(self, rng):
        p = SVJJParams(mu=0.0, kappa=0.9, theta=4e-5, rho=0.0, sigma_nu=1e-12,
                       mu_y=0.0, sigma_y=1e-9, rho_j=0.0, mu_nu=1e-9, lam=10.0 / 252.0)
        _, meta = simulate_horizon_return(p, SimulationConfig(paths=1, rng_seed=0), rng)
        assert meta["jump_count"] >= 0
        assert math.isfinite(meta["final_variance"])


class TestDailyPath:
    def test_shapes_and_positive_variance(self, rng):
        rets, v = simulate_daily_path(CALM, 300, rng)
        assert rets.shape == (300,) and v.shape == (301,)
        assert np.all(v > 0)

    def test_moments_roundtrip(self, rng):
        p = SVJJParams(mu=0.03, kappa=0.8, theta=0.21, rho=-0.2, sigma_nu=0.1,
                       mu_y=-1.0, sigma_y=2.0, rho_j=0.2, mu_nu=0.3, lam=0.03)
        rets, v = simulate_daily_path(p, 50_000, rng)
        # stationary mean of the variance carries the jump inflow
        expected_v = p.theta + p.lam * p.mu_nu / p.kappa
        assert v.mean() == pytest.approx(expected_v, rel=0.05)
        expected_ret = p.mu + p.lam * (p.mu_y + p.rho_j * p.mu_nu)
        se = rets.std(ddof=1) / math.sqrt(len(rets))
        assert rets.mean() == pytest.approx(expected_ret, abs=4 * se)


class TestKde:
    def test_two_point_symmetry(self):
        est = kde(np.array([-1.0, 1.0]))
        grid = np.linspace(0.1, 2.5, 15)
        assert np.allclose(est.pdf(grid), est.pdf(-grid), atol=1e-14)

    def test_bandwidth_rule(self, rng):
        x = rng.normal(0.0, 2.0, 5000)
        est = kde(x)
        sd = np.std(x, ddof=1)
        iqr = np.subtract(*np.percentile(x, [75, 25]))
        expected = 0.9 * min(sd, iqr / 1.34) * 5000 ** (-0.2)
        assert est.bandwidth == pytest.approx(expected, rel=1e-12)

    def test_sup_norm_against_true_density(self, rng):
        x = rng.normal(0.0, 1.0, 10_000)
        est = kde(x)
        grid = np.linspace(-3, 3, 301)
        true = np.exp(-0.5 * grid**2) / math.sqrt(2 * math.pi)
        assert float(np.max(np.abs(est.pdf(grid) - true))) <= 0.02

    def test_integrates_to_one(self, rng):
        x = rng.normal(0.0, 0.5, 400)
        est = kde(x)
        lo = x.min() - 8 * est.bandwidth
        hi = x.max() + 8 * est.bandwidth
        val, _ = quad(est.pdf, lo, hi, limit=300)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_zero_spread_rejected(self):
        with pytest.raises(ValueError):
            kde(np.full(100, 2.0))


class TestSemivarianceFromDensity:
    def test_mass_entirely_above_threshold(self, rng):
        est = kde(rng.normal(5.0, 0.1, 2000))
        res = semivariance_from_density(est, 0.0)
        assert res.semivariance <= 1e-8

    def test_exact_normal_object(self):
        sigma = 0.7

        def pdf(x):
            x = np.asarray(x, dtype=float)
            return np.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))

        est = DensityEstimate(
            sample=np.array([-3 * sigma, 3 * sigma]), bandwidth=sigma, pdf=pdf
        )
        res = semivariance_from_density(est, 0.0)
        assert res.semivariance == pytest.approx(sigma**2 / 2.0, abs=1e-8)

    def test_kde_against_plugin_estimator(self, rng):
        x = rng.normal(0.0, 1.0, 10_000)
        est = kde(x)
        res = semivariance_from_density(est, 0.0)
        short = np.where(x < 0, -x, 0.0)
        plug = float(np.mean(short**2))
        h = est.bandwidth
        # a gaussian kernel inflates each point's spread by h^2
        tol = 3.0 * (h**2 + h * math.sqrt(plug) / math.sqrt(len(x)))
        assert abs(res.semivariance - plug) <= tol

    def test_kde_of_jump_diffusion_matches_closed_form(self, rng):
        p = JumpDiffusionParams(mu=0.06, sigma=0.1, lam=15.0, mu_q=-0.01, sigma_q=0.01)
        n = 10_000
        counts = rng.poisson(p.lam, n)
        y = rng.normal((p.mu - p.sigma**2 / 2), p.sigma, n) + np.where(
            counts > 0, rng.normal(counts * p.mu_q, p.sigma_q * np.sqrt(np.maximum(counts, 1))), 0.0
        )
        est = kde(y)
        res = semivariance_from_density(est, 0.0)
        closed = jump_diffusion_semivariance(p, SemivarianceQuery(0.0, 1.0, 5)).semivariance
        short = np.where(y < 0, -y, 0.0)
        se = np.std(short**2, ddof=1) / math.sqrt(n)
        assert abs(res.semivariance - closed) <= 3 * se + est.bandwidth**2

    @pytest.mark.filterwarnings("ignore::UserWarning")
    @pytest.mark.filterwarnings("ignore:.*maximum number of subdivisions.*")
    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    def test_error_surfaces_as_quadrature_error(self, rng):
        est = kde(rng.normal(0.0, 1.0, 100))

        def bad_pdf(x):
            return np.full_like(np.asarray(x, dtype=float), np.nan)

        broken = DensityEstimate(sample=est.sample, bandwidth=est.bandwidth, pdf=bad_pdf)
        with pytest.raises((QuadratureError, ValueError)):
            semivariance_from_density(broken, 0.0)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimulationConfig(horizon=0.0)
        with pytest.raises(ValueError):
            SimulationConfig(paths=0)

    def test_initial_variance_defaults_to_theta(self):
        cfg = SimulationConfig()
        assert cfg.initial_variance(CALM) == CALM.theta
        cfg2 = SimulationConfig(v0=0.123)
        assert cfg2.initial_variance(CALM) == 0.123
