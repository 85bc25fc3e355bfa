"""MCMC building blocks: initialization, day likelihood, count posterior,
conjugate full conditionals (goodness of fit), Metropolis kernels, and the
diagnostics bundle."""

import math

import numpy as np
import pytest
from scipy import stats

from conftest import make_return_series
from semiscale.errors import InputError
from semiscale.svjj import (
    PriorSpec,
    SVJJLatentState,
    SVJJParams,
    bivariate_loglik,
    diagnostics,
    init_latent_state,
    jump_count_posterior,
    run_mcmc,
    simulate_daily_path,
)
from semiscale.svjj.mcmc import (
    _v_group_update,
    acf,
    count_from_jump_size,
    day_loglik,
    draw_inverse_gamma,
    draw_truncated_normal_nonneg,
    kappa_theta_conditional,
    lam_conditional,
    mu_conditional,
    mu_nu_conditional,
    mu_y_conditional,
    rho_j_conditional,
    sigma_nu_sq_proposal,
    sigma_y_sq_conditional,
)
from semiscale.svjj.model import ChainOutput

P = SVJJParams(
    mu=0.03, kappa=0.8, theta=0.21, rho=-0.2, sigma_nu=0.12,
    mu_y=-1.0, sigma_y=2.5, rho_j=0.2, mu_nu=0.4, lam=0.03,
)


def tiny_state(T=6, v=0.2):
    return SVJJLatentState(
        variance=np.full(T + 1, v),
        counts=np.zeros(T, dtype=np.int64),
        jump_y=np.zeros(T),
        jump_nu=np.full(T, 0.3),
    )


def chi_squared_gof(draws, cdf, bins=50):
    """Equiprobable-bin chi-squared p-value of draws against an analytic cdf."""
    u = cdf(np.sort(draws))
    counts, _ = np.histogram(u, bins=np.linspace(0.0, 1.0, bins + 1))
    expected = len(draws) / bins
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return float(stats.chi2.sf(stat, bins - 1))


class TestInit:
    def test_gaussian_jump_fraction_near_one_percent(self, rng):
        s = make_return_series(rng.normal(0.0, 0.004, 4000))
        state, params = init_latent_state(s, m=5)
        frac = float(np.mean(state.counts >= 1))
        assert 0.004 < frac < 0.022  # two-sided 1% band plus sampling noise
        assert 0.0 < params.lam < 1.0

    def test_constant_series_degenerate(self):
        s = make_return_series(np.full(200, 1e-4))
        state, params = init_latent_state(s, m=5)
        assert state.degenerate
        assert int(state.counts.sum()) == 0

    def test_too_short(self, rng):
        s = make_return_series(rng.normal(0, 0.004, 50))
        with pytest.raises(InputError):
            init_latent_state(s, m=5)

    def test_count_argmax_at_twice_mean(self):
        # gamma densities at twice the mean tie between 2 and 3 folds; the
        # smaller count wins
        assert count_from_jump_size(2.0 * 0.4, 0.4, 5) == 2

    def test_count_argmax_monotone_in_size(self):
        mu_nu = 0.3
        ks = [count_from_jump_size(x, mu_nu, 5) for x in (0.1, 0.3, 1.0, 1.4)]
        assert ks == sorted(ks)
        assert count_from_jump_size(5.0 * mu_nu, mu_nu, 5) == 5

    def test_variance_path_positive_and_sized(self, rng):
        s = make_return_series(rng.normal(0.0, 0.004, 500))
        state, _ = init_latent_state(s, m=5)
        assert len(state.variance) == 501
        assert np.all(state.variance > 0)


class TestDayLoglik:
    def test_factorizes_when_uncorrelated(self):
        p = SVJJParams(**{**P.as_dict(), "rho": 0.0})
        dy, dv, v = 0.7, 0.05, 0.2
        got = day_loglik(dy, dv, v, 0.0, 0.0, p)
        ll_y = stats.norm.logpdf(dy, p.mu, math.sqrt(v))
        ll_v = stats.norm.logpdf(dv, p.kappa * (p.theta - v), p.sigma_nu * math.sqrt(v))
        assert got == pytest.approx(ll_y + ll_v, abs=1e-12)

    def test_value_at_the_mean(self):
        v = 0.2
        dy = P.mu
        dv = P.kappa * (P.theta - v)
        got = day_loglik(dy, dv, v, 0.0, 0.0, P)
        logdet = math.log(P.sigma_nu**2 * v**2 * (1 - P.rho**2))
        assert got == pytest.approx(-math.log(2 * math.pi) - 0.5 * logdet, abs=1e-12)

    def test_matches_matrix_inverse_oracle(self, rng):
        for _ in range(25):
            v = rng.uniform(0.05, 0.6)
            dy, dv = rng.normal(0, 0.6), rng.normal(0, 0.1)
            jy, jn = rng.normal(0, 1.0), rng.uniform(0, 0.5)
            cov = v * np.array(
                [[1.0, P.rho * P.sigma_nu], [P.rho * P.sigma_nu, P.sigma_nu**2]]
            )
            e = np.array([dy - P.mu - jy, dv - P.kappa * (P.theta - v) - jn])
            oracle = (
                -math.log(2 * math.pi)
                - 0.5 * math.log(np.linalg.det(cov))
                - 0.5 * float(e @ np.linalg.inv(cov) @ e)
            )
            assert day_loglik(dy, dv, v, jy, jn, P) == pytest.approx(oracle, abs=1e-12)

    def test_sentinel_on_bad_variance(self):
        assert day_loglik(0.1, 0.0, 0.0, 0.0, 0.0, P) < -1e290

    def test_state_wrapper(self):
        state = tiny_state()
        dy = np.full(6, 0.5)
        expected = day_loglik(0.5, 0.0, 0.2, 0.0, 0.0, P)
        assert bivariate_loglik(2, P, state, dy) == pytest.approx(expected, abs=1e-12)


class TestJumpCountPosterior:
    def test_sums_to_one(self, rng):
        state = tiny_state()
        state.jump_y[:] = rng.normal(size=6)
        dy = rng.normal(0, 0.5, 6)
        for t in range(6):
            post = jump_count_posterior(t, P, state, dy, 5)
            assert post.shape == (6,)
            assert post.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(post >= 0)

    def test_no_intensity_no_jumps(self):
        p = SVJJParams(**{**P.as_dict(), "lam": 0.0})
        state = tiny_state()
        post = jump_count_posterior(0, p, state, np.full(6, 0.4), 5)
        assert post[0] == pytest.approx(1.0)

    def test_equal_likelihood_returns_prior(self):
        # zero stored sizes make every count explain the day identically
        state = tiny_state()
        state.jump_nu[:] = 0.0
        dy = np.full(6, P.mu)
        from semiscale.gaussmix import poisson_weights

        post = jump_count_posterior(1, P, state, dy, 5)
        assert np.allclose(post, poisson_weights(P.lam, 5).weights, atol=1e-12)

    def test_matches_bernoulli_formula_small_rate(self):
        # at one allowed jump, the truncated weights reproduce the classic
        # two-branch posterior up to the exp(-lam) vs 1-lam difference
        lam = 0.02
        p = SVJJParams(**{**P.as_dict(), "lam": lam})
        state = tiny_state()
        state.jump_y[:] = -2.0
        state.jump_nu[:] = 0.4
        dy = np.full(6, -1.8)
        post = jump_count_posterior(0, p, state, dy, 1)
        l0 = math.exp(day_loglik(dy[0], 0.0, 0.2, 0.0, 0.0, p))
        l1 = math.exp(day_loglik(dy[0], 0.0, 0.2, -2.0, 0.4, p))
        bern = np.array([(1 - lam) * l0, lam * l1])
        bern /= bern.sum()
        assert np.allclose(post, bern, atol=1e-3)

    def test_obvious_jump_day_detected(self):
        state = tiny_state()
        state.jump_y[:] = -3.0
        state.jump_nu[:] = 1e-9
        dy = np.full(6, P.mu - 3.0)  # matches exactly one jump of size -3
        post = jump_count_posterior(0, P, state, dy, 5)
        assert post[1] > 0.98


class TestConjugateGof:
    """Each conjugate full conditional, frozen at fixed inputs, must match
    its analytic density (chi-squared, 1e5 draws, p > 0.001)."""

    N = 100_000

    def setup_method(self):
        rng = np.random.default_rng(4242)
        self.T = 40
        self.dy = rng.normal(0.0, 0.5, self.T)
        self.v_prev = rng.uniform(0.1, 0.4, self.T)
        self.e_v = rng.normal(0.0, 0.05, self.T)
        self.e_y = rng.normal(0.0, 0.5, self.T)
        self.jump_y = rng.normal(-0.5, 1.0, self.T)
        self.jump_nu = rng.exponential(0.4, self.T)
        self.counts = (rng.random(self.T) < 0.2).astype(np.int64)
        self.priors = PriorSpec()
        self.rng = np.random.default_rng(99)

    def test_mu_block(self):
        mean, var = mu_conditional(
            self.dy, self.v_prev, self.e_v, np.zeros(self.T), P, self.priors
        )
        draws = self.rng.normal(mean, math.sqrt(var), self.N)
        p = chi_squared_gof(draws, stats.norm(mean, math.sqrt(var)).cdf)
        assert p > 0.001

    def test_kappa_theta_block(self):
        mean2, cov2 = kappa_theta_conditional(
            np.diff(np.concatenate(([0.2], 0.2 + np.cumsum(self.e_v)))),
            self.v_prev,
            self.e_y,
            np.zeros(self.T),
            P,
            self.priors,
        )
        chol = np.linalg.cholesky(cov2)
        z = self.rng.standard_normal((self.N, 2))
        draws = mean2[None, :] + z @ chol.T
        for i in range(2):
            p = chi_squared_gof(draws[:, i], stats.norm(mean2[i], math.sqrt(cov2[i, i])).cdf)
            assert p > 0.001
        emp_corr = np.corrcoef(draws.T)[0, 1]
        assert emp_corr == pytest.approx(cov2[0, 1] / math.sqrt(cov2[0, 0] * cov2[1, 1]), abs=0.02)

    def test_sigma_y_sq_block(self):
        shape, scale = sigma_y_sq_conditional(self.jump_y, self.jump_nu, P, self.priors)
        draws = draw_inverse_gamma(self.rng, shape, scale, size=self.N)
        p = chi_squared_gof(draws, stats.invgamma(a=shape, scale=scale).cdf)
        assert p > 0.001

    def test_sigma_nu_proposal_block(self):
        shape, scale = sigma_nu_sq_proposal(self.e_v, self.v_prev, self.priors)
        draws = draw_inverse_gamma(self.rng, shape, scale, size=self.N)
        p = chi_squared_gof(draws, stats.invgamma(a=shape, scale=scale).cdf)
        assert p > 0.001

    def test_mu_nu_block(self):
        shape, scale = mu_nu_conditional(self.jump_nu, self.priors)
        draws = draw_inverse_gamma(self.rng, shape, scale, size=self.N)
        p = chi_squared_gof(draws, stats.invgamma(a=shape, scale=scale).cdf)
        assert p > 0.001

    def test_mu_y_block(self):
        mean, var = mu_y_conditional(self.jump_y, self.jump_nu, P, self.priors)
        draws = self.rng.normal(mean, math.sqrt(var), self.N)
        assert chi_squared_gof(draws, stats.norm(mean, math.sqrt(var)).cdf) > 0.001

    def test_rho_j_block(self):
        mean, var = rho_j_conditional(self.jump_y, self.jump_nu, P, self.priors)
        draws = self.rng.normal(mean, math.sqrt(var), self.N)
        assert chi_squared_gof(draws, stats.norm(mean, math.sqrt(var)).cdf) > 0.001

    def test_lam_block(self):
        a, b = lam_conditional(self.counts, self.priors)
        draws = self.rng.beta(a, b, self.N)
        assert chi_squared_gof(draws, stats.beta(a, b).cdf) > 0.001
        assert a == self.priors.lam[0] + self.counts.sum()

    def test_truncated_normal_draw(self):
        mean, sd = -0.3, 0.8  # substantial mass below zero gets cut away
        draws = draw_truncated_normal_nonneg(
            self.rng, np.full(self.N, mean), np.full(self.N, sd)
        )
        tn = stats.truncnorm(a=(0.0 - mean) / sd, b=np.inf, loc=mean, scale=sd)
        assert chi_squared_gof(draws, tn.cdf) > 0.001

    def test_lam_posterior_pulled_toward_prior_with_no_jumps(self):
        a, b = lam_conditional(np.zeros(500, dtype=int), self.priors)
        draws = self.rng.beta(a, b, 20_000)
        prior_mean = 2.0 / 42.0
        assert 0.0 < draws.mean() < prior_mean


class TestVBlockKernel:
    def test_matches_quadrature_on_single_site_problem(self):
        """Frozen-neighbor replica trick: many identical single-site targets
        updated by the production checkerboard kernel, pooled histogram
        against the quadrature-normalized density."""
        p = P
        v_star = 0.2
        dy_val = 0.9  # a surprising return makes the target visibly skewed
        M = 1000
        T = 2 * M + 1
        dy = np.full(T, dy_val)
        v = np.full(T + 1, v_star)
        counts = np.zeros(T, dtype=np.int64)
        jy = np.zeros(T)
        jn = np.zeros(T)
        sites = np.arange(2, 2 * M - 1, 2)
        rng = np.random.default_rng(31337)
        step = 0.18
        sweeps, burn = 700, 100
        pool = []
        for sweep in range(sweeps):
            _v_group_update(rng, dy, v, counts, jy, jn, p, step, sites)
            if sweep >= burn:
                pool.append(v[sites].copy())
        draws = np.concatenate(pool)

        def log_target(x):
            left = day_loglik(dy_val, x - v_star, v_star, 0.0, 0.0, p)
            right = day_loglik(dy_val, v_star - x, x, 0.0, 0.0, p)
            return left + right

        grid = np.linspace(1e-6, 1.6, 4001)
        logs = np.array([log_target(float(x)) for x in grid])
        dens = np.exp(logs - logs.max())
        dens /= np.trapezoid(dens, grid)
        edges = np.linspace(0.0, 1.6, 51)
        hist, _ = np.histogram(draws, bins=edges)
        hist = hist / len(draws)
        cdf = np.concatenate(([0.0], np.cumsum(dens) * (grid[1] - grid[0])))
        target_bins = np.interp(edges, np.concatenate(([0.0], grid)), cdf)
        target_probs = np.diff(target_bins)
        assert len(draws) >= 500_000
        assert float(np.max(np.abs(hist - target_probs))) <= 0.02


class TestRunMcmc:
    def test_smoke_run_shapes_and_ranges(self, rng):
        truth = P
        rets_pct, _ = simulate_daily_path(truth, 300, rng)
        s = make_return_series(rets_pct / 100.0)
        chain = run_mcmc(s, iterations=400, burn_in=100, m=5, rng_seed=2, thin=10)
        assert len(chain.draws["mu"]) == 300
        assert chain.latent_draws["variance"].shape == (30, 301)
        assert np.all((chain.draws["lam"] >= 0) & (chain.draws["lam"] < 1))
        assert np.all(np.abs(chain.draws["rho"]) < 1)
        assert np.all(chain.draws["sigma_nu"] > 0)
        for k, v in chain.acceptance.items():
            assert 0.0 <= v <= 1.0
        assert math.isfinite(chain.posterior_mean["theta"])

    def test_validates_iteration_split(self, rng):
        s = make_return_series(rng.normal(0, 0.004, 200))
        with pytest.raises(ValueError):
            run_mcmc(s, iterations=100, burn_in=100)

    def test_deterministic(self, rng):
        rets_pct, _ = simulate_daily_path(P, 200, rng)
        s = make_return_series(rets_pct / 100.0)
        a = run_mcmc(s, iterations=120, burn_in=40, rng_seed=9)
        b = run_mcmc(s, iterations=120, burn_in=40, rng_seed=9)
        assert np.array_equal(a.draws["theta"], b.draws["theta"])
        assert a.acceptance == b.acceptance


class TestDiagnostics:
    def fake_chain(self, draws):
        names = list(draws.keys())
        return ChainOutput(
            draws=draws,
            latent_draws={
                "variance": np.full((3, 101), 0.2),
                "counts": np.zeros((3, 100), dtype=np.int8),
                "jump_y": np.zeros((3, 100), dtype=np.float32),
                "jump_nu": np.zeros((3, 100), dtype=np.float32),
            },
            posterior_mean={k: float(np.mean(v)) for k, v in draws.items()},
            posterior_std={k: float(np.std(v)) for k, v in draws.items()},
            acceptance={"variance": 0.4, "rho": 0.5, "sigma_nu_sq": 0.9},
            iterations=30,
            burn_in=0,
            thin=10,
            seed=0,
            priors=PriorSpec(),
        )

    def test_iid_chain_acf_within_band(self, rng):
        n = 4000
        draws = {"mu": rng.normal(size=n)}
        chain = self.fake_chain(draws)
        s = make_return_series(rng.normal(0, 0.004, 100))
        d = diagnostics(chain, s)
        band = 2.0 / math.sqrt(n)
        assert np.all(np.abs(d.acf["mu"][1:]) < 2.5 * band)
        assert d.acf["mu"][0] == pytest.approx(1.0)

    def test_constant_chain_flagged(self, rng):
        chain = self.fake_chain({"mu": np.full(500, 0.3)})
        s = make_return_series(rng.normal(0, 0.004, 100))
        d = diagnostics(chain, s)
        assert np.allclose(d.acf["mu"], 1.0)
        assert "mu" in d.non_mixing

    def test_residuals_standardized_on_well_specified_data(self, rng):
        truth = P
        rets_pct, v_path = simulate_daily_path(truth, 1500, rng)
        s = make_return_series(rets_pct / 100.0)
        chain = run_mcmc(s, iterations=2500, burn_in=1000, m=5, rng_seed=4)
        d = diagnostics(chain, s)
        assert abs(d.residual_mean) < 0.15
        assert 0.8 < d.residual_var < 1.2
        assert len(d.qq_theoretical) == len(d.qq_sample) == 1500
        assert np.all(np.diff(d.qq_sample) >= 0)

    def test_acf_helper_white_noise(self, rng):
        x = rng.normal(size=2000)
        a = acf(x, 50)
        assert len(a) == 51
        assert a[0] == pytest.approx(1.0)
        assert np.all(np.abs(a[1:]) < 0.1)
