"""Command-line interface.

Commands: ``tailbound``, ``fit``, ``roll``, ``svjj estimate|simulate|semidev``.
Every run writes its outputs (CSV/JSON plus rendered figures) into one output
directory together with a ``manifest.json`` echoing the effective
configuration, the seed and library versions, which is enough to reproduce
the outputs bit for bit on one platform.

Values in machine-readable outputs are fractions; percent shows up only in
human-readable text, marked as such. Exit codes: 0 ok, 2 input error,
3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DegeneracyError, InputError
from .gaussmix import JumpDiffusionParams, poisson_tail_bound
from .likelihood import (
    BALL_TOROUS,
    GENERALIZED,
    PURE_DIFFUSION,
    ModelSpec,
    default_bounds,
    log_likelihood,
    negative_log_likelihood_batch,
    pure_diffusion_mle,
)
from .returns import DEFAULT_DELTA_T, ReturnSeries, load_prices, load_returns, to_log_returns
from .rolling import (
    METHOD_JUMP,
    METHOD_PURE,
    METHOD_SQRT_TIME,
    RollingConfig,
    WindowFitter,
    lambda_constraint_sweep,
    roll,
    rows_to_csv_lines,
)
from .semivariance import (
    SemivarianceQuery,
    jump_diffusion_semivariance,
    pure_diffusion_semivariance,
    sqrt_time_semideviation,
)
from .svjj import (
    SimulationConfig,
    SVJJParams,
    diagnostics,
    kde,
    run_mcmc,
    semivariance_from_density,
    simulate_horizon_sample,
)
from .returns import empirical_semivariance

_MODEL_ALIASES = {
    "pure": PURE_DIFFUSION,
    "pure_diffusion": PURE_DIFFUSION,
    "ball_torous": BALL_TOROUS,
    "generalized": GENERALIZED,
    "generalized_m_jump": GENERALIZED,
}
_METHOD_ALIASES = {
    "sqrt": METHOD_SQRT_TIME,
    "sqrt_time": METHOD_SQRT_TIME,
    "pure": METHOD_PURE,
    "pure_diffusion": METHOD_PURE,
    "jump": METHOD_JUMP,
    "jump_diffusion": METHOD_JUMP,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 0
    try:
        cfg = _load_config(args.config)
        eff = _effective(args, cfg)
        if args.print_config:
            print(json.dumps(eff, indent=2, default=str))
            return 0
        return _dispatch(args, eff)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegeneracyError as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semiscale", description=__doc__)
    p.add_argument("--config", help="INI config file; flags override file values")
    p.add_argument("--output-dir", dest="output_dir", help="directory for all outputs")
    p.add_argument("--seed", type=int, help="RNG seed (no wall-clock seeding)")
    p.add_argument("--threads", type=int, help="worker cap; never changes results")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.add_argument("--print-config", action="store_true", help="print effective config and exit")
    sub = p.add_subparsers(dest="command")

    tb = sub.add_parser("tailbound", help="print worst-case tail probabilities per jump cap")
    tb.add_argument("--max-jumps", type=int, default=5)

    fit = sub.add_parser("fit", help="maximum-likelihood fit of one return window")
    _input_args(fit)
    fit.add_argument("--model", choices=sorted(_MODEL_ALIASES), default=None)
    fit.add_argument("--m", type=int, default=None)
    fit.add_argument("--lambda-cap", dest="lambda_cap", type=float, default=None)
    _de_args(fit)

    rl = sub.add_parser("roll", help="rolling-window semideviation comparison")
    _input_args(rl)
    rl.add_argument("--window", type=int, default=None)
    rl.add_argument("--methods", default=None, help="comma list: sqrt,pure,jump")
    rl.add_argument("--m", type=int, default=None)
    rl.add_argument("--lambda-cap", dest="lambda_cap", type=float, default=None)
    rl.add_argument("--threshold", type=float, default=None)
    rl.add_argument("--no-memory", action="store_true")
    rl.add_argument("--sweep-caps", dest="sweep_caps", default=None,
                    help="comma list of intensity caps for a constraint sweep")
    _de_args(rl)

    sv = sub.add_parser("svjj", help="stochastic-volatility jump model")
    svsub = sv.add_subparsers(dest="svjj_command", required=True)

    est = svsub.add_parser("estimate", help="MCMC estimation")
    _input_args(est)
    _svjj_args(est)

    sim = svsub.add_parser("simulate", help="Monte-Carlo horizon returns")
    sim.add_argument("--params", required=True, help="JSON file with estimated parameters")
    _sim_args(sim)

    sd = svsub.add_parser("semidev", help="estimate, simulate and integrate; emits all four scalings")
    _input_args(sd)
    sd.add_argument("--params", default=None, help="skip estimation, use this JSON instead")
    sd.add_argument("--threshold", type=float, default=None)
    sd.add_argument("--m", type=int, default=None)
    sd.add_argument("--lambda-cap", dest="lambda_cap", type=float, default=None)
    _svjj_args(sd)
    _sim_args(sd)
    _de_args(sd)
    return p


def _input_args(p) -> None:
    p.add_argument("--input", required=True, help="CSV of date,level or date,log_return")
    p.add_argument("--input-kind", dest="input_kind", choices=("prices", "returns"), default=None)
    p.add_argument("--delta-t", dest="delta_t", type=float, default=None)


def _de_args(p) -> None:
    p.add_argument("--de-population", dest="de_population", type=int, default=None)
    p.add_argument("--de-iterations", dest="de_iterations", type=int, default=None)


def _svjj_args(p) -> None:
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    if not any(a.dest == "m" for a in p._actions):
        p.add_argument("--m", type=int, default=None)
    p.add_argument("--thin", type=int, default=None)


def _sim_args(p) -> None:
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--euler-dt", dest="euler_dt", type=float, default=None)
    p.add_argument("--v0", type=float, default=None)


def _load_config(path) -> configparser.ConfigParser | None:
    if path is None:
        return None
    cfg = configparser.ConfigParser()
    read = cfg.read(path)
    if not read:
        raise InputError(f"config file not found: {path}")
    return cfg


def _pick(args, cfg, attr, section, key, default, conv=str):
    val = getattr(args, attr, None)
    if val is not None:
        return val
    if cfg is not None and cfg.has_option(section, key):
        raw = cfg.get(section, key)
        try:
            return conv(raw)
        except ValueError as exc:
            raise InputError(f"config [{section}] {key} = {raw!r}: {exc}") from None
    return default


def _effective(args, cfg) -> dict:
    as_bool = lambda s: str(s).strip().lower() in ("1", "true", "yes", "on")
    eff = {
        "command": args.command,
        "output_dir": _pick(args, cfg, "output_dir", "run", "output_dir", "out"),
        "seed": _pick(args, cfg, "seed", "run", "seed", 0, int),
        "threads": _pick(args, cfg, "threads", "run", "threads", 1, int),
        "figures": not args.no_figures and _pick(args, cfg, "_figures", "run", "figures", True, as_bool),
        "version": __version__,
    }
    if args.command == "tailbound":
        eff["max_jumps"] = args.max_jumps
        return eff
    if getattr(args, "input", None) is not None:
        eff["input"] = args.input
        eff["input_kind"] = _pick(args, cfg, "input_kind", "fit", "input_kind", "prices")
        eff["delta_t"] = _pick(args, cfg, "delta_t", "fit", "delta_t", DEFAULT_DELTA_T, float)
    if args.command == "fit":
        eff["model"] = _MODEL_ALIASES[_pick(args, cfg, "model", "fit", "model", "generalized")]
        eff["m"] = _pick(args, cfg, "m", "fit", "m", 5, int)
        eff["lambda_cap"] = _pick(args, cfg, "lambda_cap", "fit", "lambda_cap", None, float)
        eff.update(_de_effective(args, cfg))
    elif args.command == "roll":
        eff["window"] = _pick(args, cfg, "window", "roll", "window", 252, int)
        methods = _pick(args, cfg, "methods", "roll", "methods", "sqrt,pure,jump")
        eff["methods"] = _parse_methods(methods)
        eff["m"] = _pick(args, cfg, "m", "roll", "m", 5, int)
        eff["lambda_cap"] = _pick(args, cfg, "lambda_cap", "roll", "lambda_cap", 252.0, float)
        eff["threshold"] = _pick(args, cfg, "threshold", "roll", "threshold", 0.0, float)
        memory = _pick(args, cfg, "_memory", "roll", "memory", True, as_bool)
        eff["memory"] = bool(memory) and not args.no_memory
        caps = _pick(args, cfg, "sweep_caps", "roll", "sweep_caps", None)
        eff["sweep_caps"] = [float(c) for c in str(caps).split(",")] if caps else None
        eff.update(_de_effective(args, cfg))
    elif args.command == "svjj":
        eff["svjj_command"] = args.svjj_command
        if args.svjj_command in ("estimate", "semidev"):
            eff["iterations"] = _pick(args, cfg, "iterations", "svjj", "iterations", 20000, int)
            eff["burn_in"] = _pick(args, cfg, "burn_in", "svjj", "burn_in", 5000, int)
            eff["m"] = _pick(args, cfg, "m", "svjj", "m", 5, int)
            eff["thin"] = _pick(args, cfg, "thin", "svjj", "thin", 10, int)
        if args.svjj_command in ("simulate", "semidev"):
            eff["paths"] = _pick(args, cfg, "paths", "simulate", "paths", 1000, int)
            eff["horizon"] = _pick(args, cfg, "horizon", "simulate", "horizon", 1.0, float)
            eff["euler_dt"] = _pick(args, cfg, "euler_dt", "simulate", "euler_dt", 1.0 / 252.0, float)
            eff["v0"] = _pick(args, cfg, "v0", "simulate", "v0", None, float)
        if args.svjj_command == "simulate":
            eff["params"] = args.params
        if args.svjj_command == "semidev":
            eff["params"] = args.params
            eff["threshold"] = _pick(args, cfg, "threshold", "roll", "threshold", 0.0, float)
            eff["lambda_cap"] = _pick(args, cfg, "lambda_cap", "roll", "lambda_cap", 252.0, float)
            eff.update(_de_effective(args, cfg))
    return eff


def _de_effective(args, cfg) -> dict:
    return {
        "de_population": _pick(args, cfg, "de_population", "de", "population", 200, int),
        "de_iterations": _pick(args, cfg, "de_iterations", "de", "iterations", 250, int),
    }


def _parse_methods(spec: str) -> tuple:
    out = []
    for token in str(spec).split(","):
        token = token.strip().lower()
        if token not in _METHOD_ALIASES:
            raise InputError(f"unknown method {token!r}")
        out.append(_METHOD_ALIASES[token])
    return tuple(dict.fromkeys(out))


def _load_series(eff) -> ReturnSeries:
    if eff["input_kind"] == "returns":
        return load_returns(eff["input"], delta_t=eff["delta_t"])
    prices = load_prices(eff["input"])
    return to_log_returns(prices, delta_t=eff["delta_t"])


def _outdir(eff) -> Path:
    out = Path(eff["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(outdir: Path, eff: dict, outputs: list) -> None:
    import scipy

    manifest = {
        "config": {k: v for k, v in eff.items()},
        "outputs": [str(Path(p).name) for p in outputs],
        "versions": {
            "semiscale": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str))


def _dispatch(args, eff) -> int:
    command = eff["command"]
    if command == "tailbound":
        return _cmd_tailbound(eff)
    if command == "fit":
        return _cmd_fit(eff)
    if command == "roll":
        return _cmd_roll(eff)
    if command == "svjj":
        sub = eff["svjj_command"]
        if sub == "estimate":
            return _cmd_svjj_estimate(eff)
        if sub == "simulate":
            return _cmd_svjj_simulate(eff)
        return _cmd_svjj_semidev(eff)
    raise InputError(f"unknown command {command!r}")


def _cmd_tailbound(eff) -> int:
    print("m,upper_bound")
    for m in range(1, eff["max_jumps"] + 1):
        print(f"{m},{poisson_tail_bound(m):.3f}")
    return 0


def _fit_series(series: ReturnSeries, eff, kind: str) -> tuple[JumpDiffusionParams, float, ModelSpec]:
    bounds = default_bounds(series.delta_t, lambda_cap=eff.get("lambda_cap"))
    spec = ModelSpec(kind=kind, m=eff.get("m", 5), delta_t=series.delta_t, bounds=bounds)
    if kind == PURE_DIFFUSION:
        fit = pure_diffusion_mle(series, spec)
        return fit.params, fit.log_likelihood, spec
    cfg = RollingConfig(
        window=max(30, len(series)),
        methods=(METHOD_JUMP,),
        lambda_cap=min(eff.get("lambda_cap") or 1.0 / series.delta_t, 1.0 / series.delta_t),
        m=spec.m,
        use_memory=False,
        de_population=eff["de_population"],
        de_iterations=eff["de_iterations"],
        rng_seed=eff["seed"],
    )
    fitter = WindowFitter(spec, cfg)
    theta, negll, _ = fitter.fit(series.values, 0)
    return JumpDiffusionParams.from_array(theta), -negll, spec


def _cmd_fit(eff) -> int:
    series = _load_series(eff)
    outdir = _outdir(eff)
    if float(np.ptp(series.values)) == 0.0:
        raise DegeneracyError("zero-variance return series cannot be fitted")
    kind = eff["model"]
    if kind == BALL_TOROUS:
        # fitted like the capped model with a single jump branch
        eff = dict(eff)
        eff["m"] = 1
        kind = GENERALIZED
    params, ll, spec = _fit_series(series, eff, kind)
    payload = {
        "model": eff["model"],
        "delta_t": series.delta_t,
        "m": spec.m,
        "params": {
            "mu": params.mu,
            "sigma": params.sigma,
            "lambda": params.lam,
            "mu_q": params.mu_q,
            "sigma_q": params.sigma_q,
        },
        "log_likelihood": ll,
        "observations": len(series),
    }
    out_params = outdir / "fit_params.json"
    out_params.write_text(json.dumps(payload, indent=2))
    report = outdir / "fit_report.txt"
    report.write_text(_fit_report_text(payload))
    outputs = [out_params, report]
    if eff["figures"]:
        from .likelihood import _density
        from .report import save_fit_figure

        span = series.values.max() - series.values.min()
        grid = np.linspace(
            series.values.min() - 0.15 * span, series.values.max() + 0.15 * span, 400
        )
        dens = _density(grid, params, spec)
        outputs.append(save_fit_figure(series.values, grid, dens, outdir))
    _write_manifest(outdir, eff, outputs)
    print(f"log_likelihood {ll:.6f}")
    return 0


def _fit_report_text(payload: dict) -> str:
    p = payload["params"]
    lines = [
        f"model: {payload['model']}   observations: {payload['observations']}",
        f"log likelihood: {payload['log_likelihood']:.6f}",
        "parameters (per-year units):",
        f"  mu      {p['mu']: .6f}",
        f"  sigma   {p['sigma']: .6f}",
        f"  lambda  {p['lambda']: .6f}",
        f"  mu_q    {p['mu_q']: .6f}",
        f"  sigma_q {p['sigma_q']: .6f}",
        "",
    ]
    return "\n".join(lines)


def _cmd_roll(eff) -> int:
    series = _load_series(eff)
    outdir = _outdir(eff)
    config = RollingConfig(
        window=eff["window"],
        methods=eff["methods"],
        lambda_cap=min(eff["lambda_cap"], 1.0 / series.delta_t),
        m=eff["m"],
        threshold=eff["threshold"],
        use_memory=eff["memory"],
        de_population=eff["de_population"],
        de_iterations=eff["de_iterations"],
        rng_seed=eff["seed"],
        threads=eff["threads"],
    )
    rows = roll(series, config)
    if METHOD_JUMP in config.methods and all(
        row.results[METHOD_JUMP].flagged for row in rows
    ):
        raise DegeneracyError("every jump-diffusion window fit was flagged")
    out_csv = outdir / "roll.csv"
    out_csv.write_text("\n".join(rows_to_csv_lines(rows)) + "\n")
    outputs = [out_csv]
    sweep = None
    if eff.get("sweep_caps"):
        sweep = lambda_constraint_sweep(series, eff["sweep_caps"], config)
        lines = ["cap,date,semideviation"]
        for cap, cap_rows in sorted(sweep.items()):
            for row in cap_rows:
                sd = row.results[METHOD_JUMP].semideviation
                lines.append(f"{cap:g},{row.date},{sd:.17g}")
        out_sweep = outdir / "sweep.csv"
        out_sweep.write_text("\n".join(lines) + "\n")
        outputs.append(out_sweep)
    if eff["figures"]:
        from .report import save_roll_figures, save_sweep_figure

        outputs.extend(save_roll_figures(rows, outdir))
        if sweep:
            outputs.append(save_sweep_figure(sweep, outdir))
    _write_manifest(outdir, eff, outputs)
    print(f"rows {len(rows)}")
    return 0


def _cmd_svjj_estimate(eff) -> int:
    series = _load_series(eff)
    outdir = _outdir(eff)
    chain = run_mcmc(
        series,
        iterations=eff["iterations"],
        burn_in=eff["burn_in"],
        m=eff["m"],
        rng_seed=eff["seed"],
        thin=eff["thin"],
    )
    outputs = _write_chain(outdir, chain, series, eff)
    _write_manifest(outdir, eff, outputs)
    print(f"draws {eff['iterations'] - eff['burn_in']}")
    return 0


def _write_chain(outdir: Path, chain, series, eff) -> list:
    names = list(chain.draws.keys())
    n = len(next(iter(chain.draws.values())))
    lines = [",".join(names)]
    for g in range(n):
        lines.append(",".join(f"{chain.draws[k][g]:.10g}" for k in names))
    chain_csv = outdir / "chain.csv"
    chain_csv.write_text("\n".join(lines) + "\n")

    diag = diagnostics(chain, series)
    acf_lines = ["lag," + ",".join(names)]
    n_lag = len(next(iter(diag.acf.values())))
    for lag in range(n_lag):
        acf_lines.append(f"{lag}," + ",".join(f"{diag.acf[k][lag]:.8g}" for k in names))
    (outdir / "diagnostics_acf.csv").write_text("\n".join(acf_lines) + "\n")

    qq_lines = ["theoretical,sample"]
    for a, b in zip(diag.qq_theoretical, diag.qq_sample):
        qq_lines.append(f"{a:.8g},{b:.8g}")
    (outdir / "diagnostics_qq.csv").write_text("\n".join(qq_lines) + "\n")

    res_lines = ["date,standardized_residual"]
    for d, r in zip(series.dates, diag.residuals):
        res_lines.append(f"{d},{r:.8g}")
    (outdir / "diagnostics_residuals.csv").write_text("\n".join(res_lines) + "\n")

    summary = {
        "posterior_mean": chain.posterior_mean,
        "posterior_std": chain.posterior_std,
        "acceptance": chain.acceptance,
        "residual_mean": diag.residual_mean,
        "residual_var": diag.residual_var,
        "non_mixing": list(diag.non_mixing),
        "scale": chain.scale,
        "seed": chain.seed,
        "priors": chain.priors.as_dict(),
    }
    (outdir / "posterior_summary.json").write_text(json.dumps(summary, indent=2))
    params_file = outdir / "estimated_params.json"
    params_file.write_text(
        json.dumps({"params": chain.posterior_mean, "scale": chain.scale}, indent=2)
    )
    outputs = [
        chain_csv,
        outdir / "diagnostics_acf.csv",
        outdir / "diagnostics_qq.csv",
        outdir / "diagnostics_residuals.csv",
        outdir / "posterior_summary.json",
        params_file,
    ]
    if eff["figures"]:
        from .report import save_chain_figures

        outputs.extend(save_chain_figures(chain, diag, outdir))
    return outputs


def _read_params_file(path) -> tuple[SVJJParams, float]:
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"bad JSON in {path}: {exc}") from None
    try:
        return SVJJParams.from_dict(payload["params"]), float(payload.get("scale", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad parameter file {path}: {exc}") from None


def _simulate_and_integrate(params: SVJJParams, eff, threshold_native: float):
    config = SimulationConfig(
        horizon=eff["horizon"],
        paths=eff["paths"],
        euler_dt=eff["euler_dt"],
        rng_seed=eff["seed"],
        v0=eff.get("v0"),
    )
    sample = simulate_horizon_sample(params, config)
    density = kde(sample)
    result = semivariance_from_density(density, threshold_native)
    return sample, density, result, config


def _write_simulation(outdir: Path, sample, density, result, eff, scale: float) -> list:
    lines = ["path,horizon_log_return"]
    for i, r in enumerate(sample):
        lines.append(f"{i},{r:.10g}")
    sample_csv = outdir / "sample.csv"
    sample_csv.write_text("\n".join(lines) + "\n")

    lo = float(sample.min()) - 4.0 * density.bandwidth
    hi = float(sample.max()) + 4.0 * density.bandwidth
    grid = np.linspace(lo, hi, 512)
    dens = density.pdf(grid)
    g_lines = ["return,density"]
    for a, b in zip(grid, dens):
        g_lines.append(f"{a:.10g},{b:.10g}")
    grid_csv = outdir / "density_grid.csv"
    grid_csv.write_text("\n".join(g_lines) + "\n")

    payload = {
        "semivariance": result.semivariance,
        "semideviation": result.semideviation,
        "semideviation_fraction": result.semideviation / scale,
        "paths": len(sample),
        "bandwidth": density.bandwidth,
        "scale": scale,
    }
    sd_json = outdir / "semideviation.json"
    sd_json.write_text(json.dumps(payload, indent=2))
    outputs = [sample_csv, grid_csv, sd_json]
    if eff["figures"]:
        from .report import save_density_figure

        outputs.append(save_density_figure(sample, grid, dens, outdir))
    return outputs


def _cmd_svjj_simulate(eff) -> int:
    outdir = _outdir(eff)
    params, scale = _read_params_file(eff["params"])
    sample, density, result, _ = _simulate_and_integrate(params, eff, 0.0)
    outputs = _write_simulation(outdir, sample, density, result, eff, scale)
    _write_manifest(outdir, eff, outputs)
    print(f"paths {len(sample)} semideviation {result.semideviation:.6g}")
    return 0


def _cmd_svjj_semidev(eff) -> int:
    series = _load_series(eff)
    outdir = _outdir(eff)
    outputs = []

    # constant-volatility scalings on the same window
    steps_per_year = max(1, round(1.0 / series.delta_t))
    threshold = eff["threshold"]
    daily_sd = math.sqrt(empirical_semivariance(series, threshold))
    sd1 = sqrt_time_semideviation(daily_sd, steps_per_year)

    jump_params, _, spec = _fit_series(series, eff, GENERALIZED)
    query = SemivarianceQuery(
        threshold=threshold, horizon=1.0, jump_cap=spec.m, k_max=spec.m * steps_per_year
    )
    sd2 = jump_diffusion_semivariance(jump_params, query).semideviation
    pure_fit = pure_diffusion_mle(series, spec)
    sd3 = pure_diffusion_semivariance(
        pure_fit.params.mu, pure_fit.params.sigma, 1.0, threshold
    ).semideviation

    if eff.get("params"):
        params, scale = _read_params_file(eff["params"])
    else:
        chain = run_mcmc(
            series,
            iterations=eff["iterations"],
            burn_in=eff["burn_in"],
            m=eff["m"],
            rng_seed=eff["seed"],
            thin=eff["thin"],
        )
        outputs.extend(_write_chain(outdir, chain, series, eff))
        params, scale = chain.mean_params(), chain.scale

    sample, density, result, _ = _simulate_and_integrate(params, eff, threshold * scale)
    outputs.extend(_write_simulation(outdir, sample, density, result, eff, scale))
    sd4 = result.semideviation / scale

    summary = {
        "threshold": threshold,
        "horizon_years": eff["horizon"],
        "sqrt_time": sd1,
        "jump_diffusion": sd2,
        "pure_diffusion": sd3,
        "stochastic_volatility": sd4,
    }
    out_json = outdir / "semidev_summary.json"
    out_json.write_text(json.dumps(summary, indent=2))
    outputs.append(out_json)
    _write_manifest(outdir, eff, outputs)
    print("annualized semideviations (%):")
    print(f"  sqrt-time              {100 * sd1:8.3f}")
    print(f"  jump diffusion         {100 * sd2:8.3f}")
    print(f"  pure diffusion         {100 * sd3:8.3f}")
    print(f"  stochastic volatility  {100 * sd4:8.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
