"""Figure rendering for CLI runs: every report lands as a PNG next to the
delimited output it belongs to. Headless backend; nothing here is needed by
the numerical layers."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .rolling import METHOD_JUMP, RollingRow

__all__ = [
    "save_roll_figures",
    "save_sweep_figure",
    "save_fit_figure",
    "save_chain_figures",
    "save_density_figure",
]

_DPI = 120


def _finish(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_roll_figures(rows: list[RollingRow], outdir: Path) -> list[Path]:
    """Semideviation comparison plus fitted-parameter evolution."""
    outdir = Path(outdir)
    paths = []
    dates = [str(r.date) for r in rows]
    x = np.arange(len(rows))
    methods = sorted({m for r in rows for m in r.results})

    fig, ax = plt.subplots(figsize=(9, 4.5))
    for method in methods:
        y = [100.0 * r.results[method].semideviation if method in r.results else math.nan for r in rows]
        ax.plot(x, y, label=method, linewidth=1.1)
    ax.set_ylabel("annualized semideviation (%)")
    _date_axis(ax, x, dates)
    ax.legend()
    paths.append(_finish(fig, outdir / "roll_semideviation.png"))

    if METHOD_JUMP in methods:
        fig, axes = plt.subplots(3, 1, figsize=(9, 7), sharex=True)
        series = {"lambda": [], "mu": [], "mu_q": []}
        for r in rows:
            p = r.results[METHOD_JUMP].params
            series["lambda"].append(p.lam if p else math.nan)
            series["mu"].append(p.mu if p else math.nan)
            series["mu_q"].append(p.mu_q if p else math.nan)
        for ax, (name, y) in zip(axes, series.items()):
            ax.plot(x, y, linewidth=1.0)
            ax.set_ylabel(name)
        _date_axis(axes[-1], x, dates)
        paths.append(_finish(fig, outdir / "roll_parameters.png"))
    return paths


def save_sweep_figure(sweep: dict, outdir: Path) -> Path:
    """One semideviation line per intensity cap."""
    fig, ax = plt.subplots(figsize=(9, 4.5))
    for cap, rows in sorted(sweep.items()):
        x = np.arange(len(rows))
        y = [100.0 * r.results[METHOD_JUMP].semideviation for r in rows]
        ax.plot(x, y, label=f"cap {cap:g}", linewidth=1.1)
        dates = [str(r.date) for r in rows]
    _date_axis(ax, x, dates)
    ax.set_ylabel("annualized semideviation (%)")
    ax.legend()
    return _finish(fig, Path(outdir) / "sweep_semideviation.png")


def save_fit_figure(values: np.ndarray, density_grid, density_values, outdir: Path) -> Path:
    """Return histogram with the fitted per-step density overlaid."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.hist(values, bins=60, density=True, alpha=0.45, label="sample")
    ax.plot(density_grid, density_values, linewidth=1.4, label="fitted density")
    ax.set_xlabel("log return")
    ax.set_ylabel("density")
    ax.legend()
    return _finish(fig, Path(outdir) / "fit_density.png")


def save_chain_figures(chain, diag, outdir: Path) -> list[Path]:
    """Trace grid, autocorrelation grid, and a residual QQ plot."""
    outdir = Path(outdir)
    names = list(chain.draws.keys())
    rows = (len(names) + 1) // 2

    fig, axes = plt.subplots(rows, 2, figsize=(10, 2.0 * rows), sharex=True)
    for ax, name in zip(axes.ravel(), names):
        ax.plot(chain.draws[name], linewidth=0.6)
        ax.set_ylabel(name)
    for ax in axes.ravel()[len(names):]:
        ax.set_visible(False)
    trace_path = _finish(fig, outdir / "estimate_trace.png")

    fig, axes = plt.subplots(rows, 2, figsize=(10, 2.0 * rows), sharex=True)
    for ax, name in zip(axes.ravel(), names):
        ax.bar(np.arange(len(diag.acf[name])), diag.acf[name], width=0.8)
        ax.set_ylabel(name)
        ax.set_ylim(-0.3, 1.05)
    for ax in axes.ravel()[len(names):]:
        ax.set_visible(False)
    acf_path = _finish(fig, outdir / "estimate_acf.png")

    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.plot(diag.qq_theoretical, diag.qq_sample, ".", markersize=3)
    lim = [diag.qq_theoretical.min(), diag.qq_theoretical.max()]
    ax.plot(lim, lim, linewidth=1.0)
    ax.set_xlabel("normal quantiles")
    ax.set_ylabel("standardized residuals")
    qq_path = _finish(fig, outdir / "estimate_qq.png")
    return [trace_path, acf_path, qq_path]


def save_density_figure(sample: np.ndarray, grid, density, outdir: Path) -> Path:
    """Simulated horizon-return histogram with the kernel density overlaid."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.hist(sample, bins=50, density=True, alpha=0.45, label="simulated returns")
    ax.plot(grid, density, linewidth=1.4, label="kernel density")
    ax.set_xlabel("horizon log return")
    ax.set_ylabel("density")
    ax.legend()
    return _finish(fig, Path(outdir) / "simulate_density.png")


def _date_axis(ax, x, dates, max_ticks: int = 8) -> None:
    step = max(1, len(dates) // max_ticks)
    ticks = x[::step]
    ax.set_xticks(ticks)
    ax.set_xticklabels([dates[i] for i in ticks], rotation=30, ha="right", fontsize=8)
