"""Price/return series ingestion and sample statistics.

CSV input is two columns ``date,level`` (ISO dates, positive decimal levels),
with an optional header row detected by a non-numeric level field. Dates are
kept as opaque ordered labels; nothing here does calendar arithmetic.
"""

from __future__ import annotations

import csv
import datetime as _dt
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "SampleStats",
    "load_prices",
    "load_returns",
    "to_log_returns",
    "compound_to_prices",
    "sample_stats",
    "empirical_semivariance",
]

log = logging.getLogger(__name__)

#: Default year fraction for one daily step (252 trading days per year).
DEFAULT_DELTA_T = 1.0 / 252.0


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def _check_dates(dates) -> tuple:
    dates = tuple(dates)
    for a, b in zip(dates, dates[1:]):
        if not a < b:
            raise ValueError(f"dates not strictly increasing at {a!r} -> {b!r}")
    return dates


@dataclass(frozen=True)
class PriceSeries:
    """Dated index levels; strictly increasing dates, strictly positive levels."""

    dates: tuple
    levels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", _check_dates(self.dates))
        levels = _frozen_array(self.levels, "levels")
        if len(levels) != len(self.dates):
            raise ValueError("dates and levels differ in length")
        if len(levels) < 2:
            raise ValueError("need at least 2 observations")
        if np.any(levels <= 0.0):
            raise ValueError("levels must be strictly positive")
        object.__setattr__(self, "levels", levels)

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnSeries:
    """Dated log returns plus the year fraction one step represents."""

    dates: tuple
    values: np.ndarray
    delta_t: float = DEFAULT_DELTA_T

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", _check_dates(self.dates))
        values = _frozen_array(self.values, "values")
        if len(values) != len(self.dates):
            raise ValueError("dates and values differ in length")
        if len(values) < 1:
            raise ValueError("need at least 1 observation")
        if self.delta_t <= 0.0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.dates)

    def slice(self, start: int, stop: int) -> "ReturnSeries":
        return ReturnSeries(
            dates=self.dates[start:stop],
            values=self.values[start:stop],
            delta_t=self.delta_t,
        )


@dataclass(frozen=True)
class SampleStats:
    """Per-period moment estimators.

    ``kurtosis`` is the raw fourth standardized moment (a normal sample sits
    near 3); subtract 3 for the excess convention. ``degenerate`` marks a
    zero-variance sample, whose skewness/kurtosis are reported as NaN.
    """

    mean: float
    std_dev: float
    skewness: float
    kurtosis: float
    count: int
    degenerate: bool = field(default=False)

    @property
    def excess_kurtosis(self) -> float:
        return self.kurtosis - 3.0


def _parse_date(token: str, row: int) -> _dt.date:
    try:
        return _dt.date.fromisoformat(token.strip())
    except ValueError as exc:
        raise InputError(f"row {row}: bad date {token!r}: {exc}") from None


def _read_rows(path, date_column: int, value_column: int) -> tuple[list, list]:
    """Shared two-column CSV reader: header auto-detection, strict date
    ordering, duplicate rejection, and per-row error reporting."""
    dates: list[_dt.date] = []
    values: list[float] = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(date_column, value_column):
                raise InputError(f"row {i}: expected at least 2 columns, got {len(row)}")
            token = row[value_column].strip()
            if i == 1 and not _is_number(token):
                continue  # header
            try:
                value = float(token)
            except ValueError:
                raise InputError(
                    f"row {i}, column {value_column + 1}: bad value {token!r}"
                ) from None
            if not math.isfinite(value):
                raise InputError(f"row {i}: non-finite value {token!r}")
            date = _parse_date(row[date_column], i)
            if dates:
                if date == dates[-1]:
                    raise InputError(f"row {i}: duplicate date {date.isoformat()}")
                if date < dates[-1]:
                    raise InputError(f"row {i}: date {date.isoformat()} out of order")
            dates.append(date)
            values.append(value)
    return dates, values


def load_prices(path, date_column: int = 0, level_column: int = 1) -> PriceSeries:
    """Read a ``date,level`` CSV into a PriceSeries.

    A header row is detected by a non-numeric level field and skipped. Rows
    out of date order, duplicate dates and non-positive levels are rejected
    with the offending row reported.
    """
    dates, levels = _read_rows(path, date_column, level_column)
    for date, level in zip(dates, levels):
        if level <= 0.0:
            raise InputError(f"{date.isoformat()}: non-positive level {level!r}")
    if len(levels) < 2:
        raise InputError(f"{path}: need at least 2 price rows, got {len(levels)}")
    return PriceSeries(dates=tuple(dates), levels=np.array(levels))


def load_returns(path, delta_t: float = DEFAULT_DELTA_T) -> ReturnSeries:
    """Read a ``date,log_return`` CSV directly into a ReturnSeries."""
    dates, values = _read_rows(path, 0, 1)
    if not values:
        raise InputError(f"{path}: no return rows")
    return ReturnSeries(dates=tuple(dates), values=np.array(values), delta_t=delta_t)


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def to_log_returns(prices: PriceSeries, delta_t: float = DEFAULT_DELTA_T) -> ReturnSeries:
    """Per-step log returns ln(level_i / level_{i-1}), dated at step end."""
    values = np.diff(np.log(prices.levels))
    return ReturnSeries(dates=prices.dates[1:], values=values, delta_t=delta_t)


def compound_to_prices(
    returns: ReturnSeries, initial_date, initial_level: float = 100.0
) -> PriceSeries:
    """Cumulative exponentiation: the price path whose log returns are the
    given series, anchored at (initial_date, initial_level)."""
    if initial_level <= 0.0:
        raise ValueError("initial_level must be positive")
    levels = initial_level * np.exp(np.concatenate(([0.0], np.cumsum(returns.values))))
    return PriceSeries(dates=(initial_date,) + returns.dates, levels=levels)


def sample_stats(returns: ReturnSeries) -> SampleStats:
    """Mean, standard deviation (ddof=1), skewness and raw kurtosis.

    Skewness and kurtosis are the population-style standardized moments
    m3/m2^1.5 and m4/m2^2. A zero-variance sample is flagged degenerate and
    reported on the logging stream; its shape moments are NaN.
    """
    x = returns.values
    n = len(x)
    if n < 4:
        raise ValueError(f"need at least 4 observations for kurtosis, got {n}")
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    std_dev = float(math.sqrt(float(np.sum(dev**2)) / (n - 1)))
    if m2 == 0.0:
        log.warning("sample_stats: zero-variance sample (n=%d); shape moments undefined", n)
        return SampleStats(mean, 0.0, float("nan"), float("nan"), n, degenerate=True)
    skew = float(np.mean(dev**3) / m2**1.5)
    kurt = float(np.mean(dev**4) / m2**2)
    return SampleStats(mean, std_dev, skew, kurt, n)


def empirical_semivariance(returns: ReturnSeries, threshold: float) -> float:
    """Discrete below-target semivariance: mean over the FULL sample of
    (threshold - r)^2 restricted to observations strictly below threshold.

    Dividing by the full count (not the downside count) makes the estimator
    converge to the integral of (threshold - r)^2 against the return density.
    """
    x = returns.values
    short = threshold - x[x < threshold]
    if short.size == 0:
        return 0.0
    return float(np.sum(short**2) / len(x))
