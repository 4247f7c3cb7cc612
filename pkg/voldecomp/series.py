from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from voldecomp import DataError


def _frozen(values: ArrayLike) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_positive(prices: np.ndarray) -> None:
    bad = np.flatnonzero(~(prices > 0))
    if bad.size:
        i = int(bad[0])
        raise DataError(f"price at index {i} is not positive: {prices[i]!r}", index=i)


@dataclass(frozen=True)
class PriceSeries:
    """Raw prices S_t, optionally stamped with calendar dates."""

    prices: np.ndarray
    timestamps: np.ndarray | None = None
    price_column: str | None = None
    skipped_rows: int = 0

    def __post_init__(self) -> None:
        prices = _frozen(self.prices)
        if prices.ndim != 1 or prices.size < 2:
            raise DataError(f"a price series needs at least 2 values, got {prices.size}")
        _check_positive(prices)
        object.__setattr__(self, "prices", prices)

        if self.timestamps is not None:
            stamps = np.array(self.timestamps)
            stamps.setflags(write=False)
            if stamps.shape != prices.shape:
                raise DataError("timestamps and prices differ in length")
            if stamps.size > 1 and not np.all(stamps[1:] > stamps[:-1]):
                i = int(np.flatnonzero(~(stamps[1:] > stamps[:-1]))[0]) + 1
                raise DataError(f"timestamps must be strictly increasing (index {i})", index=i)
            object.__setattr__(self, "timestamps", stamps)

    def __len__(self) -> int:
        return int(self.prices.size)


@dataclass(frozen=True)
class ReturnSeries:
    """Log-returns dlnS_i; `mu` is the mean removed by `demean` (0 otherwise)."""

    values: np.ndarray
    mean_removed: bool = False
    mu: float = 0.0
    timestamps: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        if values.ndim != 1 or values.size < 1:
            raise DataError("a return series needs at least one value")
        if self.mean_removed:
            scale = float(np.max(np.abs(values)))
            if abs(float(np.mean(values))) > 1e-10 * scale:
                raise DataError("series is flagged as demeaned but its mean is not zero")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mu", float(self.mu))

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def original(self) -> np.ndarray:
        """dlnS before mean removal."""
        return self.values + self.mu


def log_returns(series: PriceSeries) -> ReturnSeries:
    prices = series.prices
    _check_positive(prices)
    stamps = series.timestamps[1:] if series.timestamps is not None else None
    return ReturnSeries(values=np.log(prices[1:] / prices[:-1]), timestamps=stamps)


def demean(returns: ReturnSeries) -> ReturnSeries:
    if returns.mean_removed:
        raise DataError("series is already demeaned")
    mu = float(np.mean(returns.values))
    return ReturnSeries(
        values=returns.values - mu,
        mean_removed=True,
        mu=mu,
        timestamps=returns.timestamps,
    )


def reconstruct_prices(returns: ReturnSeries, s0: float) -> np.ndarray:
    """Inverse of `log_returns`: S_0 followed by S_0·exp(cumsum(dlnS))."""
    if not s0 > 0:
        raise DataError(f"initial price must be positive, got {s0!r}")
    path = np.exp(np.concatenate(([0.0], np.cumsum(returns.original))))
    return s0 * path


__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "log_returns",
    "demean",
    "reconstruct_prices",
]
