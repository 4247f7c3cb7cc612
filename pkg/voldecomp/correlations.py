from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from voldecomp import DataError, NumericalError

DEFAULT_ACF_LAGS = 100
DEFAULT_LEVERAGE_LAGS = 30
DEFAULT_THRESHOLD = 1.0
MIN_CONDITIONED_POINTS = 30


class Conditioning(StrEnum):
    Unconditioned = "none"
    NegativeOnly = "negative"
    PositiveOnly = "positive"


@dataclass(frozen=True)
class CorrelationCurve:
    lags: np.ndarray
    values: np.ndarray
    n_pairs: np.ndarray
    confidence_band: float  # 2/√n_pairs at the smallest pair count; the widest per-lag band

    @property
    def lag_bands(self) -> np.ndarray:
        """2/√n_pairs per lag; wider near the series end."""
        return 2.0 / np.sqrt(np.maximum(self.n_pairs, 1))

    def fraction_within_band(self, *, skip_zero: bool = True) -> float:
        keep = self.lags != 0 if skip_zero else np.ones(self.lags.size, dtype=bool)
        return float(np.mean(np.abs(self.values[keep]) < self.lag_bands[keep]))

    def at(self, lag: int) -> float:
        hit = np.flatnonzero(self.lags == lag)
        if hit.size == 0:
            raise KeyError(lag)
        return float(self.values[hit[0]])

    def as_dict(self) -> dict:
        return {
            "lags": self.lags.tolist(),
            "values": self.values.tolist(),
            "n_pairs": self.n_pairs.tolist(),
            "confidence_band": self.confidence_band,
        }


def _finite(values: ArrayLike) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise DataError("series must be a finite one-dimensional array")
    return x


def _standardized(x: np.ndarray, name: str) -> np.ndarray:
    centered = x - x.mean()
    sd = math.sqrt(float(np.mean(centered * centered)))
    if sd == 0.0 or sd <= 1e-12 * float(np.max(np.abs(x))):
        raise NumericalError(f"{name} has zero variance")
    return centered / sd


def autocorr(values: ArrayLike, max_lag: int = DEFAULT_ACF_LAGS) -> CorrelationCurve:
    """Sample ACF with the global mean and variance; lag-k covariance divided by n - k."""
    x = _finite(values)
    n = x.size
    if max_lag < 0 or n <= 4 * max_lag:
        raise DataError(f"series of length {n} is too short for max_lag {max_lag} (need > 4 x max_lag)")
    z = _standardized(x, "series")
    lags = np.arange(max_lag + 1)
    acf = np.empty(lags.size)
    for k in lags:
        acf[k] = np.dot(z[: n - k], z[k:]) / (n - k)
    return CorrelationCurve(
        lags=lags,
        values=np.clip(acf, -1.0, 1.0),
        n_pairs=n - lags,
        confidence_band=2.0 / math.sqrt(n - max_lag),
    )


def abs_autocorr(values: ArrayLike, max_lag: int = DEFAULT_ACF_LAGS) -> CorrelationCurve:
    return autocorr(np.abs(_finite(values)), max_lag)


def leverage(
    a: ArrayLike,
    b: ArrayLike,
    max_lag: int = DEFAULT_LEVERAGE_LAGS,
    conditioning: Conditioning | str = Conditioning.Unconditioned,
    threshold: float = DEFAULT_THRESHOLD,
    *,
    two_sided: bool = False,
) -> CorrelationCurve:
    """
    L(n) = <a(t) b(t+n)> with a and b standardized by their global moments.

    Conditioned variants keep only the t where a(t) < -threshold (negative)
    or a(t) > threshold (positive), in standard deviations, and divide by
    the RMS of a over that set instead of 1.
    """
    x = _finite(a)
    y = _finite(b)
    if x.size != y.size:
        raise DataError(f"series lengths differ: {x.size} vs {y.size}")
    n = x.size
    if max_lag < 0 or max_lag >= n / 4:
        raise DataError(f"max_lag {max_lag} must be below a quarter of the length ({n})")
    conditioning = Conditioning(conditioning)
    za = _standardized(x, "first series")
    zb = _standardized(y, "second series")

    if conditioning is Conditioning.NegativeOnly:
        chosen = za < -threshold
    elif conditioning is Conditioning.PositiveOnly:
        chosen = za > threshold
    else:
        chosen = np.ones(n, dtype=bool)
    if conditioning is not Conditioning.Unconditioned:
        count = int(np.count_nonzero(chosen))
        if count < MIN_CONDITIONED_POINTS:
            raise DataError(
                f"{conditioning} conditioning at {threshold} sd keeps {count} points "
                f"(need {MIN_CONDITIONED_POINTS})"
            )
        norm = math.sqrt(float(np.mean(za[chosen] ** 2)))
    else:
        norm = 1.0

    lags = np.arange(-max_lag if two_sided else 0, max_lag + 1)
    values = np.empty(lags.size)
    pairs = np.empty(lags.size, dtype=int)
    for i, lag in enumerate(lags):
        if lag >= 0:
            t = np.flatnonzero(chosen[: n - lag])
        else:
            t = np.flatnonzero(chosen[-lag:]) - lag
        pairs[i] = t.size
        values[i] = np.mean(za[t] * zb[t + lag]) / norm if t.size else np.nan
    return CorrelationCurve(
        lags=lags,
        values=np.clip(values, -1.0, 1.0),
        n_pairs=pairs,
        confidence_band=2.0 / math.sqrt(max(int(pairs.min()), 1)),
    )


__all__ = [
    "Conditioning",
    "CorrelationCurve",
    "autocorr",
    "abs_autocorr",
    "leverage",
]
