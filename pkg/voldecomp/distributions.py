from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike
from scipy import special, stats

from voldecomp import DataError, NumericalError

logger = logging.getLogger(__name__)

DEFAULT_SIGNIFICANCE = 0.01
KS_MIN_SAMPLES = 10

# ±√3 (the unit-variance uniform edges) land exactly on bin edges.
DEFAULT_BIN_WIDTH = math.sqrt(3.0) / 17.0
DEFAULT_BINS_PER_SIDE = 59


class HasCdf(Protocol):
    def cdf(self, x): ...


@dataclass(frozen=True)
class Grid:
    """Fixed binning in standardized units; mass outside [lo, hi] goes to the tails."""

    lo: float
    hi: float
    n_bins: int

    def __post_init__(self) -> None:
        if not self.hi > self.lo or self.n_bins < 1:
            raise DataError(f"invalid grid [{self.lo}, {self.hi}] with {self.n_bins} bins")

    @classmethod
    def regular(cls, lo: float, hi: float, width: float) -> Grid:
        n_bins = int(round((hi - lo) / width))
        if n_bins < 1 or abs(n_bins * width - (hi - lo)) > 1e-9 * (hi - lo):
            raise DataError(f"width {width} does not tile [{lo}, {hi}]")
        return cls(float(lo), float(hi), n_bins)

    @classmethod
    def default(cls) -> Grid:
        half = DEFAULT_BINS_PER_SIDE * DEFAULT_BIN_WIDTH
        return cls(-half, half, 2 * DEFAULT_BINS_PER_SIDE)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_bins + 1)

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.n_bins

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "n_bins": self.n_bins, "bin_width": self.width}


DEFAULT_GRID = Grid.default()


@dataclass(frozen=True)
class Pdf:
    grid: Grid
    densities: np.ndarray
    left_tail_mass: float = 0.0
    right_tail_mass: float = 0.0

    def __post_init__(self) -> None:
        densities = np.array(self.densities, dtype=float)
        if densities.shape != (self.grid.n_bins,):
            raise DataError(f"expected {self.grid.n_bins} densities, got {densities.shape}")
        if np.any(densities < 0) or self.left_tail_mass < 0 or self.right_tail_mass < 0:
            raise DataError("densities and tail masses must be non-negative")
        densities.setflags(write=False)
        object.__setattr__(self, "densities", densities)
        total = float(np.sum(densities * self.widths)) + self.left_tail_mass + self.right_tail_mass
        if abs(total - 1.0) > 1e-10:
            raise DataError(f"pdf does not integrate to 1 (total mass {total!r})")

    @property
    def bin_edges(self) -> np.ndarray:
        return self.grid.edges

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.grid.edges)

    @property
    def centers(self) -> np.ndarray:
        edges = self.grid.edges
        return 0.5 * (edges[:-1] + edges[1:])

    @property
    def masses(self) -> np.ndarray:
        return self.densities * self.widths

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses)) + self.left_tail_mass + self.right_tail_mass


@dataclass(frozen=True)
class KsResult:
    statistic_d: float
    p_value: float
    reject: bool
    significance: float = DEFAULT_SIGNIFICANCE
    n: int = 0

    @property
    def label(self) -> str:
        """'T' when the Gaussian null survives, 'N' when it is rejected."""
        return "N" if self.reject else "T"

    def as_dict(self) -> dict:
        return {
            "statistic_d": self.statistic_d,
            "p_value": self.p_value,
            "reject": self.reject,
            "significance": self.significance,
            "n": self.n,
        }


def _as_samples(samples: ArrayLike) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise DataError("samples contain non-finite values")
    return x


def standardize(samples: ArrayLike, *, center: bool = True) -> np.ndarray:
    """
    Shift to mean 0 and scale to unit standard deviation (population ddof=0).

    With center=False the mean is kept and the scale is the root mean square,
    the convention used for log-volatility increments.
    """
    x = _as_samples(samples)
    if x.size < 2:
        raise DataError(f"standardize needs at least 2 samples, got {x.size}")
    if center:
        x = x - np.mean(x)
    scale = float(np.sqrt(np.mean(x * x)))
    peak = float(np.max(np.abs(x)))
    if scale == 0.0 or scale <= 1e-12 * peak:
        raise NumericalError("samples have zero dispersion")
    return x / scale


def estimate_pdf(samples: ArrayLike, grid: Grid = DEFAULT_GRID) -> Pdf:
    x = _as_samples(samples)
    if x.size == 0:
        raise DataError("cannot estimate a pdf from zero samples")
    edges = grid.edges
    counts, _ = np.histogram(x, bins=edges)
    n = float(x.size)
    left = float(np.count_nonzero(x < grid.lo)) / n
    right = float(np.count_nonzero(x > grid.hi)) / n
    return Pdf(grid, counts / (n * np.diff(edges)), left, right)


def reference_pdf(distribution: HasCdf, grid: Grid = DEFAULT_GRID) -> Pdf:
    """Exact bin masses of an analytic law from CDF differences."""
    edges = grid.edges
    cdf = np.asarray(distribution.cdf(edges), dtype=float)
    masses = np.clip(np.diff(cdf), 0.0, None)
    left = float(cdf[0])
    sf = getattr(distribution, "sf", None)
    right = float(sf(grid.hi)) if sf is not None else float(1.0 - cdf[-1])
    return Pdf(grid, masses / np.diff(edges), left, right)


@lru_cache(maxsize=16)
def gaussian_reference(grid: Grid = DEFAULT_GRID) -> Pdf:
    return reference_pdf(stats.norm(), grid)


def overlap_deviation(p: Pdf, q: Pdf) -> float:
    """Half the non-overlapping area of two same-grid pdfs (total-variation distance)."""
    if p.grid != q.grid:
        raise DataError(f"grid mismatch: {p.grid} vs {q.grid}")
    area = (
        np.sum(np.abs(p.masses - q.masses))
        + abs(p.left_tail_mass - q.left_tail_mass)
        + abs(p.right_tail_mass - q.right_tail_mass)
    )
    return float(min(1.0, max(0.0, 0.5 * area)))


def ks_test(samples: ArrayLike, significance: float = DEFAULT_SIGNIFICANCE) -> KsResult:
    """One-sample KS against N(0, 1); no Lilliefors correction for estimated parameters."""
    if not 0.0 < significance < 1.0:
        raise DataError(f"significance must lie in (0, 1), got {significance}")
    x = np.sort(_as_samples(samples))
    n = x.size
    if n < KS_MIN_SAMPLES:
        raise DataError(f"KS test needs at least {KS_MIN_SAMPLES} samples, got {n}")

    cdf = stats.norm.cdf(x)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    d = float(max(d_plus, d_minus))

    en = math.sqrt(n)
    p_value = float(np.clip(special.kolmogorov((en + 0.12 + 0.11 / en) * d), 0.0, 1.0))
    return KsResult(d, p_value, p_value < significance, significance, n)


__all__ = [
    "Grid",
    "DEFAULT_GRID",
    "Pdf",
    "KsResult",
    "standardize",
    "estimate_pdf",
    "reference_pdf",
    "gaussian_reference",
    "overlap_deviation",
    "ks_test",
]
