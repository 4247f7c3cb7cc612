"""Structure-function scaling: M(q,T) = E|X(t+T) - X(t)|^q ~ K_q T^f(q)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from voldecomp import DataError, NumericalError

logger = logging.getLogger(__name__)

DEFAULT_Q_GRID = tuple(0.5 * k for k in range(1, 11))
MAX_DEFAULT_LAG = 256
MIN_FIT_POINTS = 4
DEFAULT_MONOFRACTAL_EPS = 0.05


class Classification(StrEnum):
    Monofractal = "monofractal"
    Multifractal = "multifractal"


def default_t_grid(length: int) -> tuple[int, ...]:
    """Dyadic lags 1, 2, 4, ... up to 256, capped at length/10."""
    cap = min(MAX_DEFAULT_LAG, length // 10)
    lags = []
    t = 1
    while t <= cap:
        lags.append(t)
        t *= 2
    return tuple(lags)


@dataclass(frozen=True)
class MomentSurface:
    q_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray  # shape (len(q_grid), len(t_grid))


@dataclass(frozen=True)
class ExponentFit:
    f_of_q: np.ndarray
    prefactor_k: np.ndarray
    fit_r2: np.ndarray
    stderr: np.ndarray


@dataclass(frozen=True)
class ScalingSpectrum:
    q_grid: np.ndarray
    t_grid: np.ndarray
    moments: np.ndarray
    f_of_q: np.ndarray
    fit_r2: np.ndarray
    prefactor_k: np.ndarray
    stderr: np.ndarray
    hurst: float
    classification: Classification
    concavity_violations: tuple[float, ...] = ()

    def as_dict(self) -> dict:
        return {
            "q_grid": self.q_grid.tolist(),
            "t_grid": self.t_grid.tolist(),
            "f_of_q": self.f_of_q.tolist(),
            "prefactor_k": self.prefactor_k.tolist(),
            "fit_r2": self.fit_r2.tolist(),
            "stderr": self.stderr.tolist(),
            "hurst": self.hurst,
            "classification": str(self.classification),
            "concavity_violations": list(self.concavity_violations),
        }


def moment_surface(
    values: ArrayLike,
    q_grid: ArrayLike = DEFAULT_Q_GRID,
    t_grid: ArrayLike | None = None,
) -> MomentSurface:
    """Moments over all overlapping increments for each (q, T) cell."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise DataError("series must be a finite one-dimensional array")
    q = np.asarray(q_grid, dtype=float)
    if q.size == 0 or np.any(q <= 0):
        raise DataError("moment orders must be positive")
    t = np.asarray(default_t_grid(x.size) if t_grid is None else t_grid, dtype=int)
    if t.size == 0 or np.any(t < 1):
        raise DataError(f"series of length {x.size} is too short for any lag")
    if x.size < 10 * int(t.max()):
        raise DataError(f"series length {x.size} is below 10 x max lag ({t.max()})")

    moments = np.empty((q.size, t.size))
    for j, lag in enumerate(t):
        inc = np.abs(x[lag:] - x[:-lag])
        for i, order in enumerate(q):
            moments[i, j] = np.mean(inc**order)
    if not np.any(moments > 0):
        raise NumericalError("all moments are zero (constant series); logs are undefined")
    return MomentSurface(q, t, moments)


def scaling_exponents(surface: MomentSurface) -> ExponentFit:
    """Least-squares fit of ln M(q,T) against ln T, one line per q."""
    nq = surface.q_grid.size
    f = np.empty(nq)
    k = np.empty(nq)
    r2 = np.empty(nq)
    se = np.empty(nq)
    log_t = np.log(surface.t_grid.astype(float))
    for i in range(nq):
        row = surface.values[i]
        keep = np.isfinite(row) & (row > 0)
        if np.count_nonzero(keep) < MIN_FIT_POINTS:
            raise NumericalError(
                f"q={surface.q_grid[i]:g}: fewer than {MIN_FIT_POINTS} positive moments to fit"
            )
        x = log_t[keep]
        y = np.log(row[keep])
        design = np.column_stack((x, np.ones_like(x)))
        (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - (slope * x + intercept)
        ss_res = float(resid @ resid)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2[i] = 1.0 if ss_tot == 0.0 else float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))
        sxx = float(np.sum((x - x.mean()) ** 2))
        se[i] = np.sqrt(ss_res / (x.size - 2) / sxx) if sxx > 0 else np.inf
        f[i] = slope
        k[i] = np.exp(intercept)
    return ExponentFit(f, k, r2, se)


def hurst(f_of_q: ArrayLike, q_grid: ArrayLike) -> float:
    """H = f(2) / 2."""
    f = np.asarray(f_of_q, dtype=float)
    q = np.asarray(q_grid, dtype=float)
    hit = np.flatnonzero(np.isclose(q, 2.0))
    if hit.size == 0:
        raise DataError("q = 2 is not in the moment grid")
    return float(f[hit[0]]) / 2.0


def classify(
    f_of_q: ArrayLike,
    q_grid: ArrayLike,
    eps: float = DEFAULT_MONOFRACTAL_EPS,
) -> Classification:
    f = np.asarray(f_of_q, dtype=float)
    q = np.asarray(q_grid, dtype=float)
    if q.size < MIN_FIT_POINTS:
        raise DataError(f"classification needs at least {MIN_FIT_POINTS} moment orders")
    h = float(q @ f) / float(q @ q)
    gap = float(np.max(np.abs(f - q * h)))
    return Classification.Monofractal if gap <= eps else Classification.Multifractal


def concavity_violations(f_of_q: ArrayLike, q_grid: ArrayLike, stderr: ArrayLike) -> tuple[float, ...]:
    """Orders q where f dips below the chord of its neighbours by more than 2 standard errors."""
    f = np.asarray(f_of_q, dtype=float)
    q = np.asarray(q_grid, dtype=float)
    se = np.asarray(stderr, dtype=float)
    bad = []
    for i in range(1, q.size - 1):
        w = (q[i] - q[i - 1]) / (q[i + 1] - q[i - 1])
        chord = (1 - w) * f[i - 1] + w * f[i + 1]
        slack = 2.0 * float(np.max(se[i - 1 : i + 2]))
        if f[i] < chord - slack:
            bad.append(float(q[i]))
    return tuple(bad)


def analyze_scaling(
    values: ArrayLike,
    q_grid: ArrayLike = DEFAULT_Q_GRID,
    t_grid: ArrayLike | None = None,
    eps: float = DEFAULT_MONOFRACTAL_EPS,
) -> ScalingSpectrum:
    surface = moment_surface(values, q_grid, t_grid)
    fit = scaling_exponents(surface)
    violations = concavity_violations(fit.f_of_q, surface.q_grid, fit.stderr)
    if violations:
        logger.warning("f(q) is not concave at q=%s; the lag range may not be scaling", list(violations))
    return ScalingSpectrum(
        q_grid=surface.q_grid,
        t_grid=surface.t_grid,
        moments=surface.values,
        f_of_q=fit.f_of_q,
        fit_r2=fit.fit_r2,
        prefactor_k=fit.prefactor_k,
        stderr=fit.stderr,
        hurst=hurst(fit.f_of_q, surface.q_grid),
        classification=classify(fit.f_of_q, surface.q_grid, eps),
        concavity_violations=violations,
    )


__all__ = [
    "Classification",
    "DEFAULT_Q_GRID",
    "default_t_grid",
    "MomentSurface",
    "ExponentFit",
    "ScalingSpectrum",
    "moment_surface",
    "scaling_exponents",
    "hurst",
    "classify",
    "concavity_violations",
    "analyze_scaling",
]
