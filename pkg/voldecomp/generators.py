"""Synthetic series for the validation battery: i.i.d. noises and the multifractal random walk."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy import integrate, linalg, stats

from voldecomp import DataError
from voldecomp.decomposer import Decomposition
from voldecomp.noises import NoiseKind, get_noise
from voldecomp.series import ReturnSeries

logger = logging.getLogger(__name__)

CIRCULANT_MIN_N = 4096
DEFAULT_LAMBDA2 = 0.03
DEFAULT_HORIZON = 1000
DEFAULT_N = 12_000

# spawn key for the log-volatility stream; the noise stream is the bare seed
_OMEGA_STREAM = 1

SynthesisMethod = Literal["auto", "circulant", "dense"]


@dataclass(frozen=True)
class MrwParams:
    n: int
    lambda2: float = DEFAULT_LAMBDA2
    horizon: int = DEFAULT_HORIZON
    noise: NoiseKind = NoiseKind.Gaussian
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DataError(f"n must be at least 2, got {self.n}")
        if self.lambda2 < 0:
            raise DataError(f"lambda2 must be non-negative, got {self.lambda2}")
        if not 1 <= self.horizon <= self.n:
            raise DataError(f"horizon must lie in [1, n={self.n}], got {self.horizon}")
        object.__setattr__(self, "noise", NoiseKind(self.noise))


@dataclass(frozen=True)
class BatteryCase:
    label: str
    noise: NoiseKind
    mrw: bool


BATTERY_CASES: tuple[BatteryCase, ...] = (
    BatteryCase("i", NoiseKind.Gaussian, False),
    BatteryCase("ii", NoiseKind.Rectangular, False),
    BatteryCase("iii", NoiseKind.Triangular, False),
    BatteryCase("iv", NoiseKind.Gaussian, True),
    BatteryCase("v", NoiseKind.Rectangular, True),
    BatteryCase("vi", NoiseKind.Triangular, True),
    BatteryCase("vii", NoiseKind.SkewTriangular, True),
)


def gen_noise(kind: NoiseKind | str, n: int, seed: int) -> ReturnSeries:
    if n < 2:
        raise DataError(f"n must be at least 2, got {n}")
    rng = np.random.default_rng(seed)
    return ReturnSeries(values=get_noise(kind).sample(n, rng))


def mrw_log_covariance(n: int, lambda2: float, horizon: int) -> np.ndarray:
    """C(k) = λ² ln(horizon / (k + 1)) for k < horizon, else 0."""
    k = np.arange(n, dtype=float)
    cov = np.zeros(n)
    inside = k < horizon
    cov[inside] = lambda2 * np.log(horizon / (k[inside] + 1.0))
    return cov


def _circulant_gaussian(cov: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = cov.size
    row = np.concatenate((cov, cov[-2:0:-1]))
    m = row.size
    eig = np.real(np.fft.fft(row))
    if np.any(eig < 0):
        logger.warning(
            "circulant embedding is not non-negative definite (min eigenvalue %.3g); clipping",
            eig.min(),
        )
        eig = np.clip(eig, 0.0, None)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    x = np.real(np.fft.fft(z * np.sqrt(eig / m)))
    return x[:n]


def _dense_gaussian(cov: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    matrix = linalg.toeplitz(cov)
    z = rng.standard_normal(cov.size)
    try:
        lower = linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        w, v = linalg.eigh(matrix)
        lower = v * np.sqrt(np.clip(w, 0.0, None))
    return lower @ z


def log_volatility(
    n: int,
    lambda2: float,
    horizon: int,
    rng: np.random.Generator,
    method: SynthesisMethod = "auto",
) -> np.ndarray:
    """ω = ln σ: stationary Gaussian, log covariance, mean -Var(ω) so that E[σ²] = 1."""
    cov = mrw_log_covariance(n, lambda2, horizon)
    if method == "auto":
        method = "circulant" if n >= CIRCULANT_MIN_N else "dense"
    if method == "circulant":
        omega = _circulant_gaussian(cov, rng)
    elif method == "dense":
        omega = _dense_gaussian(cov, rng)
    else:
        raise ValueError(f"unknown synthesis method {method!r}")
    return omega - cov[0]


def gen_mrw(params: MrwParams, *, method: SynthesisMethod = "auto") -> tuple[ReturnSeries, Decomposition]:
    """Returns r = σ·ε and its ground-truth decomposition."""
    eps = get_noise(params.noise).sample(params.n, np.random.default_rng(params.seed))
    if params.lambda2 == 0:
        sigma = np.ones(params.n)
    else:
        omega_rng = np.random.default_rng(np.random.SeedSequence(params.seed, spawn_key=(_OMEGA_STREAM,)))
        sigma = np.exp(log_volatility(params.n, params.lambda2, params.horizon, omega_rng, method))
    r = sigma * eps
    truth = Decomposition(dln_s=r, sigma=sigma, dW=eps, mu=0.0)
    return ReturnSeries(values=r), truth


@lru_cache(maxsize=None)
def intrinsic_deviation(kind: NoiseKind | str) -> float:
    """½∫|p(x) - φ(x)| dx between the variant's analytic density and the standard normal."""
    noise = get_noise(kind)

    def gap(x: float) -> float:
        return abs(float(noise.pdf(x)) - float(stats.norm.pdf(x)))

    lo, hi = -12.0, 12.0
    points = sorted({p for p in noise.breakpoints if lo < p < hi})
    value, _err = integrate.quad(gap, lo, hi, points=points or None, limit=200)
    return 0.5 * value


__all__ = [
    "MrwParams",
    "BatteryCase",
    "BATTERY_CASES",
    "gen_noise",
    "gen_mrw",
    "log_volatility",
    "mrw_log_covariance",
    "intrinsic_deviation",
]
