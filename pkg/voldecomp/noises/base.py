from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np
from scipy import stats


class NoiseDistribution(ABC):
    """Unit-variance, zero-mean noise law backed by a frozen scipy distribution."""

    key: str = ""

    def __init__(self) -> None:
        self.dist = self.build()

    @abstractmethod
    def build(self) -> stats.rv_continuous: ...

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.dist.support()
        return float(lo), float(hi)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Points where the density is not smooth (support edges, mode)."""
        return tuple(x for x in self.support if np.isfinite(x))

    def pdf(self, x):
        return self.dist.pdf(x)

    def cdf(self, x):
        return self.dist.cdf(x)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(self.dist.rvs(size=n, random_state=rng), dtype=float)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(key={self.key!r})"
