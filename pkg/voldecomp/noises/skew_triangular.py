import math

from scipy import stats

from . import register_noise
from .base import NoiseDistribution

# Triangle on [0, 1] with the mode at 1/3, then shifted and scaled to mean 0, variance 1.
MODE = 1.0 / 3.0
RAW_MEAN = (0.0 + 1.0 + MODE) / 3.0
RAW_SD = math.sqrt((1.0 + MODE**2 - MODE) / 18.0)


@register_noise("skew_triangular")
class SkewTriangular(NoiseDistribution):
    def build(self):
        return stats.triang(c=MODE, loc=-RAW_MEAN / RAW_SD, scale=1.0 / RAW_SD)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        lo, hi = self.support
        return (lo, (MODE - RAW_MEAN) / RAW_SD, hi)
