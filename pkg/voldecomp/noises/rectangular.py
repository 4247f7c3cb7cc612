import math

from scipy import stats

from . import register_noise
from .base import NoiseDistribution

HALF_WIDTH = math.sqrt(3.0)


@register_noise("rectangular")
class Rectangular(NoiseDistribution):
    """Uniform on [-√3, √3]."""

    def build(self):
        return stats.uniform(loc=-HALF_WIDTH, scale=2 * HALF_WIDTH)
