import math

from scipy import stats

from . import register_noise
from .base import NoiseDistribution

HALF_WIDTH = math.sqrt(6.0)  # a²/6 = 1


@register_noise("triangular")
class Triangular(NoiseDistribution):
    """Symmetric triangle on [-√6, √6] with its mode at 0."""

    def build(self):
        return stats.triang(c=0.5, loc=-HALF_WIDTH, scale=2 * HALF_WIDTH)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (-HALF_WIDTH, 0.0, HALF_WIDTH)
