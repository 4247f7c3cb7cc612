from scipy import stats

from . import register_noise
from .base import NoiseDistribution


@register_noise("gaussian")
class Gaussian(NoiseDistribution):
    def build(self):
        return stats.norm()
