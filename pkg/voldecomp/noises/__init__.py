import importlib
from enum import StrEnum
from typing import Callable, Dict, Type

from .base import NoiseDistribution


class NoiseKind(StrEnum):
    Gaussian = "gaussian"
    Rectangular = "rectangular"
    Triangular = "triangular"
    SkewTriangular = "skew_triangular"


_REGISTRY: Dict[str, Type[NoiseDistribution]] = {}
_INSTANCES: Dict[str, NoiseDistribution] = {}


def register_noise(key: str) -> Callable[[Type[NoiseDistribution]], Type[NoiseDistribution]]:
    """
    Class decorator that registers a noise law under `key`.
    Example in a variant file:
        @register_noise("gaussian")
        class Gaussian(NoiseDistribution): ...
    """
    def decorator(cls: Type[NoiseDistribution]) -> Type[NoiseDistribution]:
        cls.key = key.lower()
        _REGISTRY[cls.key] = cls
        return cls
    return decorator


def get_noise(key: str | NoiseKind) -> NoiseDistribution:
    """Return the (shared, stateless) distribution registered under `key`."""
    if not key or not isinstance(key, str):
        raise ValueError(f"Invalid or missing noise kind: {key!r}")
    name = str(key).lower()
    if name not in _INSTANCES:
        try:
            _INSTANCES[name] = _REGISTRY[name]()
        except KeyError:
            raise ValueError(
                f"No noise kind registered for '{key}' (known: {', '.join(sorted(_REGISTRY))})"
            ) from None
    return _INSTANCES[name]


# Module names match the NoiseKind values.
for kind in NoiseKind:
    importlib.import_module(f".{kind.value}", __name__)


__all__ = [
    "NoiseKind",
    "NoiseDistribution",
    "register_noise",
    "get_noise",
]
