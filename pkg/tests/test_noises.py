import math

import numpy as np
import pytest
from scipy import integrate

from voldecomp.noises import NoiseKind, get_noise


def _integrate(fn, noise):
    lo, hi = noise.support
    if not (np.isfinite(lo) and np.isfinite(hi)):
        return integrate.quad(fn, -np.inf, np.inf, epsabs=1e-12)[0]
    inner = [p for p in noise.breakpoints if lo < p < hi]
    return integrate.quad(fn, lo, hi, points=inner or None, epsabs=1e-12, limit=200)[0]


@pytest.mark.parametrize("kind", list(NoiseKind))
def test_every_kind_is_standardized(kind):
    noise = get_noise(kind)
    total = _integrate(lambda x: float(noise.pdf(x)), noise)
    mean = _integrate(lambda x: x * float(noise.pdf(x)), noise)
    var = _integrate(lambda x: x * x * float(noise.pdf(x)), noise)
    assert total == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(0.0, abs=1e-8)
    assert var == pytest.approx(1.0, abs=1e-8)


def test_supports():
    assert get_noise("rectangular").support == pytest.approx((-math.sqrt(3), math.sqrt(3)))
    assert get_noise("triangular").support == pytest.approx((-math.sqrt(6), math.sqrt(6)))
    lo, hi = get_noise("skew_triangular").support
    assert lo < 0 < hi
    assert abs(lo) < abs(hi)


def test_lookup_is_case_insensitive_and_shared():
    assert get_noise("Gaussian") is get_noise(NoiseKind.Gaussian)


def test_unknown_kind_is_rejected():
    with pytest.raises(ValueError):
        get_noise("cauchy")


def test_sampling_is_seeded():
    noise = get_noise("triangular")
    a = noise.sample(100, np.random.default_rng(7))
    b = noise.sample(100, np.random.default_rng(7))
    assert np.array_equal(a, b)
