"""Shared independent oracles for the test suite.

These implement textbook reflection/image formulas directly, with no code
shared with the package, so agreement is meaningful evidence.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr


def bridge_corridor_stay(hi: float, lo: float, t: float, x: float,
                         images: int = 80) -> float:
    """P(Brownian bridge 0 -> x over [0,t] stays inside (lo, hi)).

    Image expansion of the bridge density: sum over reflections of the
    endpoint in the two walls, divided by the free density.
    """
    assert lo < 0.0 < hi and lo < x < hi
    width = hi - lo
    total = 0.0
    for k in range(-images, images + 1):
        shift = 2.0 * k * width
        direct = ((x + shift) ** 2 - x * x) / (2.0 * t)
        mirror = ((2.0 * hi - x + shift) ** 2 - x * x) / (2.0 * t)
        total += math.exp(-direct) - math.exp(-mirror)
    return total


def corridor_stay_quad(hi: float, lo: float, t: float) -> float:
    """P(BM stays inside (lo, hi) up to t), by integrating the bridge law."""
    scale = math.sqrt(t)

    def integrand(x):
        return bridge_corridor_stay(hi, lo, t, x) * math.exp(
            -x * x / (2.0 * t)
        ) / (scale * math.sqrt(2.0 * math.pi))

    value, err = quad(integrand, lo, hi, limit=200)
    assert err < 1e-10
    return value


def symmetric_corridor_stay(b: float, t: float, images: int = 60) -> float:
    """P(max |B_s| < b up to t) via the alternating reflection series."""
    rt = math.sqrt(t)
    total = 0.0
    for k in range(-images, images + 1):
        total += (-1) ** k * (
            ndtr((2 * k + 1) * b / rt) - ndtr((2 * k - 1) * b / rt)
        )
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
