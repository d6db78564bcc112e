import math

import pytest

from simreg.textures import smooth_texture


@pytest.fixture
def texture():
    """Seeded texture factory shared across the suite."""

    def make(h=128, w=None, seed=0, smoothness=1.5):
        return smooth_texture(h, w or h, seed=seed, smoothness=smoothness)

    return make


def angle_dist(a: float, b: float, period: float = 2.0 * math.pi) -> float:
    """Circular distance between two angles."""
    d = abs(a - b) % period
    return min(d, period - d)


def pose_errors(est, true):
    """(theta deg, scale fraction, translation px) errors between poses."""
    return (
        math.degrees(angle_dist(est.theta, true.theta)),
        abs(est.scale / true.scale - 1.0),
        math.hypot(est.tx - true.tx, est.ty - true.ty),
    )
