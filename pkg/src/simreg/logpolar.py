"""Log-polar resampling of a centered magnitude spectrum.

Rotation and isotropic scaling of the source image become circular row
shifts and column shifts of the grid, which a translation solver can
then read off. The angle axis spans [0, pi): a real image's magnitude
spectrum is point-symmetric, so a full turn would duplicate every
feature and split correlation energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import bilinear_sample


@dataclass(frozen=True)
class LogPolarGrid:
    """Resampled magnitude: rows = angle bins, columns = log-radius bins."""

    n_theta: int
    n_rho: int
    rho_base: float
    values: np.ndarray

    @property
    def theta_step(self) -> float:
        return math.pi / self.n_theta


def radial_bounds(shape: tuple[int, int]) -> tuple[float, float]:
    """(r_min, r_max) covered by the grid: 1 px out to min(W, H)/2."""
    h, w = shape
    return 1.0, min(h, w) / 2.0


def rho_base_for(shape: tuple[int, int], n_rho: int) -> float:
    """Per-column radius ratio so rho_base**(n_rho-1) == r_max/r_min."""
    r_min, r_max = radial_bounds(shape)
    return math.exp(math.log(r_max / r_min) / (n_rho - 1))


def to_logpolar(img: np.ndarray, n_theta: int, n_rho: int) -> LogPolarGrid:
    """Sample a DC-centered magnitude image onto a log-polar grid.

    Row i samples along direction (cos, sin)(i * pi / n_theta) from the
    DC bin; column j sits at radius r_min * rho_base**j. Bilinear, zero
    outside the image.
    """
    if n_theta < 8 or n_rho < 8:
        raise ValueError(f"grid too small: n_theta={n_theta}, n_rho={n_rho} (need >= 8)")
    h, w = img.shape
    cy, cx = h // 2, w // 2  # DC bin of an fftshifted spectrum
    base = rho_base_for(img.shape, n_rho)
    r_min, _ = radial_bounds(img.shape)

    thetas = np.arange(n_theta, dtype=np.float64) * (math.pi / n_theta)
    radii = r_min * base ** np.arange(n_rho, dtype=np.float64)
    xs = cx + radii[None, :] * np.cos(thetas)[:, None]
    ys = cy + radii[None, :] * np.sin(thetas)[:, None]
    values = bilinear_sample(np.asarray(img, dtype=np.float64), ys, xs)
    return LogPolarGrid(n_theta=n_theta, n_rho=n_rho, rho_base=base, values=values)
