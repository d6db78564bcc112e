"""Seeded synthetic textures for tests, selftests and corpus generation."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter


def smooth_texture(height: int, width: int, seed: int, smoothness: float = 1.5,
                   lo: float = 0.05, hi: float = 0.95) -> np.ndarray:
    """Band-limited random field normalized into [lo, hi].

    Filtering uses wrap mode so the texture is circularly smooth, which
    keeps circular-shift experiments free of seam artifacts. smoothness
    around 1-2 leaves enough high-frequency energy for the spectral
    estimator to lock onto.
    """
    rng = np.random.default_rng(seed)
    field = gaussian_filter(rng.random((height, width)), smoothness, mode="wrap")
    fmin, fmax = field.min(), field.max()
    if fmax - fmin < 1e-12:
        return np.full((height, width), (lo + hi) / 2.0)
    return lo + (hi - lo) * (field - fmin) / (fmax - fmin)
