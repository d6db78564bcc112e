"""2D discrete Fourier machinery and spectrum conditioning.

The forward transform is the standard unnormalized DFT; the inverse
carries the 1/N factor. Magnitudes are returned DC-centered. The Hann
window and the radial high-pass ramp condition a spectrum before
log-polar resampling, suppressing edge leakage and the dominant
low-frequency energy.
"""

from __future__ import annotations

import numpy as np


def dft2(img: np.ndarray) -> np.ndarray:
    """Unnormalized forward 2D DFT (complex spectrum)."""
    return np.fft.fft2(np.asarray(img, dtype=np.float64))


def idft2(spec: np.ndarray) -> np.ndarray:
    """Inverse 2D DFT with 1/N normalization (complex result)."""
    return np.fft.ifft2(spec)


def magnitude_centered(spec: np.ndarray) -> np.ndarray:
    """Per-bin modulus with quadrants swapped so DC sits at the center."""
    return np.fft.fftshift(np.abs(spec))


def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann window sin^2(pi k / (n-1)); all-ones for n < 2."""
    if n < 2:
        return np.ones(n)
    k = np.arange(n, dtype=np.float64)
    w = np.sin(np.pi * k / (n - 1)) ** 2
    w[0] = w[-1] = 0.0  # sin(pi) rounding would leave ~1e-32 residue
    return w


def window_hann(img: np.ndarray) -> np.ndarray:
    """Pointwise multiply by a separable Hann window."""
    h, w = img.shape
    return img * np.outer(hann_window(h), hann_window(w))


def highpass(img: np.ndarray) -> np.ndarray:
    """Attenuate low frequencies of a DC-centered magnitude image.

    Multiplies by a monotone radial ramp u(2-u) with u = 1 - cos(pi*r/2),
    r the radius fraction of the inscribed circle clamped to [0, 1]:
    zero at DC, one at and beyond the saturation radius min(W, H)/2.
    """
    h, w = img.shape
    cy, cx = h // 2, w // 2
    ys = np.arange(h, dtype=np.float64)[:, None] - cy
    xs = np.arange(w, dtype=np.float64)[None, :] - cx
    r_sat = min(h, w) / 2.0
    r = np.minimum(np.hypot(ys, xs) / r_sat, 1.0)
    u = 1.0 - np.cos(np.pi * r / 2.0)
    return img * (u * (2.0 - u))
