"""Phase correlation with probabilistic (soft) and argmax (hard) readout.

``correlate(a, b)`` inverts the unit-normalized cross-power spectrum and
centers it: the peak sits at grid center + d when a equals b circularly
shifted by d. The soft readout turns the surface into a softmax
distribution and reads per-axis expectations, which keeps the whole
solver differentiable in the correlation values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TRANSLATION = "translation"
LOGPOLAR = "logpolar"


@dataclass(frozen=True)
class PoseDistribution:
    """Nonnegative grid summing to 1 over correlation bins.

    ``kind`` records the axis semantics: plain shift bins, or log-polar
    bins whose row axis is circular (angle modulo pi).
    """

    values: np.ndarray
    kind: str = TRANSLATION

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def correlate(a: np.ndarray, b: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    """Centered phase correlation surface of two equal-shape grids.

    eps guards the normalization against zero-energy bins.
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    fa = np.fft.fft2(a)
    fb = np.fft.fft2(b)
    cross = fa * np.conj(fb)
    cross /= np.abs(cross) + eps
    return np.fft.fftshift(np.real(np.fft.ifft2(cross)))


def to_distribution(corr: np.ndarray, beta: float, kind: str = TRANSLATION) -> PoseDistribution:
    """Softmax with temperature beta over all bins: p_i ~ exp(beta * c_i)."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    z = beta * (corr - corr.max())
    p = np.exp(z)
    return PoseDistribution(values=p / p.sum(), kind=kind)


def _circular_row_mean(p: np.ndarray) -> float:
    """Row expectation treating rows as points on a circle of circumference n."""
    n = p.shape[0]
    phi = 2.0 * math.pi * np.arange(n) / n
    row_mass = p.sum(axis=1)
    c = float(row_mass @ np.cos(phi))
    s = float(row_mass @ np.sin(phi))
    if math.hypot(c, s) < 1e-12:
        return n // 2  # no direction information: read as zero rotation
    return (math.atan2(s, c) % (2.0 * math.pi)) * n / (2.0 * math.pi)


def expectation(dist: PoseDistribution) -> tuple[float, float]:
    """Per-axis expected bin index (row, col).

    For log-polar distributions the row axis wraps (theta and theta+pi
    coincide), so its expectation is the circular mean of the doubled
    bin angles mapped back to bin coordinates; a plain mean would be
    biased whenever the peak straddles the wrap.
    """
    p = dist.values
    rows = np.arange(p.shape[0], dtype=np.float64)
    cols = np.arange(p.shape[1], dtype=np.float64)
    col_mean = float(p.sum(axis=0) @ cols)
    if dist.kind == LOGPOLAR:
        row_mean = _circular_row_mean(p)
    else:
        row_mean = float(p.sum(axis=1) @ rows)
    return row_mean, col_mean


def expectation_grad(corr: np.ndarray, beta: float, kind: str = TRANSLATION):
    """Analytic d(row_mean, col_mean)/d(corr) of expectation(to_distribution).

    Returns two arrays shaped like corr. The softmax Jacobian gives
    dE/dc_k = beta * p_k * (w_k - E) on a linear axis; the circular row
    mean differentiates through atan2 of the resultant vector.
    """
    dist = to_distribution(corr, beta, kind)
    p = dist.values
    n_rows, n_cols = p.shape
    rows = np.arange(n_rows, dtype=np.float64)
    cols = np.arange(n_cols, dtype=np.float64)
    col_mean = float(p.sum(axis=0) @ cols)
    g_col = beta * p * (cols[None, :] - col_mean)

    if kind == LOGPOLAR:
        phi = 2.0 * math.pi * rows / n_rows
        row_mass = p.sum(axis=1)
        c = float(row_mass @ np.cos(phi))
        s = float(row_mass @ np.sin(phi))
        r2 = c * c + s * s
        if r2 < 1e-24:
            g_row = np.zeros_like(p)
        else:
            angular = (c * np.sin(phi) - s * np.cos(phi)) / r2
            g_row = beta * p * angular[:, None] * n_rows / (2.0 * math.pi)
    else:
        row_mean = float(p.sum(axis=1) @ rows)
        g_row = beta * p * (rows[:, None] - row_mean)
    return g_row, g_col


def argmax_refined(corr: np.ndarray) -> tuple[float, float]:
    """Integer argmax plus per-axis 3-point parabolic refinement.

    Ties break to the lowest row, then lowest column. Refinement is
    clamped to +-0.5 bin and skipped at grid borders or for degenerate
    (flat) neighborhoods.
    """
    r, c = np.unravel_index(int(np.argmax(corr)), corr.shape)

    def refine(left: float, center: float, right: float) -> float:
        denom = left + right - 2.0 * center
        if abs(denom) < 1e-300:
            return 0.0
        return float(np.clip((left - right) / (2.0 * denom), -0.5, 0.5))

    dr = dc = 0.0
    if 1 <= r < corr.shape[0] - 1:
        dr = refine(corr[r - 1, c], corr[r, c], corr[r + 1, c])
    if 1 <= c < corr.shape[1] - 1:
        dc = refine(corr[r, c - 1], corr[r, c], corr[r, c + 1])
    return r + dr, c + dc
