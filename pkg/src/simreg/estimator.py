"""Two-stage SIM(2) estimator.

Stage 1 reads rotation and scale from phase correlation of the log-polar
magnitude spectra; the moving image is then rotated/resized and stage 2
reads the residual translation from plain phase correlation. The
returned pose maps the moving image onto the fixed one:
``warp(moving, est.pose) ~= fixed``.

The magnitude spectrum cannot tell theta from theta+pi, so stage 2 runs
both hypotheses and keeps the one with the stronger translation peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import Sim2Pose, warp
from .logpolar import LogPolarGrid, to_logpolar
from .phasecorr import (
    LOGPOLAR,
    TRANSLATION,
    PoseDistribution,
    argmax_refined,
    correlate,
    expectation,
    to_distribution,
)
from .spectral import dft2, highpass, magnitude_centered, window_hann

SOFT = "soft"
HARD = "hard"


@dataclass(frozen=True)
class EstimatorConfig:
    n_theta: int | None = None  # default: min(H, W)
    n_rho: int | None = None
    beta: float = 100.0
    window: bool = True
    use_highpass: bool = True
    eps: float = 1e-8
    low_confidence_peak: float = 0.05

    def grid_size(self, shape: tuple[int, int]) -> tuple[int, int]:
        side = min(shape)
        return (self.n_theta or side, self.n_rho or side)


DEFAULT_CONFIG = EstimatorConfig()


class RotScaleEstimate(NamedTuple):
    theta: float
    scale: float
    dist: PoseDistribution
    peak: float


class TranslationEstimate(NamedTuple):
    tx: float
    ty: float
    dist: PoseDistribution
    peak: float


@dataclass(frozen=True)
class PoseEstimate:
    """Full SIM(2) estimate with per-stage distributions and peaks.

    ``aligned`` is the moving image after the stage-1 rotation/scale
    warp (the stage-2 input). theta normally lies in [0, pi); it lands
    in [pi, 2pi) only when the flipped hypothesis wins stage 2.
    """

    pose: Sim2Pose
    rot_scale_dist: PoseDistribution
    trans_dist: PoseDistribution
    conf_rot_scale: float
    conf_translation: float
    low_confidence: bool
    aligned: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class PreparedFixed:
    """Precomputed fixed-side pipeline, reusable across estimates."""

    image: np.ndarray
    windowed: np.ndarray
    logpolar: LogPolarGrid


def _conditioned_logpolar(img: np.ndarray, cfg: EstimatorConfig) -> LogPolarGrid:
    work = window_hann(img) if cfg.window else img
    mag = magnitude_centered(dft2(work))
    if cfg.use_highpass:
        mag = highpass(mag)
    n_theta, n_rho = cfg.grid_size(img.shape)
    return to_logpolar(mag, n_theta, n_rho)


def prepare_fixed(img: np.ndarray, cfg: EstimatorConfig = DEFAULT_CONFIG) -> PreparedFixed:
    img = np.asarray(img, dtype=np.float64)
    windowed = window_hann(img) if cfg.window else img
    return PreparedFixed(image=img, windowed=windowed,
                         logpolar=_conditioned_logpolar(img, cfg))


def _as_prepared(fixed, cfg: EstimatorConfig) -> PreparedFixed:
    if isinstance(fixed, PreparedFixed):
        return fixed
    return prepare_fixed(fixed, cfg)


def _read_offsets(corr: np.ndarray, mode: str, cfg: EstimatorConfig, kind: str):
    """(d_row, d_col) from grid center, plus the raw peak value."""
    if mode not in (SOFT, HARD):
        raise ValueError(f"mode must be '{SOFT}' or '{HARD}', got {mode!r}")
    n_rows, n_cols = corr.shape
    dist = to_distribution(corr, cfg.beta, kind)
    if mode == SOFT:
        row, col = expectation(dist)
    else:
        row, col = argmax_refined(corr)
    d_row = row - n_rows // 2
    d_col = col - n_cols // 2
    if kind == LOGPOLAR:
        d_row = (d_row + n_rows / 2.0) % n_rows - n_rows / 2.0
    return d_row, d_col, dist, float(corr.max())


def rot_scale_bins(theta: float, scale: float, n_theta: int, n_rho: int,
                   rho_base: float) -> tuple[float, float]:
    """Bin coordinates of (theta, scale) on the stage-1 correlation grid.

    The row axis wraps with period n_theta (theta modulo pi); the column
    is unbounded here and validated by whoever places mass on the grid.
    """
    row = (n_theta // 2 + theta / (math.pi / n_theta)) % n_theta
    col = n_rho // 2 + math.log(scale) / math.log(rho_base)
    return row, col


def estimate_rot_scale(moving: np.ndarray, fixed, mode: str = SOFT,
                       cfg: EstimatorConfig = DEFAULT_CONFIG) -> RotScaleEstimate:
    """Rotation/scale of the pose mapping moving onto fixed (stage 1)."""
    prep = _as_prepared(fixed, cfg)
    if moving.shape != prep.image.shape:
        raise ValueError(f"shape mismatch: {moving.shape} vs {prep.image.shape}")
    lp_moving = _conditioned_logpolar(np.asarray(moving, dtype=np.float64), cfg)
    corr = correlate(lp_moving.values, prep.logpolar.values, cfg.eps)
    d_row, d_col, dist, peak = _read_offsets(corr, mode, cfg, LOGPOLAR)
    theta = (d_row * (math.pi / lp_moving.n_theta)) % math.pi
    scale = lp_moving.rho_base ** d_col
    return RotScaleEstimate(theta=theta, scale=scale, dist=dist, peak=peak)


def _translation_corr(moving_win: np.ndarray, prep: PreparedFixed,
                      cfg: EstimatorConfig) -> np.ndarray:
    return correlate(moving_win, prep.windowed, cfg.eps)


def estimate_translation(moving: np.ndarray, fixed, mode: str = SOFT,
                         cfg: EstimatorConfig = DEFAULT_CONFIG) -> TranslationEstimate:
    """Shift (tx, ty) such that warp(moving, shift) ~= fixed (stage 2)."""
    prep = _as_prepared(fixed, cfg)
    if moving.shape != prep.image.shape:
        raise ValueError(f"shape mismatch: {moving.shape} vs {prep.image.shape}")
    moving = np.asarray(moving, dtype=np.float64)
    moving_win = window_hann(moving) if cfg.window else moving
    corr = _translation_corr(moving_win, prep, cfg)
    d_row, d_col, dist, peak = _read_offsets(corr, mode, cfg, TRANSLATION)
    # peak offset = displacement of moving's content relative to fixed;
    # mapping moving onto fixed negates it
    return TranslationEstimate(tx=-d_col, ty=-d_row, dist=dist, peak=peak)


def estimate_sim2(moving: np.ndarray, fixed, mode: str = SOFT,
                  cfg: EstimatorConfig = DEFAULT_CONFIG) -> PoseEstimate:
    """Full two-stage SIM(2) estimate (rotation/scale, then translation)."""
    prep = _as_prepared(fixed, cfg)
    rs = estimate_rot_scale(moving, prep, mode, cfg)
    moving = np.asarray(moving, dtype=np.float64)

    best = None
    for theta in (rs.theta, rs.theta + math.pi):
        aligned = warp(moving, Sim2Pose(scale=rs.scale, theta=theta))
        aligned_win = window_hann(aligned) if cfg.window else aligned
        corr = _translation_corr(aligned_win, prep, cfg)
        if best is None or corr.max() > best[1].max():
            best = (theta, corr, aligned)
    theta, corr, aligned = best
    d_row, d_col, trans_dist, trans_peak = _read_offsets(corr, mode, cfg, TRANSLATION)

    pose = Sim2Pose(scale=rs.scale, theta=theta % (2.0 * math.pi),
                    tx=-d_col, ty=-d_row)
    return PoseEstimate(
        pose=pose,
        rot_scale_dist=rs.dist,
        trans_dist=trans_dist,
        conf_rot_scale=rs.peak,
        conf_translation=trans_peak,
        low_confidence=rs.peak < cfg.low_confidence_peak,
        aligned=aligned,
    )


def apply_estimate(moving: np.ndarray, est: PoseEstimate) -> np.ndarray:
    """Warp moving by the estimated pose (one resampling pass)."""
    return warp(moving, est.pose)
