"""Training loss terms and their aggregates.

Pixel terms are masked L1 means; the self-supervision terms compare
stage-1 pose distributions with KL divergence, either against each other
or against a Gaussian-blurred one-peak target placed at the injected
pose's bins. Adversarial realness is a pluggable Image -> (0, 1) scorer
fed through binary cross-entropy; the shipped default returns a constant
0.5, which keeps the plumbing live while no discriminator is attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .estimator import DEFAULT_CONFIG, EstimatorConfig, estimate_rot_scale, rot_scale_bins
from .geometry import Sim2Pose
from .logpolar import rho_base_for
from .phasecorr import LOGPOLAR, PoseDistribution

_EPS = 1e-12


@dataclass(frozen=True)
class LossWeights:
    trans: float = 1.0
    cycle: float = 1.0
    realness_g: float = 1.0
    realness_d: float = 1.0
    xi_r: float = 1.0
    theta_s: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0.0:
                raise ValueError(f"negative weight {name}={value}")


@dataclass(frozen=True)
class LossReport:
    l_trans: float = 0.0
    l_cycle: float = 0.0
    l_realness_g: float = 0.0
    l_realness_d: float = 0.0
    l_xi_r: float = 0.0
    l_theta_s: float = 0.0
    total_basic: float = 0.0
    total_full: float = 0.0
    weights: LossWeights = LossWeights()

    TERM_FIELDS = ("l_trans", "l_cycle", "l_realness_g", "l_realness_d",
                   "l_xi_r", "l_theta_s")

    def to_json(self) -> dict:
        d = {name: getattr(self, name) for name in self.TERM_FIELDS}
        d["total_basic"] = self.total_basic
        d["total_full"] = self.total_full
        return d


def l1_masked(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Mean absolute difference over the mask (all pixels when None)."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a - b)
    if mask is None:
        return float(diff.mean())
    if mask.shape != a.shape:
        raise ValueError(f"mask shape {mask.shape} does not match {a.shape}")
    if not mask.any():
        raise ValueError("empty mask")
    return float(diff[mask].mean())


def _values(p) -> np.ndarray:
    return p.values if isinstance(p, PoseDistribution) else np.asarray(p)


def kld(p, q) -> float:
    """KL divergence sum(p * ln(p/q)) with a 1e-12 floor on both."""
    pv = _values(p)
    qv = _values(q)
    if pv.shape != qv.shape:
        raise ValueError(f"shape mismatch: {pv.shape} vs {qv.shape}")
    pv = np.maximum(pv, _EPS)
    qv = np.maximum(qv, _EPS)
    return float(np.sum(pv * (np.log(pv) - np.log(qv))))


def onepeak_target(shape: tuple[int, int], pose_bins: tuple[float, float],
                   sigma: float = 1.5, kind: str = LOGPOLAR) -> PoseDistribution:
    """Normalized isotropic Gaussian centered at fractional bin coords.

    The row axis wraps circularly (angle bins); the column center must
    lie on the grid. sigma is in bins; sigma=0 degenerates to a delta at
    the nearest bin.
    """
    n_rows, n_cols = shape
    row, col = pose_bins
    row = row % n_rows
    if not -0.5 <= col <= n_cols - 0.5:
        raise ValueError(f"column center {col} outside grid of {n_cols} bins")
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")

    if sigma == 0.0:
        values = np.zeros(shape)
        values[int(round(row)) % n_rows, int(np.clip(round(col), 0, n_cols - 1))] = 1.0
        return PoseDistribution(values=values, kind=kind)

    rows = np.arange(n_rows, dtype=np.float64)[:, None]
    cols = np.arange(n_cols, dtype=np.float64)[None, :]
    d_row = (rows - row + n_rows / 2.0) % n_rows - n_rows / 2.0
    d_col = cols - col
    values = np.exp(-(d_row ** 2 + d_col ** 2) / (2.0 * sigma ** 2))
    return PoseDistribution(values=values / values.sum(), kind=kind)


def realness_bce(score: float, label: bool) -> float:
    """Binary cross-entropy of a realness score against a true/false label."""
    score = min(max(score, _EPS), 1.0 - _EPS)
    return -math.log(score) if label else -math.log(1.0 - score)


def constant_scorer(img: np.ndarray) -> float:
    """Default realness scorer: no discriminator, always 0.5."""
    return 0.5


def xi_r_target(xi_r: Sim2Pose, img_shape: tuple[int, int],
                cfg: EstimatorConfig = DEFAULT_CONFIG,
                sigma: float = 1.5) -> PoseDistribution:
    """One-peak target at xi_r's (theta, scale) bins on the stage-1 grid."""
    n_theta, n_rho = cfg.grid_size(img_shape)
    base = rho_base_for(img_shape, n_rho)
    bins = rot_scale_bins(xi_r.theta, xi_r.scale, n_theta, n_rho, base)
    return onepeak_target((n_theta, n_rho), bins, sigma=sigma, kind=LOGPOLAR)


def loss_xi_r(fake_t: np.ndarray, fake_t_rand: np.ndarray, xi_r: Sim2Pose,
              cfg: EstimatorConfig = DEFAULT_CONFIG, sigma: float = 1.5) -> float:
    """KLD between the estimated rotation/scale distribution of the two
    fakes and the one-peak target at the injected pose.

    Only the first estimator stage is used: the injected rotation and
    scale are what the pair of fakes must agree on.
    """
    if fake_t.shape != fake_t_rand.shape:
        raise ValueError(f"shape mismatch: {fake_t.shape} vs {fake_t_rand.shape}")
    est = estimate_rot_scale(fake_t, fake_t_rand, mode="soft", cfg=cfg)
    return kld(est.dist, xi_r_target(xi_r, fake_t.shape, cfg, sigma))


def loss_theta_s(fake_t: np.ndarray, target: np.ndarray, fake_t_rand: np.ndarray,
                 target_rand: np.ndarray,
                 cfg: EstimatorConfig = DEFAULT_CONFIG) -> float:
    """KLD between the stage-1 distributions of the plain and the
    jointly-posed pair; only rotation/scale survives the injection, so
    the two heatmaps should coincide when styles are aligned.
    """
    d1 = estimate_rot_scale(fake_t, target, mode="soft", cfg=cfg).dist
    d2 = estimate_rot_scale(fake_t_rand, target_rand, mode="soft", cfg=cfg).dist
    return kld(d1, d2)


def aggregate(terms: dict[str, float], weights: LossWeights = LossWeights(),
              mode: str = "full") -> LossReport:
    """Weighted sums of the per-term values into a LossReport.

    Missing terms count as 0; basic mode forces the self-supervision
    terms to 0 regardless of input.
    """
    if mode not in ("basic", "full"):
        raise ValueError(f"mode must be 'basic' or 'full', got {mode!r}")
    get = lambda k: float(terms.get(k, 0.0))
    l_trans = get("trans")
    l_cycle = get("cycle")
    l_realness_g = get("realness_g")
    l_realness_d = get("realness_d")
    l_xi_r = get("xi_r") if mode == "full" else 0.0
    l_theta_s = get("theta_s") if mode == "full" else 0.0

    total_basic = (weights.trans * l_trans + weights.cycle * l_cycle
                   + weights.realness_g * l_realness_g
                   + weights.realness_d * l_realness_d)
    total_full = total_basic + weights.xi_r * l_xi_r + weights.theta_s * l_theta_s
    return LossReport(
        l_trans=l_trans, l_cycle=l_cycle,
        l_realness_g=l_realness_g, l_realness_d=l_realness_d,
        l_xi_r=l_xi_r, l_theta_s=l_theta_s,
        total_basic=total_basic, total_full=total_full,
        weights=weights,
    )
