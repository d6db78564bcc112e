"""Pose randomization: sampling a known random pose and injecting it.

Two injection modes exist downstream: applying the pose to the original
image alone (the pose-randomization phase) and applying one pose to both
images of a pair (the self-supervision phase). Both are deterministic
given a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Sim2Pose, warp


@dataclass(frozen=True)
class PoseRange:
    """Uniform sampling bounds per pose component.

    Defaults cover translations of [-50, 50] px per axis, rotations over
    [0, pi) and scale in [0.8, 1.2].
    """

    scale_min: float = 0.8
    scale_max: float = 1.2
    theta_min: float = 0.0
    theta_max: float = math.pi
    t_max: float = 50.0

    def __post_init__(self):
        if not 0.0 < self.scale_min <= self.scale_max:
            raise ValueError(f"bad scale range [{self.scale_min}, {self.scale_max}]")
        if not 0.0 <= self.theta_min <= self.theta_max <= math.pi:
            raise ValueError(f"theta range must lie in [0, pi], got "
                             f"[{self.theta_min}, {self.theta_max}]")
        if self.t_max < 0.0:
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")

    @staticmethod
    def identity() -> "PoseRange":
        return PoseRange(scale_min=1.0, scale_max=1.0, theta_min=0.0,
                         theta_max=0.0, t_max=0.0)


@dataclass(frozen=True)
class RandomizedPair:
    original: np.ndarray
    randomized: np.ndarray
    xi_r: Sim2Pose
    seed: int


def sample_pose(pose_range: PoseRange, seed) -> Sim2Pose:
    """Draw each component uniformly over its interval.

    ``seed`` may be an int or a numpy Generator; identical seeds yield
    identical poses.
    """
    rng = np.random.default_rng(seed)
    return Sim2Pose(
        scale=float(rng.uniform(pose_range.scale_min, pose_range.scale_max)),
        theta=float(rng.uniform(pose_range.theta_min, pose_range.theta_max)),
        tx=float(rng.uniform(-pose_range.t_max, pose_range.t_max)),
        ty=float(rng.uniform(-pose_range.t_max, pose_range.t_max)),
    )


def inject_original_only(original: np.ndarray, pose_range: PoseRange,
                         seed: int) -> RandomizedPair:
    """Type-(i) injection: pose the original alone, target untouched."""
    xi_r = sample_pose(pose_range, seed)
    return RandomizedPair(original=original, randomized=warp(original, xi_r),
                          xi_r=xi_r, seed=seed)


def inject_both(original: np.ndarray, target: np.ndarray, pose_range: PoseRange,
                seed: int) -> tuple[np.ndarray, np.ndarray, Sim2Pose]:
    """Type-(ii) injection: one sampled pose applied to both images."""
    if original.shape != target.shape:
        raise ValueError(f"shape mismatch: {original.shape} vs {target.shape}")
    xi_r = sample_pose(pose_range, seed)
    return warp(original, xi_r), warp(target, xi_r), xi_r
