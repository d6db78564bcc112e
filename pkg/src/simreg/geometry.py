"""SIM(2) pose algebra and image warping.

Images are 2D float64 arrays indexed ``img[y, x]`` (row-major, y down).
A pose acts on pixel coordinates centered on the image center
``((W-1)/2, (H-1)/2)``: points are scaled, rotated, then translated.
Positive ``theta`` rotates counter-clockwise on screen (the +x axis turns
toward -y); ``tx``/``ty`` shift content right/down in pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Sim2Pose:
    """Similarity transform: uniform scale, rotation, translation."""

    scale: float = 1.0
    theta: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        vals = (self.scale, self.theta, self.tx, self.ty)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite pose parameters: {vals}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def matrix(self) -> np.ndarray:
        """3x3 homogeneous matrix acting on centered (x, y) pixel coords."""
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        return np.array(
            [
                [self.scale * c, self.scale * s, self.tx],
                [-self.scale * s, self.scale * c, self.ty],
                [0.0, 0.0, 1.0],
            ]
        )


IDENTITY = Sim2Pose()


def from_matrix(m: np.ndarray) -> Sim2Pose:
    """Recover pose parameters from a homogeneous similarity matrix."""
    scale = math.hypot(m[0, 0], m[0, 1])
    if scale <= 0.0:
        raise ValueError("degenerate matrix: zero scale")
    theta = math.atan2(m[0, 1], m[0, 0])
    return Sim2Pose(scale=scale, theta=theta, tx=float(m[0, 2]), ty=float(m[1, 2]))


def compose(a: Sim2Pose, b: Sim2Pose) -> Sim2Pose:
    """Pose whose matrix is matrix(a) @ matrix(b) (b applied first)."""
    return from_matrix(a.matrix() @ b.matrix())


def inverse(p: Sim2Pose) -> Sim2Pose:
    inv = 1.0 / p.scale
    c = math.cos(p.theta)
    s = math.sin(p.theta)
    # inverse linear part is (1/s) R_{-theta}; translation follows
    tx = -inv * (c * p.tx - s * p.ty)
    ty = -inv * (s * p.tx + c * p.ty)
    return Sim2Pose(scale=inv, theta=-p.theta, tx=tx, ty=ty)


def bilinear_sample(img: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample img at float coords with bilinear weights; outside reads 0."""
    h, w = img.shape
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0

    out = np.zeros(ys.shape, dtype=np.float64)
    for dy, dx, wgt in (
        (0, 0, (1.0 - fy) * (1.0 - fx)),
        (0, 1, (1.0 - fy) * fx),
        (1, 0, fy * (1.0 - fx)),
        (1, 1, fy * fx),
    ):
        yi = y0 + dy
        xi = x0 + dx
        valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        yc = np.clip(yi, 0, h - 1)
        xc = np.clip(xi, 0, w - 1)
        out += np.where(valid, wgt * img[yc, xc], 0.0)
    return out


def _source_coords(shape: tuple[int, int], pose: Sim2Pose):
    """Inverse-mapped source coordinates for every output pixel."""
    h, w = shape
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    xd = xs - cx - pose.tx
    yd = ys - cy - pose.ty
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    inv = 1.0 / pose.scale
    # R_theta = [[c, s], [-s, c]]  =>  R_theta^{-1} = [[c, -s], [s, c]]
    xsrc = inv * (c * xd - s * yd) + cx
    ysrc = inv * (s * xd + c * yd) + cy
    return ysrc, xsrc


def warp(img: np.ndarray, pose: Sim2Pose) -> np.ndarray:
    """Apply a SIM(2) transform with inverse-mapped bilinear sampling.

    Content is scaled/rotated about the image center and shifted by
    (tx, ty); samples falling outside the source read 0. Output has the
    input's shape.
    """
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a non-empty 2D image, got shape {img.shape}")
    ysrc, xsrc = _source_coords(img.shape, pose)
    return bilinear_sample(np.asarray(img, dtype=np.float64), ysrc, xsrc)


def valid_mask(shape: tuple[int, int], pose: Sim2Pose) -> np.ndarray:
    """True where warp(img, pose) samples inside the source domain."""
    h, w = shape
    ysrc, xsrc = _source_coords(shape, pose)
    return (ysrc >= 0.0) & (ysrc <= h - 1.0) & (xsrc >= 0.0) & (xsrc <= w - 1.0)


def overlap_mask(shape: tuple[int, int], pose_a: Sim2Pose, pose_b: Sim2Pose) -> np.ndarray:
    """Pixels where warps by pose_a and pose_b both sample in-domain."""
    return valid_mask(shape, pose_a) & valid_mask(shape, pose_b)
