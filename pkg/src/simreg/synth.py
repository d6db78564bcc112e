"""Synthetic weakly-paired corpus generation.

A pair is built from a source image by changing its style (kernel
disruption, Gaussian blur, gain/bias) and then transforming it with a
pose sampled from a PoseRange: ``target = T(f(original), xi)``. The pose
is written to a separate eval-only manifest so training code cannot
accidentally consume the ground truth.

Originals are quantized to 8 bits before the style/pose chain runs, so a
pair regenerated from its files is bit-identical to the stored one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import convolve, gaussian_filter

from .geometry import Sim2Pose, warp
from .pgm import dequantize, quantize, read_image, write_pgm
from .randomization import PoseRange, sample_pose
from .textures import smooth_texture


@dataclass(frozen=True)
class StyleSpec:
    """Deterministic style corruption: convolution, blur, gain/bias."""

    kernel: tuple[tuple[float, ...], ...] = ((1.0,),)
    blur_sigma: float = 0.0
    gain: float = 1.0
    bias: float = 0.0
    seed: int = 0

    def __post_init__(self):
        k = self.kernel_array()
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2 == 0:
            raise ValueError(f"kernel must be square with odd size, got {k.shape}")
        if self.blur_sigma < 0.0:
            raise ValueError(f"blur_sigma must be >= 0, got {self.blur_sigma}")

    def kernel_array(self) -> np.ndarray:
        return np.asarray(self.kernel, dtype=np.float64)

    @staticmethod
    def identity() -> "StyleSpec":
        return StyleSpec()

    @staticmethod
    def random(seed: int, kernel_size: int = 3, blur_sigma: float = 1.0,
               gain: float = 0.9, bias: float = 0.05) -> "StyleSpec":
        """Disruption kernel drawn once per spec, normalized to sum 1."""
        rng = np.random.default_rng(seed)
        k = rng.random((kernel_size, kernel_size))
        k /= k.sum()
        return StyleSpec(kernel=tuple(map(tuple, k.tolist())),
                         blur_sigma=blur_sigma, gain=gain, bias=bias, seed=seed)

    @staticmethod
    def pointwise(gain: float, bias: float) -> "StyleSpec":
        return StyleSpec(gain=gain, bias=bias)

    def to_json(self) -> dict:
        return {
            "kernel": [list(row) for row in self.kernel],
            "blur_sigma": self.blur_sigma,
            "gain": self.gain,
            "bias": self.bias,
            "seed": self.seed,
        }

    @staticmethod
    def from_json(d: dict) -> "StyleSpec":
        return StyleSpec(kernel=tuple(map(tuple, d["kernel"])),
                         blur_sigma=d["blur_sigma"], gain=d["gain"],
                         bias=d["bias"], seed=d["seed"])


def apply_style(img: np.ndarray, spec: StyleSpec) -> np.ndarray:
    """Convolve, blur, then gain/bias; output clamped to [0, 1].

    Boundary handling replicates edge pixels so sum-1 kernels keep
    constant images constant.
    """
    out = convolve(np.asarray(img, dtype=np.float64), spec.kernel_array(),
                   mode="nearest")
    if spec.blur_sigma > 0.0:
        out = gaussian_filter(out, spec.blur_sigma, mode="nearest")
    return np.clip(spec.gain * out + spec.bias, 0.0, 1.0)


@dataclass(frozen=True)
class WeakPair:
    """One generated pair with its (eval-only) ground-truth pose."""

    original: np.ndarray
    target: np.ndarray
    xi: Sim2Pose
    seed: int


def make_pair(img: np.ndarray, spec: StyleSpec, pose_range: PoseRange,
              seed: int) -> WeakPair:
    original = dequantize(quantize(img))
    xi = sample_pose(pose_range, seed)
    target = dequantize(quantize(warp(apply_style(original, spec), xi)))
    return WeakPair(original=original, target=target, xi=xi, seed=seed)


def _pose_range_json(r: PoseRange) -> dict:
    return {"scale_min": r.scale_min, "scale_max": r.scale_max,
            "theta_min": r.theta_min, "theta_max": r.theta_max, "t_max": r.t_max}


def pose_range_from_json(d: dict) -> PoseRange:
    return PoseRange(**d)


def _load_sources(source_dir, n: int, seed: int, size: int) -> list[np.ndarray]:
    if source_dir is None:
        return [smooth_texture(size, size, seed=seed * 7919 + i) for i in range(n)]
    paths = sorted(p for p in Path(source_dir).iterdir()
                   if p.suffix.lower() in (".pgm", ".png"))
    if not paths:
        raise ValueError(f"no readable source images in {source_dir}")
    images = [read_image(p) for p in paths]
    return [images[i % len(images)] for i in range(n)]


def generate_corpus(out_dir, n: int, seed: int,
                    spec: StyleSpec | None = None,
                    pose_range: PoseRange | None = None,
                    source_dir=None, size: int = 64) -> dict:
    """Write n pairs plus train and eval manifests; returns the manifest.

    Sources come from source_dir (PGM/PNG, cycled if fewer than n) or,
    when None, from seeded synthetic textures of the given size. Pair i
    uses seed + i, so every record regenerates independently.
    """
    spec = spec or StyleSpec.random(seed)
    pose_range = pose_range or PoseRange()
    out_dir = Path(out_dir)
    (out_dir / "originals").mkdir(parents=True, exist_ok=True)
    (out_dir / "targets").mkdir(parents=True, exist_ok=True)

    sources = _load_sources(source_dir, n, seed, size)
    records = []
    eval_records = []
    for i in range(n):
        pair = make_pair(sources[i], spec, pose_range, seed=seed + i)
        pair_id = f"pair_{i:04d}"
        orig_rel = f"originals/{pair_id}.pgm"
        targ_rel = f"targets/{pair_id}.pgm"
        write_pgm(out_dir / orig_rel, pair.original)
        write_pgm(out_dir / targ_rel, pair.target)
        base = {"id": pair_id, "original": orig_rel, "target": targ_rel,
                "style_id": "s0", "seed": pair.seed}
        records.append(base)
        eval_records.append({**base, "xi": {"s": pair.xi.scale, "theta": pair.xi.theta,
                                            "tx": pair.xi.tx, "ty": pair.xi.ty}})

    common = {"style_specs": {"s0": spec.to_json()},
              "pose_range": _pose_range_json(pose_range), "seed": seed}
    manifest = {"pairs": records, **common}
    eval_manifest = {"pairs": eval_records, **common}
    for name, payload in (("manifest.json", manifest),
                          ("eval_manifest.json", eval_manifest)):
        with open(out_dir / name, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return manifest


def load_manifest(manifest_path) -> dict:
    manifest_path = Path(manifest_path)
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    manifest["_dir"] = manifest_path.parent
    return manifest


def load_pairs(manifest: dict) -> list[dict]:
    """Materialize images (and poses, if present) for every record."""
    base = Path(manifest["_dir"])
    out = []
    for rec in manifest["pairs"]:
        entry = {
            "id": rec["id"],
            "original": read_image(base / rec["original"]),
            "target": read_image(base / rec["target"]),
            "seed": rec["seed"],
        }
        if "xi" in rec:
            x = rec["xi"]
            entry["xi"] = Sim2Pose(scale=x["s"], theta=x["theta"],
                                   tx=x["tx"], ty=x["ty"])
        out.append(entry)
    return out
