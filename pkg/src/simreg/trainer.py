"""Desk-scale trainer for a parametric style translator.

Two small translators (a 5x5 kernel plus gain and bias each, <= 27
parameters) stand in for the forward and cycle networks. Gradients come
from central finite differences over the parameter vector: the
estimation chain is differentiable, but at this parameter count FD is
exact enough and avoids an autodiff subsystem entirely.

The forward pass mirrors the randomized-pose dataflow: translate the
original, recover its pose against the target with the estimator, and
penalize the recovered image; a second, independently-posed branch and
the two self-supervision heatmap losses complete the full objective.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import convolve

from .estimator import (
    EstimatorConfig,
    PreparedFixed,
    apply_estimate,
    estimate_rot_scale,
    estimate_sim2,
    prepare_fixed,
)
from .geometry import IDENTITY, Sim2Pose, overlap_mask, warp
from .losses import (
    LossReport,
    LossWeights,
    aggregate,
    constant_scorer,
    kld,
    l1_masked,
    realness_bce,
    xi_r_target,
)
from .randomization import PoseRange, sample_pose
from .synth import load_manifest, load_pairs, pose_range_from_json


@dataclass(frozen=True)
class TranslatorParams:
    """Conv kernel plus gain/bias; the whole trainable state."""

    kernel: tuple[tuple[float, ...], ...]
    gain: float = 1.0
    bias: float = 0.0

    @staticmethod
    def identity(kernel_size: int = 5) -> "TranslatorParams":
        k = np.zeros((kernel_size, kernel_size))
        k[kernel_size // 2, kernel_size // 2] = 1.0
        return TranslatorParams(kernel=tuple(map(tuple, k.tolist())))

    def kernel_array(self) -> np.ndarray:
        return np.asarray(self.kernel, dtype=np.float64)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.kernel_array().ravel(), [self.gain, self.bias]])

    @staticmethod
    def from_vector(vec: np.ndarray, kernel_size: int) -> "TranslatorParams":
        k = vec[: kernel_size * kernel_size].reshape(kernel_size, kernel_size)
        return TranslatorParams(kernel=tuple(map(tuple, k.tolist())),
                                gain=float(vec[-2]), bias=float(vec[-1]))

    def to_json(self) -> dict:
        return {"kernel": [list(r) for r in self.kernel],
                "gain": self.gain, "bias": self.bias}

    @staticmethod
    def from_json(d: dict) -> "TranslatorParams":
        return TranslatorParams(kernel=tuple(map(tuple, d["kernel"])),
                                gain=d["gain"], bias=d["bias"])


def translate(img: np.ndarray, params: TranslatorParams) -> np.ndarray:
    """Zero-padded convolution followed by gain/bias; never clamped."""
    out = convolve(np.asarray(img, dtype=np.float64), params.kernel_array(),
                   mode="constant", cval=0.0)
    return params.gain * out + params.bias


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "full"
    no_pr: bool = False
    no_cycle: bool = False
    no_l_xi_r: bool = False
    no_l_theta_s: bool = False
    learning_rate: float = 3e-3
    momentum: float = 0.5
    lr_decay: float = 1.0  # multiplicative per-step factor
    steps: int = 100
    batch_size: int = 4
    weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    beta: float = 100.0
    kernel_size: int = 5
    fd_step: float = 1e-3
    onepeak_sigma: float = 1.5
    injection_range: PoseRange | None = None  # default: the corpus range

    def __post_init__(self):
        if self.mode not in ("basic", "full"):
            raise ValueError(f"mode must be 'basic' or 'full', got {self.mode!r}")
        if self.learning_rate < 0.0:
            raise ValueError("learning rate must not be negative")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(beta=self.beta)


def _clip01(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def forward_losses(pair: dict, params_t: TranslatorParams, params_o: TranslatorParams,
                   xi_r: Sim2Pose, config: TrainConfig,
                   xi_ss: Sim2Pose | None = None, scorer=None,
                   prepared: dict | None = None) -> LossReport:
    """All loss terms for one pair under the configured mode/ablations.

    xi_r drives the pose-randomization branch (original alone); xi_ss
    drives the self-supervision branch (both images). Weak estimator
    peaks only lower the confidence, they never raise. ``prepared``
    may cache the fixed-side estimator pipelines for the target
    ("target") and the jointly-posed target ("target_rand").
    """
    scorer = scorer or constant_scorer
    prepared = prepared or {}
    ecfg = config.estimator_config()
    original = pair["original"]
    target = pair["target"]
    prep_t = prepared.get("target") or prepare_fixed(target, ecfg)

    terms: dict[str, float] = {}
    fake_t = translate(original, params_t)
    if not np.isfinite(fake_t).all():
        raise FloatingPointError("translator output non-finite; training diverged")

    score_fakes = [fake_t]
    map1 = None
    if config.no_pr:
        # no injection, no recovery: compare the raw fake to the target
        recovered_t = fake_t
        terms["trans"] = l1_masked(target, _clip01(fake_t))
        rec_fakes = []
    else:
        est1 = estimate_sim2(fake_t, prep_t, mode="soft", cfg=ecfg)
        map1 = est1.rot_scale_dist
        recovered_t = apply_estimate(fake_t, est1)
        mask1 = overlap_mask(target.shape, est1.pose, IDENTITY)
        terms["trans"] = l1_masked(target, _clip01(recovered_t), mask1)

        fake_t_rand = translate(warp(original, xi_r), params_t)
        est2 = estimate_sim2(fake_t_rand, prep_t, mode="soft", cfg=ecfg)
        recovered_t_rand = apply_estimate(fake_t_rand, est2)
        mask2 = overlap_mask(target.shape, est2.pose, IDENTITY)
        terms["trans"] += l1_masked(target, _clip01(recovered_t_rand), mask2)
        rec_fakes = [recovered_t, recovered_t_rand]

    if not config.no_cycle:
        cycled = translate(fake_t, params_o)
        terms["cycle"] = l1_masked(original, _clip01(cycled))

    # generator wants its fakes called true; the discriminator wants
    # every fake called false and the target true
    terms["realness_g"] = (realness_bce(scorer(fake_t), True)
                           + realness_bce(scorer(recovered_t), True))
    terms["realness_d"] = sum(realness_bce(scorer(f), False)
                              for f in score_fakes + rec_fakes)
    terms["realness_d"] += realness_bce(scorer(target), True)

    if config.mode == "full" and xi_ss is not None and not (
            config.no_l_xi_r and config.no_l_theta_s):
        fake_ss = translate(warp(original, xi_ss), params_t)
        if not config.no_l_theta_s:
            if map1 is None:
                map1 = estimate_rot_scale(fake_t, prep_t, mode="soft", cfg=ecfg).dist
            prep_t_ss = prepared.get("target_rand") or prepare_fixed(
                warp(target, xi_ss), ecfg)
            map2 = estimate_rot_scale(fake_ss, prep_t_ss, mode="soft", cfg=ecfg).dist
            terms["theta_s"] = kld(map1, map2)
        if not config.no_l_xi_r:
            map3 = estimate_rot_scale(fake_t, fake_ss, mode="soft", cfg=ecfg).dist
            target_peak = xi_r_target(xi_ss, original.shape, ecfg,
                                      sigma=config.onepeak_sigma)
            terms["xi_r"] = kld(map3, target_peak)

    report = aggregate(terms, config.weights, config.mode)
    total = report.total_full if config.mode == "full" else report.total_basic
    if not math.isfinite(total):
        raise FloatingPointError(f"non-finite loss: {report.to_json()}")
    return report


def grad_fd(objective, params: np.ndarray, h: float) -> np.ndarray:
    """Central finite-difference gradient of objective at params."""
    if h <= 0.0:
        raise ValueError(f"step h must be > 0, got {h}")
    params = np.asarray(params, dtype=np.float64)
    grad = np.empty_like(params)
    for i in range(params.size):
        bumped = params.copy()
        bumped[i] = params[i] + h
        f_plus = objective(bumped)
        bumped[i] = params[i] - h
        f_minus = objective(bumped)
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise FloatingPointError(f"non-finite objective at coordinate {i}")
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


@dataclass
class TrainResult:
    params_t: TranslatorParams
    params_o: TranslatorParams
    history: list[dict]


def _mean_report(reports: list[LossReport], weights: LossWeights,
                 mode: str) -> LossReport:
    terms = {name[2:]: statistics.fmean(getattr(r, name) for r in reports)
             for name in LossReport.TERM_FIELDS}
    return aggregate(terms, weights, mode)


def _total(report: LossReport, mode: str) -> float:
    return report.total_full if mode == "full" else report.total_basic


def train(manifest, config: TrainConfig, scorer=None) -> TrainResult:
    """Momentum gradient descent on the aggregate loss over a corpus.

    Deterministic per (corpus, config, seed): batches and injected poses
    come from one seeded generator, and each step's poses are held fixed
    across all finite-difference evaluations.
    """
    if isinstance(manifest, (str, Path)):
        manifest = load_manifest(manifest)
    pairs = load_pairs(manifest)
    if not pairs:
        raise ValueError("empty corpus")
    pose_range = config.injection_range or pose_range_from_json(manifest["pose_range"])
    ecfg = config.estimator_config()

    rng = np.random.default_rng(config.seed)
    k = config.kernel_size
    vec_t = TranslatorParams.identity(k).to_vector()
    vec_o = TranslatorParams.identity(k).to_vector()
    vel_t = np.zeros_like(vec_t)
    vel_o = np.zeros_like(vec_o)

    target_preps = {p["id"]: prepare_fixed(p["target"], ecfg) for p in pairs}
    history = []

    for step in range(config.steps):
        idx = rng.integers(0, len(pairs), size=config.batch_size)
        batch = []
        for i in idx:
            pair = pairs[i]
            xi_r = sample_pose(pose_range, rng)
            xi_ss = sample_pose(pose_range, rng)
            prepared = {"target": target_preps[pair["id"]]}
            if config.mode == "full" and not config.no_l_theta_s:
                prepared["target_rand"] = prepare_fixed(
                    warp(pair["target"], xi_ss), ecfg)
            batch.append((pair, xi_r, xi_ss, prepared))

        def batch_reports(pt: TranslatorParams, po: TranslatorParams):
            return [forward_losses(pair, pt, po, xi_r, config, xi_ss, scorer, prepared)
                    for pair, xi_r, xi_ss, prepared in batch]

        def objective_t(vec):
            pt = TranslatorParams.from_vector(vec, k)
            po = TranslatorParams.from_vector(vec_o, k)
            return statistics.fmean(_total(r, config.mode)
                                    for r in batch_reports(pt, po))

        def objective_o(vec):
            # only the cycle term depends on the cycle translator
            pt = TranslatorParams.from_vector(vec_t, k)
            po = TranslatorParams.from_vector(vec, k)
            return config.weights.cycle * statistics.fmean(
                l1_masked(pair["original"],
                          _clip01(translate(translate(pair["original"], pt), po)))
                for pair, _, _, _ in batch)

        report = _mean_report(batch_reports(TranslatorParams.from_vector(vec_t, k),
                                            TranslatorParams.from_vector(vec_o, k)),
                              config.weights, config.mode)
        total = _total(report, config.mode)
        if not math.isfinite(total) or total > 1e6:
            raise FloatingPointError(
                f"training diverged at step {step}: total={total!r}, "
                f"terms={report.to_json()}")
        history.append({"step": step, **report.to_json(), "total": total})

        lr = config.learning_rate * config.lr_decay ** step
        grad_t = grad_fd(objective_t, vec_t, config.fd_step)
        vel_t = config.momentum * vel_t - lr * grad_t
        vec_t = vec_t + vel_t
        if not config.no_cycle:
            grad_o = grad_fd(objective_o, vec_o, config.fd_step)
            vel_o = config.momentum * vel_o - lr * grad_o
            vec_o = vec_o + vel_o

    return TrainResult(params_t=TranslatorParams.from_vector(vec_t, k),
                       params_o=TranslatorParams.from_vector(vec_o, k),
                       history=history)


HISTORY_FIELDS = ("step", *LossReport.TERM_FIELDS, "total_basic", "total_full", "total")


def save_history(path, history: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=HISTORY_FIELDS)
        writer.writeheader()
        for row in history:
            writer.writerow({k: row[k] for k in HISTORY_FIELDS})


def save_params(path, params_t: TranslatorParams, params_o: TranslatorParams,
                config: TrainConfig | None = None) -> None:
    payload = {"params_t": params_t.to_json(), "params_o": params_o.to_json()}
    if config is not None:
        payload["seed"] = config.seed
        payload["mode"] = config.mode
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_params(path) -> tuple[TranslatorParams, TranslatorParams]:
    with open(path) as fh:
        payload = json.load(fh)
    return (TranslatorParams.from_json(payload["params_t"]),
            TranslatorParams.from_json(payload["params_o"]))


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


EVAL_FIELDS = ("id", "masked_l1", "gt_aligned_l1", "theta_err_deg",
               "scale_err_pct", "trans_err_px", "success",
               "conf_rot_scale", "conf_translation")


def evaluate(params_t: TranslatorParams, eval_manifest,
             config: TrainConfig | None = None, out_csv=None) -> dict:
    """Per-pair registration and style metrics against ground truth.

    For each pair: translate the original, estimate its pose against the
    target, and report the masked L1 of the recovered image, the pose
    error against the manifest's xi, and a ground-truth-aligned masked
    L1 that isolates style quality from estimator error. Success means
    pose error within (2 deg, 2%, 2 px).
    """
    config = config or TrainConfig()
    if isinstance(eval_manifest, (str, Path)):
        eval_manifest = load_manifest(eval_manifest)
    pairs = load_pairs(eval_manifest)
    if not pairs:
        raise ValueError("empty eval set")
    if any("xi" not in p for p in pairs):
        raise ValueError("manifest lacks ground-truth poses; pass the eval manifest")
    ecfg = config.estimator_config()

    rows = []
    for pair in pairs:
        fake = translate(pair["original"], params_t)
        target = pair["target"]
        xi = pair["xi"]
        est = estimate_sim2(fake, target, mode="soft", cfg=ecfg)
        recovered = apply_estimate(fake, est)
        mask = overlap_mask(target.shape, est.pose, IDENTITY)
        gt_mask = overlap_mask(target.shape, xi, IDENTITY)
        theta_err = abs(_wrap_angle(est.pose.theta - xi.theta))
        scale_err = abs(est.pose.scale / xi.scale - 1.0)
        trans_err = math.hypot(est.pose.tx - xi.tx, est.pose.ty - xi.ty)
        rows.append({
            "id": pair["id"],
            "masked_l1": l1_masked(target, _clip01(recovered), mask),
            "gt_aligned_l1": l1_masked(target, _clip01(warp(fake, xi)), gt_mask),
            "theta_err_deg": math.degrees(theta_err),
            "scale_err_pct": 100.0 * scale_err,
            "trans_err_px": trans_err,
            "success": int(theta_err <= math.radians(2.0) and scale_err <= 0.02
                           and trans_err <= 2.0),
            "conf_rot_scale": est.conf_rot_scale,
            "conf_translation": est.conf_translation,
        })

    numeric = [k for k in EVAL_FIELDS if k != "id"]
    summary = {f"mean_{k}": statistics.fmean(r[k] for r in rows) for k in numeric}
    summary.update({f"median_{k}": statistics.median(r[k] for r in rows)
                    for k in numeric})
    metrics = {"pairs": rows, "summary": summary,
               "success_rate": statistics.fmean(r["success"] for r in rows)}
    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=EVAL_FIELDS)
            writer.writeheader()
            writer.writerows({k: r[k] for k in EVAL_FIELDS} for r in rows)
    return metrics
