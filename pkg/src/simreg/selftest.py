"""Fast invariant checks for every module, run by ``simreg selftest``.

Each check is seeded and takes well under a few seconds; one line is
printed per check and the failure count is returned.
"""

from __future__ import annotations

import math

import numpy as np

from . import spectral
from .estimator import estimate_sim2, estimate_translation
from .geometry import IDENTITY, Sim2Pose, compose, inverse, overlap_mask, warp
from .logpolar import to_logpolar
from .losses import aggregate, kld, l1_masked, onepeak_target, realness_bce
from .phasecorr import (
    argmax_refined,
    correlate,
    expectation,
    expectation_grad,
    to_distribution,
)
from .randomization import PoseRange, inject_both, inject_original_only, sample_pose
from .synth import StyleSpec, apply_style, make_pair
from .textures import smooth_texture
from .trainer import TranslatorParams, grad_fd, translate


def _angle_dist(a: float, b: float, period: float = math.pi) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def _dft_direct(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    ky = np.exp(-2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    kx = np.exp(-2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    return ky @ img @ kx.T


def _checks():
    rng = np.random.default_rng(20240711)

    def geometry_group_laws():
        for _ in range(50):
            p = Sim2Pose(scale=float(rng.uniform(0.5, 2.0)),
                         theta=float(rng.uniform(-1.5, 1.5)),
                         tx=float(rng.uniform(-20, 20)), ty=float(rng.uniform(-20, 20)))
            r = compose(p, inverse(p))
            assert max(abs(r.scale - 1), abs(r.theta), abs(r.tx), abs(r.ty)) < 1e-9
        a, b, c = (Sim2Pose(scale=1.1, theta=0.3, tx=3, ty=-2),
                   Sim2Pose(scale=0.9, theta=-0.7, tx=-5, ty=1),
                   Sim2Pose(scale=1.2, theta=0.5, tx=2, ty=4))
        lhs, rhs = compose(compose(a, b), c), compose(a, compose(b, c))
        assert max(abs(lhs.scale - rhs.scale), abs(lhs.theta - rhs.theta),
                   abs(lhs.tx - rhs.tx), abs(lhs.ty - rhs.ty)) < 1e-9

    def geometry_integer_shift():
        img = smooth_texture(64, 64, 3)
        shifted = warp(img, Sim2Pose(tx=5, ty=-7))
        ref = np.zeros_like(img)
        ref[: 64 - 7, 5:] = img[7:, : 64 - 5]
        assert np.abs(shifted - ref).max() == 0.0
        assert np.isfinite(shifted).all() and shifted.shape == img.shape

    def spectral_oracle_and_parseval():
        img = rng.random((8, 8))
        spec = spectral.dft2(img)
        assert np.abs(spec - _dft_direct(img)).max() < 1e-9
        lhs = (img ** 2).sum() * img.size
        rhs = (np.abs(spec) ** 2).sum()
        assert abs(lhs - rhs) / rhs < 1e-6
        back = spectral.idft2(spec)
        assert np.abs(back - img).max() < 1e-9

    def spectral_shift_invariance():
        img = smooth_texture(32, 32, 4)
        a = spectral.magnitude_centered(spectral.dft2(img))
        b = spectral.magnitude_centered(spectral.dft2(np.roll(img, (5, -3), (0, 1))))
        assert np.abs(a - b).max() < 1e-9

    def logpolar_shifts():
        img = smooth_texture(128, 128, 5)
        mag = spectral.magnitude_centered(spectral.dft2(spectral.window_hann(img)))
        mag = spectral.highpass(mag)
        grid = to_logpolar(mag, 128, 128)
        rot = warp(img, Sim2Pose(theta=4 * math.pi / 128))
        mag_r = spectral.highpass(
            spectral.magnitude_centered(spectral.dft2(spectral.window_hann(rot))))
        grid_r = to_logpolar(mag_r, 128, 128)
        corr = correlate(grid.values, grid_r.values)  # (moving, fixed) order
        row, col = argmax_refined(corr)
        assert abs((row - 64) - 4) <= 0.5 and abs(col - 64) <= 0.5

    def phasecorr_roll_peak():
        img = smooth_texture(64, 64, 6)
        corr = correlate(np.roll(img, (7, 3), (0, 1)), img)
        r, c = np.unravel_index(np.argmax(corr), corr.shape)
        assert (r - 32, c - 32) == (7, 3)
        # unit self-peak needs energy in every bin, so use raw noise
        noise = rng.random((64, 64))
        assert abs(correlate(noise, noise).max() - 1.0) < 1e-6

    def phasecorr_readout():
        p = to_distribution(np.zeros((16, 16)), beta=1.0)
        assert np.abs(p.values - 1.0 / 256).max() < 1e-9
        grid = np.zeros((16, 16))
        grid[5, 9] = 1.0
        d = to_distribution(grid, beta=300.0)
        assert d.values[5, 9] >= 0.99
        row, col = expectation(d)
        assert abs(row - 5) < 1e-3 and abs(col - 9) < 1e-3

    def phasecorr_gradient():
        corr = rng.random((24, 24))
        for kind in ("translation", "logpolar"):
            g_row, g_col = expectation_grad(corr, beta=8.0, kind=kind)
            for _ in range(8):
                i, j = rng.integers(0, 24, 2)
                h = 1e-5
                for axis, g in ((0, g_row), (1, g_col)):
                    bumped = corr.copy()
                    bumped[i, j] += h
                    e_p = expectation(to_distribution(bumped, 8.0, kind))[axis]
                    bumped[i, j] -= 2 * h
                    e_m = expectation(to_distribution(bumped, 8.0, kind))[axis]
                    fd = (e_p - e_m) / (2 * h)
                    assert abs(fd - g[i, j]) <= 1e-4 * max(abs(fd), abs(g[i, j]), 1e-3)

    def estimator_recovery():
        img = smooth_texture(128, 128, 7)
        est = estimate_sim2(img, img)
        assert _angle_dist(est.pose.theta, 0.0) < math.radians(1.0)
        assert abs(est.pose.scale - 1.0) < 0.01
        assert math.hypot(est.pose.tx, est.pose.ty) < 0.5

        t = estimate_translation(img, np.roll(img, (4, -9), (0, 1)))
        assert abs(t.tx - (-9)) < 0.1 and abs(t.ty - 4) < 0.1

        pose = Sim2Pose(scale=1.1, theta=math.radians(35.0), tx=6.0, ty=-4.0)
        est = estimate_sim2(img, warp(img, pose))
        assert _angle_dist(est.pose.theta, pose.theta, 2 * math.pi) < math.radians(2.0)
        assert abs(est.pose.scale / pose.scale - 1.0) < 0.02
        assert math.hypot(est.pose.tx - pose.tx, est.pose.ty - pose.ty) < 2.0

    def randomization_sampling():
        pr = PoseRange()
        assert sample_pose(pr, 42) == sample_pose(pr, 42)
        thetas = np.array([sample_pose(pr, s).theta for s in range(1000)])
        assert abs(thetas.mean() - math.pi / 2) < 0.06
        sorted_u = np.sort(thetas) / math.pi
        ks = np.abs(sorted_u - (np.arange(1, 1001) - 0.5) / 1000).max() + 0.5 / 1000
        assert ks <= 0.05
        img = smooth_texture(32, 32, 8)
        rp = inject_original_only(img, pr, seed=3)
        assert np.array_equal(rp.randomized, warp(img, rp.xi_r))
        o2, t2, xi = inject_both(img, np.roll(img, 3, 0), pr, seed=4)
        assert np.array_equal(o2, warp(img, xi))

    def losses_sanity():
        u = np.full((10, 10), 0.01)
        assert kld(u, u) <= 1e-9
        delta = np.zeros((10, 10))
        delta[3, 4] = 1.0
        assert abs(kld(delta, u) - math.log(100)) < 1e-6
        peak = onepeak_target((32, 32), (10.0, 20.0), sigma=1.5)
        assert abs(peak.values.sum() - 1.0) < 1e-9
        row, col = expectation(peak)
        assert abs(row - 10) < 1e-3 and abs(col - 20) < 1e-3
        assert abs(realness_bce(0.5, True) - math.log(2)) < 1e-12
        rep = aggregate({"trans": 1.0, "cycle": 2.0, "xi_r": 3.0}, mode="full")
        assert rep.total_basic == 3.0 and rep.total_full == 6.0

    def synth_commutativity():
        f = StyleSpec.pointwise(gain=0.9, bias=0.05)
        for seed in range(5):
            img = smooth_texture(64, 64, 100 + seed)
            xi = sample_pose(PoseRange(t_max=10.0), seed)
            a = apply_style(warp(img, xi), f)
            b = warp(apply_style(img, f), xi)
            mask = overlap_mask(img.shape, xi, IDENTITY)
            assert l1_masked(a, b, mask) <= 2e-2
        pair_a = make_pair(smooth_texture(32, 32, 9), StyleSpec.random(1),
                           PoseRange(t_max=5.0), seed=11)
        pair_b = make_pair(smooth_texture(32, 32, 9), StyleSpec.random(1),
                           PoseRange(t_max=5.0), seed=11)
        assert np.array_equal(pair_a.target, pair_b.target)

    def trainer_basics():
        params = TranslatorParams.identity(5)
        img = smooth_texture(32, 32, 10)
        assert np.abs(translate(img, params) - img).max() == 0.0
        grad = grad_fd(lambda v: float(v @ v), np.array([1.0, -2.0, 3.0]), 1e-4)
        assert np.abs(grad - np.array([2.0, -4.0, 6.0])).max() < 1e-6

    return [
        ("geometry: group laws", geometry_group_laws),
        ("geometry: integer shift exact", geometry_integer_shift),
        ("spectral: DFT oracle + Parseval", spectral_oracle_and_parseval),
        ("spectral: magnitude shift invariance", spectral_shift_invariance),
        ("logpolar: rotation maps to row shift", logpolar_shifts),
        ("phasecorr: roll peak + unit self peak", phasecorr_roll_peak),
        ("phasecorr: softmax readout", phasecorr_readout),
        ("phasecorr: analytic gradient", phasecorr_gradient),
        ("estimator: identity/shift/sim2 recovery", estimator_recovery),
        ("randomization: determinism + uniformity", randomization_sampling),
        ("losses: kld/onepeak/bce/aggregate", losses_sanity),
        ("synth: commutativity + determinism", synth_commutativity),
        ("trainer: identity translate + fd gradient", trainer_basics),
    ]


def run(verbose: bool = True) -> int:
    failures = 0
    for name, check in _checks():
        try:
            check()
        except Exception as exc:  # report every failure, keep going
            failures += 1
            if verbose:
                print(f"[FAIL] {name}: {exc!r}")
        else:
            if verbose:
                print(f"[ok]   {name}")
    if verbose:
        print("selftest:", "FAILED" if failures else "passed",
              f"({failures} failure(s))" if failures else "")
    return failures
