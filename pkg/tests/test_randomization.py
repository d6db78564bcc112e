import math

import numpy as np
import pytest

from simreg.estimator import estimate_sim2
from simreg.geometry import Sim2Pose, warp
from simreg.randomization import (
    PoseRange,
    inject_both,
    inject_original_only,
    sample_pose,
)

from conftest import pose_errors


class TestPoseRange:
    def test_defaults_cover_expected_intervals(self):
        r = PoseRange()
        assert (r.scale_min, r.scale_max) == (0.8, 1.2)
        assert (r.theta_min, r.theta_max) == (0.0, math.pi)
        assert r.t_max == 50.0

    def test_invalid_ranges_rejected(self):
        with pytest.raises(ValueError):
            PoseRange(scale_min=0.0)
        with pytest.raises(ValueError):
            PoseRange(scale_min=1.2, scale_max=0.8)
        with pytest.raises(ValueError):
            PoseRange(theta_max=4.0)
        with pytest.raises(ValueError):
            PoseRange(t_max=-1.0)


class TestSamplePose:
    def test_degenerate_range_is_exact(self):
        r = PoseRange(scale_min=1.05, scale_max=1.05, theta_min=0.7,
                      theta_max=0.7, t_max=0.0)
        p = sample_pose(r, seed=123)
        assert p == Sim2Pose(scale=1.05, theta=0.7, tx=0.0, ty=0.0)

    def test_seed_determinism(self):
        r = PoseRange()
        assert sample_pose(r, 42) == sample_pose(r, 42)
        assert sample_pose(r, 42) != sample_pose(r, 43)

    def test_theta_mean_over_many_samples(self):
        r = PoseRange()
        thetas = [sample_pose(r, s).theta for s in range(10_000)]
        assert abs(np.mean(thetas) - math.pi / 2) < 0.03

    def test_components_within_bounds(self):
        r = PoseRange()
        for seed in range(1000):
            p = sample_pose(r, seed)
            assert 0.8 <= p.scale <= 1.2
            assert 0.0 <= p.theta < math.pi
            assert -50.0 <= p.tx <= 50.0
            assert -50.0 <= p.ty <= 50.0

    @pytest.mark.parametrize("component,lo,hi", [
        ("scale", 0.8, 1.2),
        ("theta", 0.0, math.pi),
        ("tx", -50.0, 50.0),
        ("ty", -50.0, 50.0),
    ])
    def test_uniformity_ks(self, component, lo, hi):
        from scipy.stats import kstest

        r = PoseRange()
        values = [getattr(sample_pose(r, s), component) for s in range(1500)]
        stat = kstest(values, "uniform", args=(lo, hi - lo)).statistic
        assert stat <= 0.05


class TestInjection:
    def test_original_only_identity_range(self, texture):
        img = texture(32, seed=60)
        pair = inject_original_only(img, PoseRange.identity(), seed=5)
        assert np.array_equal(pair.randomized, pair.original)

    def test_original_only_reproducible(self, texture):
        img = texture(32, seed=61)
        pair = inject_original_only(img, PoseRange(), seed=7)
        again = inject_original_only(img, PoseRange(), seed=7)
        assert np.array_equal(pair.randomized, again.randomized)
        assert np.array_equal(pair.randomized, warp(img, pair.xi_r))

    def test_original_only_pose_within_range(self, texture):
        img = texture(16, seed=62)
        r = PoseRange(scale_min=0.9, scale_max=1.1, t_max=4.0)
        for seed in range(200):
            pair = inject_original_only(img, r, seed=seed)
            assert 0.9 <= pair.xi_r.scale <= 1.1
            assert abs(pair.xi_r.tx) <= 4.0 and abs(pair.xi_r.ty) <= 4.0

    def test_both_identity_range(self, texture):
        o = texture(32, seed=63)
        t = texture(32, seed=64)
        o2, t2, xi = inject_both(o, t, PoseRange.identity(), seed=9)
        assert np.array_equal(o2, o) and np.array_equal(t2, t)
        assert xi == Sim2Pose()

    def test_both_shape_mismatch(self, texture):
        with pytest.raises(ValueError):
            inject_both(texture(32, seed=1), texture(16, seed=2), PoseRange(), 0)

    def test_both_preserves_relative_pose_estimate(self, texture):
        # t = warp(o, xi_pair); after joint injection the recoverable
        # pose between the injected pair keeps xi_pair's rotation/scale
        o = texture(128, seed=65)
        xi_pair = Sim2Pose(scale=1.06, theta=math.radians(18.0), tx=6.0, ty=-9.0)
        t = warp(o, xi_pair)
        o2, t2, xi = inject_both(o, t, PoseRange(t_max=10.0), seed=11)
        est = estimate_sim2(o2, t2)
        theta_err, scale_err, _ = pose_errors(est.pose, xi_pair)
        assert theta_err <= 2.0 and scale_err <= 0.02

    def test_both_commutes_for_pure_shifts(self, texture):
        # with pure integer shifts everywhere, injection and pair shift
        # commute exactly on the interior
        o = texture(64, seed=66)
        t = warp(o, Sim2Pose(tx=5.0, ty=3.0))
        r = PoseRange(scale_min=1.0, scale_max=1.0, theta_min=0.0,
                      theta_max=0.0, t_max=6.0)
        o2, t2, xi = inject_both(o, t, r, seed=13)
        want = warp(o2, Sim2Pose(tx=5.0, ty=3.0))
        inner = slice(16, 48)
        assert np.abs(t2 - want)[inner, inner].max() < 2e-2
