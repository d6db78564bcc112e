import math

import numpy as np
import pytest

from simreg.geometry import (
    IDENTITY,
    Sim2Pose,
    compose,
    inverse,
    overlap_mask,
    valid_mask,
    warp,
)


def pose_close(a, b, tol=1e-9):
    return (abs(a.scale - b.scale) < tol and abs(a.theta - b.theta) < tol
            and abs(a.tx - b.tx) < tol and abs(a.ty - b.ty) < tol)


class TestCompose:
    def test_identity_neutral(self):
        p = Sim2Pose(scale=1.7, theta=0.3, tx=4.0, ty=-2.0)
        assert pose_close(compose(IDENTITY, p), p)
        assert pose_close(compose(p, IDENTITY), p)

    def test_inverse_cancels(self):
        p = Sim2Pose(scale=0.8, theta=-0.9, tx=10.0, ty=3.0)
        assert pose_close(compose(p, inverse(p)), IDENTITY)
        assert pose_close(compose(inverse(p), p), IDENTITY)

    def test_hand_computed_matrix_product(self):
        # [[2,0,1],[0,2,0]] @ [[1,0,3],[0,1,0]] = [[2,0,7],[0,2,0]]
        a = Sim2Pose(scale=2.0, theta=0.0, tx=1.0, ty=0.0)
        b = Sim2Pose(scale=1.0, theta=0.0, tx=3.0, ty=0.0)
        assert pose_close(compose(a, b), Sim2Pose(scale=2.0, tx=7.0))

    def test_matches_matrix_product(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            a, b = (Sim2Pose(scale=float(rng.uniform(0.5, 2)),
                             theta=float(rng.uniform(-1.5, 1.5)),
                             tx=float(rng.uniform(-20, 20)),
                             ty=float(rng.uniform(-20, 20))) for _ in range(2))
            got = compose(a, b).matrix()
            assert np.abs(got - a.matrix() @ b.matrix()).max() < 1e-9

    def test_associativity(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a, b, c = (Sim2Pose(scale=float(rng.uniform(0.6, 1.6)),
                                theta=float(rng.uniform(-0.9, 0.9)),
                                tx=float(rng.uniform(-10, 10)),
                                ty=float(rng.uniform(-10, 10))) for _ in range(3))
            assert pose_close(compose(compose(a, b), c), compose(a, compose(b, c)))

    def test_invalid_pose_rejected(self):
        with pytest.raises(ValueError):
            Sim2Pose(scale=0.0)
        with pytest.raises(ValueError):
            Sim2Pose(theta=float("nan"))


class TestWarp:
    def test_identity_exact(self, texture):
        img = texture(64, seed=3)
        assert np.array_equal(warp(img, IDENTITY), img)

    def test_round_trip(self, texture):
        img = texture(128, seed=4, smoothness=2.5)
        p = Sim2Pose(scale=1.1, theta=0.5, tx=8.0, ty=-6.0)
        back = warp(warp(img, p), inverse(p))
        mask = overlap_mask(img.shape, p, inverse(p))
        assert np.abs(back - img)[mask].mean() <= 2e-2

    def test_center_delta_rotation_fixed_point(self):
        img = np.zeros((65, 65))
        img[32, 32] = 1.0
        out = warp(img, Sim2Pose(theta=math.pi / 2))
        assert out[32, 32] == pytest.approx(1.0)
        assert out.sum() == pytest.approx(1.0)

    def test_integer_translation_is_exact_shift(self, texture):
        img = texture(64, seed=5)
        out = warp(img, Sim2Pose(tx=7.0, ty=3.0))
        ref = np.zeros_like(img)
        ref[3:, 7:] = img[:-3, :-7]
        assert np.array_equal(out, ref)

    def test_shape_and_finiteness(self, texture):
        img = texture(48, seed=6)
        out = warp(img, Sim2Pose(scale=1.3, theta=2.0, tx=30.0, ty=-30.0))
        assert out.shape == img.shape
        assert np.isfinite(out).all()

    def test_rotation_direction_ccw(self):
        # +90 deg must bring content from the right edge to the top edge
        img = np.zeros((65, 65))
        img[32, 52] = 1.0  # 20 px right of center
        out = warp(img, Sim2Pose(theta=math.pi / 2))
        assert out[12, 32] == pytest.approx(1.0)

    def test_nonfinite_pose_errors(self, texture):
        with pytest.raises(ValueError):
            Sim2Pose(tx=float("inf"))
        with pytest.raises(ValueError):
            warp(np.zeros((0, 4)), IDENTITY)


class TestOverlapMask:
    def test_identity_all_true(self):
        mask = overlap_mask((32, 32), IDENTITY, IDENTITY)
        assert mask.all()

    def test_pure_shift_width(self):
        # +50 px shift on 256 wide leaves 206 valid columns
        mask = overlap_mask((256, 256), Sim2Pose(tx=50.0), IDENTITY)
        assert mask.all(axis=0).sum() == 206
        assert mask[0].sum() == 206

    def test_rotation_clips_corners(self):
        mask = overlap_mask((128, 128), Sim2Pose(theta=math.pi / 4), IDENTITY)
        assert 0 < mask.sum() < mask.size

    def test_valid_mask_matches_sample_domain(self, texture):
        img = texture(64, seed=7)
        p = Sim2Pose(scale=0.9, theta=0.7, tx=12.0, ty=-9.0)
        out = warp(np.ones_like(img), p)
        inside = valid_mask(img.shape, p)
        # interior of the valid region keeps full interpolation weight
        assert np.all(out[inside] > 0.0)
        assert np.all(out[~inside] < 1.0 + 1e-12)
