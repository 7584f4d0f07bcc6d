import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airsign.errors import ValidationError
from airsign.preprocess import (
    TARGET_H,
    TARGET_W,
    invert_normalize,
    preprocess,
    resize_bilinear,
)
from airsign.strokes import SignatureImage
from tests.helpers import bilinear_oracle


class TestResizeBilinear:
    def test_constant_image_stays_constant(self):
        for shape, out in [((3, 5), (7, 2)), ((10, 10), (4, 9)),
                           ((2, 2), (31, 17))]:
            img = np.full(shape, 7.0)
            got = resize_bilinear(img, *out)
            assert got.shape == out
            assert np.all(got == 7.0)

    def test_identity_when_same_size(self):
        rng = np.random.default_rng(0)
        img = rng.random((9, 13)) * 255
        assert np.array_equal(resize_bilinear(img, 9, 13), img)

    def test_1x2_to_1x3_matches_hand_oracle(self):
        img = np.array([[0.0, 255.0]])
        got = resize_bilinear(img, 1, 3)
        want = bilinear_oracle(img, 1, 3)
        assert np.allclose(got, want, atol=1e-12)
        # hand-evaluated under src=(dst+0.5)*(in/out)-0.5 with edge clamping
        assert np.allclose(got, [[0.0, 127.5, 255.0]], atol=1e-12)

    def test_random_resizes_match_oracle(self):
        rng = np.random.default_rng(3)
        for in_shape, out_shape in [((4, 6), (7, 5)), ((8, 3), (3, 8)),
                                    ((5, 5), (2, 9))]:
            img = rng.random(in_shape) * 255
            assert np.allclose(resize_bilinear(img, *out_shape),
                               bilinear_oracle(img, *out_shape), atol=1e-12)

    def test_zero_output_dims_rejected(self):
        with pytest.raises(ValidationError):
            resize_bilinear(np.ones((4, 4)), 0, 5)
        with pytest.raises(ValidationError):
            resize_bilinear(np.ones((4, 4)), 5, 0)

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError):
            resize_bilinear(np.ones((0, 4)), 2, 2)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25)
    def test_linearity(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.random((6, 7))
        b = rng.random((6, 7))
        al, be = rng.random(2) * 3
        lhs = resize_bilinear(al * a + be * b, 4, 9)
        rhs = al * resize_bilinear(a, 4, 9) + be * resize_bilinear(b, 4, 9)
        assert np.allclose(lhs, rhs, atol=1e-9)


class TestInvertNormalize:
    def test_background_maps_to_zero(self):
        assert invert_normalize(np.array([[255.0]]))[0, 0] == 0.0

    def test_ink_maps_to_one(self):
        assert invert_normalize(np.array([[0.0]]))[0, 0] == 1.0

    def test_midpoint(self):
        got = invert_normalize(np.array([[127.0]]))[0, 0]
        assert got == pytest.approx(128.0 / 255.0, abs=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            invert_normalize(np.array([[256.0]]))
        with pytest.raises(ValidationError):
            invert_normalize(np.array([[-1.0]]))


class TestPreprocess:
    @staticmethod
    def sig(h, w, ink_rows=()):
        px = np.full((h, w), 255, dtype=np.uint8)
        for r in ink_rows:
            px[r, :] = 0
        return SignatureImage(px)

    def test_output_shape_and_range(self):
        out = preprocess(self.sig(60, 80, ink_rows=(5, 20)))
        assert out.shape == (TARGET_H, TARGET_W)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_paper_size_extremes(self):
        for h, w in [(153, 258), (819, 1137)]:
            out = preprocess(self.sig(h, w, ink_rows=(10,)))
            assert out.shape == (155, 220)

    def test_all_background_maps_to_all_zero(self):
        out = preprocess(self.sig(40, 40))
        assert np.all(out == 0.0)

    def test_monotone_antitone_on_constant_images(self):
        # darker input (more ink) => larger normalized values everywhere
        lo = preprocess(SignatureImage(np.full((9, 9), 40, dtype=np.uint8)))
        hi = preprocess(SignatureImage(np.full((9, 9), 200, dtype=np.uint8)))
        assert np.all(lo >= hi)

    def test_custom_target_size(self):
        out = preprocess(self.sig(30, 44), out_h=32, out_w=44)
        assert out.shape == (32, 44)

    def test_deterministic(self):
        img = self.sig(64, 90, ink_rows=(3, 4, 30))
        assert np.array_equal(preprocess(img), preprocess(img))
