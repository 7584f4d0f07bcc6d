import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airsign.errors import DataError, ShapeError
from airsign.nn.net import build_preset
from airsign.verify import (
    LossConfig,
    SiameseModel,
    batch_loss,
    calibrate_threshold,
    contrastive_loss,
    distance,
    equal_error_rate,
    evaluate_distances,
    pair_distances,
    verify_user,
)
from tests.helpers import recount_oracle, sweep_threshold_oracle


class TestDistance:
    def test_identical_vectors(self):
        e = np.array([1.0, 2.0, 3.0])
        assert distance(e, e) == 0.0

    def test_unit_basis_vectors(self):
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, 1.0, 0.0])
        assert distance(e1, e2) == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(1)
        e1, e2 = rng.standard_normal((2, 17))
        want = np.sqrt(sum((a - b) ** 2 for a, b in zip(e1, e2)))
        assert distance(e1, e2) == pytest.approx(want, rel=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            distance(np.zeros(3), np.zeros(4))

    @given(seed=st.integers(0, 9999))
    @settings(max_examples=40)
    def test_symmetry_and_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = rng.standard_normal((3, 8))
        assert distance(a, b) == pytest.approx(distance(b, a), abs=1e-9)
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


class TestContrastiveLoss:
    def test_positive_pair_loss_is_distance(self):
        loss, grad = contrastive_loss([0.3], [1])
        assert loss[0] == 0.3
        assert grad[0] == 1.0

    def test_negative_pair_inside_margin(self):
        loss, grad = contrastive_loss([0.3], [0], LossConfig(margin=1.0))
        assert loss[0] == pytest.approx(0.7, abs=1e-15)
        assert grad[0] == -1.0

    def test_negative_pair_beyond_margin_saturates(self):
        loss, grad = contrastive_loss([1.5], [0], LossConfig(margin=1.0))
        assert loss[0] == 0.0
        assert grad[0] == 0.0

    def test_subgradient_zero_at_margin(self):
        loss, grad = contrastive_loss([1.0], [0], LossConfig(margin=1.0))
        assert loss[0] == 0.0
        assert grad[0] == 0.0

    def test_batch_mean(self):
        got = batch_loss([0.3, 0.3, 1.5], [1, 0, 0], LossConfig(margin=1.0))
        assert got == pytest.approx((0.3 + 0.7 + 0.0) / 3.0, abs=1e-15)

    def test_squared_variant(self):
        cfg = LossConfig(margin=1.0, squared=True)
        loss, grad = contrastive_loss([0.4, 0.4], [1, 0], cfg)
        assert loss[0] == pytest.approx(0.16, abs=1e-15)
        assert grad[0] == pytest.approx(0.8, abs=1e-15)
        assert loss[1] == pytest.approx(0.36, abs=1e-15)
        assert grad[1] == pytest.approx(-1.2, abs=1e-15)

    @given(d=st.floats(0, 10, allow_nan=False),
           label=st.integers(0, 1),
           margin=st.floats(0.01, 5, allow_nan=False))
    def test_non_negative_and_zero_conditions(self, d, label, margin):
        loss, _ = contrastive_loss([d], [label], LossConfig(margin=margin))
        assert loss[0] >= 0.0
        if loss[0] == 0.0:
            assert (label == 1 and d == 0.0) or (label == 0 and d >= margin)


class TestCalibrateThreshold:
    def test_separable_fixture(self):
        d = np.array([0.1, 0.2, 0.8, 0.9])
        labels = np.array([1, 1, 0, 0])
        tau = calibrate_threshold(d, labels)
        assert 0.2 <= tau < 0.8
        report = evaluate_distances(d, labels, tau)
        assert report.accuracy == 1.0
        assert report.far == 0.0 and report.frr == 0.0

    def test_four_point_overlap_fixture(self):
        d = np.array([0.1, 0.6, 0.4, 0.9])
        labels = np.array([1, 1, 0, 0])
        tau = calibrate_threshold(d, labels)
        assert tau == pytest.approx(0.25, abs=1e-12)
        assert evaluate_distances(d, labels, tau).accuracy == 0.75
        # exhaustive sweep confirms 0.75 is the best achievable accuracy
        _, best_acc = sweep_threshold_oracle(d, labels)
        assert best_acc == 0.75

    def test_translation_equivariance(self):
        d = np.array([0.1, 0.2, 0.8, 0.9])
        labels = np.array([1, 1, 0, 0])
        tau = calibrate_threshold(d, labels)
        tau_shifted = calibrate_threshold(d + 5.0, labels)
        assert tau_shifted == pytest.approx(tau + 5.0, abs=1e-12)
        assert (evaluate_distances(d + 5.0, labels, tau_shifted).accuracy
                == evaluate_distances(d, labels, tau).accuracy)

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            calibrate_threshold([0.1, 0.2], [1, 1])

    @given(seed=st.integers(0, 9999))
    @settings(max_examples=40)
    def test_never_worse_than_majority(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 40))
        d = rng.random(n)
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        tau = calibrate_threshold(d, labels)
        acc = evaluate_distances(d, labels, tau).accuracy
        prior = max(np.mean(labels == 1), np.mean(labels == 0))
        assert acc >= prior - 1e-12

    @given(seed=st.integers(0, 9999))
    @settings(max_examples=25)
    def test_matches_dense_sweep_accuracy(self, seed):
        rng = np.random.default_rng(seed)
        d = np.round(rng.random(14), 3)
        labels = rng.integers(0, 2, 14)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        tau = calibrate_threshold(d, labels)
        _, best = sweep_threshold_oracle(d, labels)
        assert evaluate_distances(d, labels, tau).accuracy == \
            pytest.approx(best, abs=1e-12)


class TestEvaluate:
    def test_perfect_counts(self):
        report = evaluate_distances([0.1, 0.2, 0.9, 0.8], [1, 1, 0, 0], 0.5)
        assert (report.tp, report.tn, report.fp, report.fn) == (2, 2, 0, 0)
        assert report.accuracy == 1.0
        assert report.far == 0.0 and report.frr == 0.0

    def test_far_definition(self):
        d = [0.1] + [0.9] * 9 + [0.2, 0.3]
        labels = [0] * 10 + [1, 1]
        report = evaluate_distances(d, labels, 0.5)
        assert report.fp == 1 and report.tn == 9
        assert report.far == pytest.approx(0.10, abs=1e-15)

    def test_matches_bruteforce_recount(self):
        rng = np.random.default_rng(7)
        d = rng.random(500)
        labels = rng.integers(0, 2, 500)
        tau = 0.47
        report = evaluate_distances(d, labels, tau)
        tp, tn, fp, fn = recount_oracle(d, labels, tau)
        assert (report.tp, report.tn, report.fp, report.fn) == (tp, tn, fp, fn)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(8)
        d = rng.random(50)
        labels = rng.integers(0, 2, 50)
        r1 = evaluate_distances(d, labels, 0.5)
        perm = rng.permutation(50)
        r2 = evaluate_distances(d[perm], labels[perm], 0.5)
        assert r1 == r2

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            evaluate_distances([], [], 0.5)

    def test_ties_accepted(self):
        report = evaluate_distances([0.5], [1], 0.5)
        assert report.tp == 1

    def test_report_json_has_confusion(self):
        import json
        report = evaluate_distances([0.1, 0.9], [1, 0], 0.5)
        payload = json.loads(report.to_json())
        assert payload["confusion"] == {"tp": 1, "fp": 0, "fn": 0, "tn": 1}


class TestEqualErrorRate:
    def test_separable_gives_zero(self):
        assert equal_error_rate([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0

    def test_fully_overlapping_is_half(self):
        # same distances for both classes: FAR+FRR = 1 at any threshold
        eer = equal_error_rate([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0])
        assert eer == pytest.approx(0.5, abs=1e-12)


class _StubModel:
    """Duck-typed embedder: flattens the input array."""

    def embed(self, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim <= 2:
            return arr.ravel()
        return arr.reshape(arr.shape[0], -1)


class TestVerifyUser:
    def test_identical_probe_accepted_at_zero(self):
        probe = np.array([1.0, 2.0])
        d, ok = verify_user(_StubModel(), [probe.copy()], probe, tau=0.5)
        assert d == 0.0 and ok

    def test_zero_threshold_rejects_distinct_probe(self):
        d, ok = verify_user(_StubModel(), [np.array([0.0, 0.0])],
                            np.array([1.0, 0.0]), tau=0.0)
        assert d > 0.0 and not ok

    def test_min_rule_over_references(self):
        probe = np.array([0.0, 0.0])
        refs = [np.array([0.9, 0.0]), np.array([0.2, 0.0])]
        d, ok = verify_user(_StubModel(), refs, probe, tau=0.5)
        assert d == pytest.approx(0.2, abs=1e-15)
        assert ok

    def test_no_references_rejected(self):
        with pytest.raises(DataError):
            verify_user(_StubModel(), [], np.zeros(2), tau=0.5)


class TestSiameseModel:
    def test_same_image_through_both_branches(self):
        net = build_preset("tiny", seed=1)
        model = SiameseModel(net)
        img = np.random.default_rng(0).random((1, 32, 44))
        ea = model.embed(img)
        eb = model.embed(img)  # second branch = same shared parameters
        assert np.array_equal(ea, eb)

    def test_tiny_embedding_length(self):
        model = SiameseModel(build_preset("tiny", seed=1))
        assert model.embedding_dim == 16
        e = model.embed(np.zeros((1, 32, 44)))
        assert e.shape == (16,)

    def test_batched_embed_matches_single(self):
        model = SiameseModel(build_preset("tiny", seed=2))
        x = np.random.default_rng(3).random((4, 1, 32, 44))
        batch = model.embed(x)
        singles = np.stack([model.embed(x[i]) for i in range(4)])
        assert np.allclose(batch, singles, atol=0)

    def test_shape_mismatch_rejected(self):
        model = SiameseModel(build_preset("tiny", seed=1))
        with pytest.raises(ShapeError):
            model.embed(np.zeros((1, 10, 10)))

    def test_pair_distances_vectorized(self):
        rng = np.random.default_rng(9)
        ea = rng.standard_normal((6, 5))
        eb = rng.standard_normal((6, 5))
        d = pair_distances(ea, eb)
        for i in range(6):
            assert d[i] == pytest.approx(distance(ea[i], eb[i]), rel=1e-12)
