import math

import numpy as np
import pytest

from activelabel import core, evaluation, model, strategy


def make_linear(weight_rows, bias):
    w = np.array(weight_rows, dtype=float)
    b = np.array(bias, dtype=float)
    return model.ClassifierParams(
        architecture="softmax_linear",
        num_classes=w.shape[1],
        dim=w.shape[0],
        hidden_units=0,
        weights=(w, b),
    )


def tiny_dataset(points, num_classes=2):
    samples = tuple(
        core.Sample(id=i, features=np.array(f, dtype=float), true_label=y)
        for i, (f, y) in enumerate(points)
    )
    return core.Dataset(name="tiny", num_classes=num_classes, dim=len(points[0][0]), samples=samples)


class TestAccuracy:
    def test_perfect_predictor(self):
        # huge weights along x0 make the prediction follow sign(x0)
        params = make_linear([[50.0, -50.0]], [0.0, 0.0])
        ds = tiny_dataset([([1.0], 0), ([2.0], 0), ([-1.0], 1), ([-3.0], 1)])
        assert evaluation.accuracy(params, ds) == 1.0

    def test_argmax_tie_breaks_to_class_zero(self):
        params = make_linear([[0.0, 0.0]], [0.0, 0.0])
        ds = tiny_dataset([([1.0], 0), ([2.0], 1), ([-1.0], 0), ([-3.0], 1)])
        assert evaluation.accuracy(params, ds) == 0.5

    def test_two_of_three_correct(self):
        params = make_linear([[50.0, -50.0]], [0.0, 0.0])
        ds = tiny_dataset([([1.0], 0), ([2.0], 0), ([3.0], 1)])
        assert evaluation.accuracy(params, ds) == pytest.approx(2.0 / 3.0)

    def test_empty_dataset_rejected(self):
        params = make_linear([[1.0, 0.0]], [0.0, 0.0])
        with pytest.raises(ValueError):
            evaluation.accuracy(
                params,
                core.Dataset(name="e", num_classes=2, dim=1, samples=()),
            )


class TestRepresentativenessDivergence:
    def test_identical_params_give_zero(self):
        params = make_linear([[1.0, -2.0], [0.5, 0.25]], [0.1, -0.1])
        ds = tiny_dataset([([0.3, -1.2], 0), ([2.0, 0.7], 1)])
        assert evaluation.representativeness_divergence(params, params, ds) == 0.0

    def test_disjoint_one_hot_outputs_hit_upper_bound(self):
        always_zero = make_linear([[0.0, 0.0]], [500.0, -500.0])
        always_one = make_linear([[0.0, 0.0]], [-500.0, 500.0])
        ds = tiny_dataset([([1.0], 0), ([-2.0], 1), ([0.5], 0)])
        assert evaluation.representativeness_divergence(always_zero, always_one, ds) == pytest.approx(2.0)

    def test_hand_computed_point(self):
        # p=[0.6,0.4] vs q=[0.5,0.5] -> 0.1^2 + (-0.1)^2 = 0.02
        p_model = make_linear([[0.0, 0.0]], [math.log(0.6 / 0.4), 0.0])
        q_model = make_linear([[0.0, 0.0]], [0.0, 0.0])
        ds = tiny_dataset([([1.0], 0)])
        assert evaluation.representativeness_divergence(p_model, q_model, ds) == pytest.approx(0.02, abs=1e-12)

    def test_symmetric(self):
        a = make_linear([[1.0, -1.0], [0.3, 0.6]], [0.0, 0.2])
        b = make_linear([[-0.5, 0.5], [1.0, -0.2]], [0.1, 0.0])
        rng = np.random.default_rng(0)
        ds = tiny_dataset([(rng.normal(size=2), 0) for _ in range(10)])
        assert evaluation.representativeness_divergence(a, b, ds) == pytest.approx(
            evaluation.representativeness_divergence(b, a, ds)
        )

    def test_bounded_by_two(self):
        rng = np.random.default_rng(1)
        ds = tiny_dataset([(rng.normal(size=2) * 5, 0) for _ in range(50)])
        for _ in range(20):
            a = make_linear(rng.normal(size=(2, 2)) * 10, rng.normal(size=2) * 10)
            b = make_linear(rng.normal(size=(2, 2)) * 10, rng.normal(size=2) * 10)
            d = evaluation.representativeness_divergence(a, b, ds)
            assert 0.0 <= d <= 2.0

    def test_dimension_mismatch(self):
        a = make_linear([[1.0, 0.0]], [0.0, 0.0])
        b = make_linear([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
        ds = tiny_dataset([([1.0], 0)])
        with pytest.raises(ValueError, match="dimension mismatch"):
            evaluation.representativeness_divergence(a, b, ds)


class TestBaselineSelect:
    def probs(self):
        return np.array(
            [
                [0.9, 0.1],    # confident
                [0.5, 0.5],    # maximally uncertain
                [0.7, 0.3],
                [0.55, 0.45],
            ]
        )

    def test_least_confidence_matches_select_top(self):
        ids = [10, 11, 12, 13]
        p = self.probs()
        got = evaluation.baseline_select("least_confidence", ids, p, 3)
        scores = [strategy.UncertaintyScore(i, strategy.uncertainty(row)) for i, row in zip(ids, p)]
        assert got == strategy.select_top(scores, 3)
        assert got == [11, 13, 12]

    def test_entropy_prefers_uniform_over_peaked(self):
        got = evaluation.baseline_select("entropy", [0, 1], np.array([[0.5, 0.5], [0.9, 0.1]]), 1)
        assert got == [0]

    def test_margin_prefers_small_gap(self):
        got = evaluation.baseline_select("margin", [0, 1, 2], self.probs()[:3], 2)
        assert got == [1, 2]

    def test_random_is_seeded_and_respects_exclusions(self):
        ids = list(range(50))
        p = np.full((50, 2), 0.5)
        a = evaluation.baseline_select("random", ids, p, 10, excluded={1, 2, 3}, seed=9)
        b = evaluation.baseline_select("random", ids, p, 10, excluded={1, 2, 3}, seed=9)
        assert a == b
        assert not set(a) & {1, 2, 3}
        assert len(set(a)) == 10
        c = evaluation.baseline_select("random", ids, p, 10, excluded={1, 2, 3}, seed=10)
        assert a != c

    def test_pool_exhausted(self):
        with pytest.raises(strategy.PoolExhaustedError):
            evaluation.baseline_select("random", [0, 1], np.full((2, 2), 0.5), 2, excluded={0})

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown baseline"):
            evaluation.baseline_select("surprise", [0], np.array([[0.5, 0.5]]), 1)


class TestSignTest:
    def test_all_positive(self):
        assert evaluation.sign_test([0.1, 0.2, 0.3, 0.1, 0.5]) == pytest.approx(1 / 32)

    def test_four_of_five(self):
        assert evaluation.sign_test([0.1, 0.2, -0.3, 0.1, 0.5]) == pytest.approx(6 / 32)

    def test_zeros_are_discarded(self):
        assert evaluation.sign_test([0.1, 0.0, 0.2]) == pytest.approx(1 / 4)

    def test_empty_is_inconclusive(self):
        assert evaluation.sign_test([]) == 1.0
        assert evaluation.sign_test([0.0, 0.0]) == 1.0

    def test_all_negative(self):
        assert evaluation.sign_test([-1.0, -2.0, -3.0]) == pytest.approx(1.0)
