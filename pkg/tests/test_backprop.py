import math

import numpy as np
import pytest
import torch

from semtree.exceptions import InvalidArgument, NumericFailure
from semtree.factory import create_classifier, create_regressor
from semtree.network import (
    Gradients,
    add_l1,
    backward_classification,
    backward_regression,
    finite_difference_check,
    loss_cross_entropy,
    run_gradcheck,
    ste_counter,
)
from semtree.types import TaskType


def gradients(weights, biases=None) -> Gradients:
    weights = torch.as_tensor(weights, dtype=torch.float64)
    if biases is None:
        biases = torch.zeros(weights.shape[0], dtype=torch.float64)
    return Gradients(weights, torch.as_tensor(biases, dtype=torch.float64))


class TestCrossEntropy:
    def test_uniform_scores(self):
        assert loss_cross_entropy([0.0, 0.0, 0.0], 0) == pytest.approx(math.log(3))

    def test_confident_scores(self):
        assert loss_cross_entropy([10.0, 0.0], 0) == pytest.approx(math.log1p(math.exp(-10)), rel=1e-9)

    def test_decreases_with_margin(self):
        losses = [loss_cross_entropy([m, 0.0], 0) for m in (1.0, 5.0, 20.0, 100.0)]
        assert all(a > b for a, b in zip(losses, losses[1:]))
        assert losses[-1] < 1e-40

    def test_no_overflow(self):
        assert math.isfinite(loss_cross_entropy([1e4, -1e4], 1))

    def test_label_range(self):
        with pytest.raises(InvalidArgument):
            loss_cross_entropy([0.0, 1.0], 2)


class TestBackwardClassification:
    def setup_method(self):
        self.net = create_classifier(3, 3, num_features=4, seed=0)
        rng = np.random.default_rng(0)
        self.X = rng.standard_normal((16, 4))
        self.y = rng.integers(0, 3, size=16)

    def test_gradient_shapes(self):
        report, grads = backward_classification(self.net, self.X, self.y)
        assert grads.d_weights.shape == (self.net.num_internal, 4)
        assert grads.d_biases.shape == (self.net.num_internal,)
        assert grads.d_regressors is None
        assert report.batch_size == 16
        assert report.loss > 0

    def test_matches_finite_differences(self):
        report = finite_difference_check(self.net, self.X, self.y)
        assert report.max_rel_error < 1e-4
        assert report.by_definition == ()

    def test_no_straight_through_in_classification(self):
        ste_counter.reset()
        backward_classification(self.net, self.X, self.y)
        assert ste_counter.snapshot() == {'forward': 0, 'backward': 0}

    def test_does_not_touch_parameter_grads(self):
        backward_classification(self.net, self.X, self.y)
        assert all(p.grad is None for p in self.net.chain)

    def test_wrong_task(self):
        with pytest.raises(InvalidArgument, match="classification"):
            backward_classification(create_regressor(2, num_features=4, seed=0), self.X, self.y)

    def test_empty_batch(self):
        with pytest.raises(InvalidArgument, match="empty"):
            backward_classification(self.net, np.zeros((0, 4)), np.zeros(0))

    def test_non_finite_input(self):
        X = self.X.copy()
        X[5, 1] = np.inf
        with pytest.raises(NumericFailure) as info:
            backward_classification(self.net, X, self.y, batch_index=7)
        assert info.value.batch_index == 7
        assert info.value.row == 5

    def test_overparam_gradients_per_factor(self):
        net = create_classifier(2, 2, num_features=3, overparams=(6,), seed=1)
        X = np.random.default_rng(1).standard_normal((8, 3))
        y = np.arange(8) % 2
        _, grads = backward_classification(net, X, y)
        assert [tuple(g.shape) for g in grads.tensors()] == [(6, 4), (3, 6)]
        assert finite_difference_check(net, X, y).max_rel_error < 1e-4


class TestBackwardRegression:
    def setup_method(self):
        self.net = create_regressor(2, num_features=3, seed=4)
        rng = np.random.default_rng(4)
        self.X = rng.standard_normal((12, 3))
        self.y = rng.standard_normal(12)

    def test_straight_through_used_once(self):
        ste_counter.reset()
        backward_regression(self.net, self.X, self.y)
        assert ste_counter.snapshot() == {'forward': 1, 'backward': 1}

    def test_regressor_gradients_exact(self):
        report = finite_difference_check(self.net, self.X, self.y)
        assert report.max_rel_error < 1e-4
        assert report.by_definition == ('decision_weights', 'decision_biases')

    def test_decision_gradients_nonzero(self):
        _, grads = backward_regression(self.net, self.X, self.y)
        assert torch.count_nonzero(grads.d_weights) > 0
        assert grads.d_regressors.shape == self.net.regressors.shape

    def test_target_width_checked(self):
        with pytest.raises(InvalidArgument, match="columns"):
            backward_regression(self.net, self.X, np.zeros((12, 2)))


class TestGradientIdentities:
    def test_zero_parameters_zero_bias_gradient(self):
        X = np.random.default_rng(2).standard_normal((10, 3))
        net = create_classifier(2, 2, num_features=3, seed=0)
        with torch.no_grad():
            net.chain[0].zero_()
        _, grads = backward_classification(net, X, np.arange(10) % 2)
        assert torch.count_nonzero(grads.d_biases) == 0
        assert torch.count_nonzero(grads.d_weights) == 0

        net = create_regressor(2, num_features=3, seed=0)
        with torch.no_grad():
            net.chain[0].zero_()
            net.regressors.zero_()
        _, grads = backward_regression(net, X, np.linspace(-1.0, 1.0, 10))
        assert torch.count_nonzero(grads.d_biases) == 0

    def test_duplicated_rows(self):
        net = create_classifier(3, 3, num_features=4, seed=2)
        rng = np.random.default_rng(2)
        X, y = rng.standard_normal((12, 4)), rng.integers(0, 3, size=12)
        _, once = backward_classification(net, X, y)
        _, twice = backward_classification(net, np.vstack([X, X]), np.concatenate([y, y]))
        torch.testing.assert_close(twice.d_weights, once.d_weights, rtol=0, atol=1e-12)
        torch.testing.assert_close(twice.d_biases, once.d_biases, rtol=0, atol=1e-12)

    def test_height_one_regression_by_hand(self):
        net = create_regressor(1, num_features=2, seed=0)
        with torch.no_grad():
            net.chain[0].copy_(torch.tensor([[1.0, -0.5, 0.25]], dtype=torch.float64))
            net.regressors.copy_(torch.tensor([[[0.5, 2.0, -1.0], [1.5, -1.0, 0.5]]],
                                              dtype=torch.float64))
        # row 0 goes right (I = 1.75, prediction 2.5), row 1 goes left (I = -1.75, prediction 2.5)
        X = np.array([[2.0, 1.0], [-1.0, 2.0]])
        y = np.array([1.0, 0.5])
        report, grads = backward_regression(net, X, y)
        assert report.data_loss == pytest.approx((1.5 ** 2 + 2.0 ** 2) / 2)
        # dI = residual * R_right for a right turn, -residual * R_left for a left turn
        torch.testing.assert_close(grads.d_weights, torch.tensor([[12.5, -6.25]], dtype=torch.float64))
        torch.testing.assert_close(grads.d_biases, torch.tensor([-1.25], dtype=torch.float64))
        torch.testing.assert_close(grads.d_regressors,
                                   torch.tensor([[[-2.0, 4.0, 2.0], [3.0, 1.5, 1.5]]],
                                                dtype=torch.float64))

    def test_constant_target_fitted_exactly(self):
        net = create_regressor(2, num_features=3, seed=6)
        with torch.no_grad():
            net.regressors.zero_()
            net.regressors[..., -1] = 0.75
        X = np.random.default_rng(6).standard_normal((20, 3))
        report, grads = backward_regression(net, X, np.full(20, 0.75))
        assert report.data_loss == 0.0
        for tensor in (grads.d_weights, grads.d_biases, grads.d_regressors):
            assert torch.count_nonzero(tensor) == 0


class TestL1:
    def setup_method(self):
        self.net = create_classifier(1, 2, num_features=3, seed=0)
        with torch.no_grad():
            self.net.chain[0].copy_(torch.tensor([[2.0, -3.0, 0.0, 5.0]], dtype=torch.float64))

    def test_zero_lambda_unchanged(self):
        grads = gradients([[0.1, 0.2, 0.3]], [0.4])
        assert add_l1(grads, self.net, 0.0) is grads

    def test_sign_subgradient(self):
        grads = add_l1(gradients([[0.0, 0.0, 0.0]]), self.net, 1.0)
        assert grads.d_weights.tolist() == [[1.0, -1.0, 0.0]]

    def test_bias_excluded(self):
        grads = add_l1(gradients([[0.0, 0.0, 0.0]], [0.25]), self.net, 3.0)
        assert grads.d_biases.tolist() == [0.25]

    def test_negative_lambda(self):
        with pytest.raises(InvalidArgument, match=">= 0"):
            add_l1(gradients([[0.0, 0.0, 0.0]]), self.net, -0.1)

    def test_penalty_reported(self):
        X = np.random.default_rng(0).standard_normal((4, 3))
        report, _ = backward_classification(self.net, X, [0, 1, 0, 1], l1_lambda=0.5)
        assert report.penalty == pytest.approx(0.5 * 5.0)
        assert report.loss == pytest.approx(report.data_loss + 2.5)


class TestGradcheck:
    def test_classification_trials(self):
        summary = run_gradcheck(TaskType.CLASSIFICATION, trials=10, seed=3)
        assert summary.passed()
        assert len(summary.errors) == 10

    def test_regression_trials(self):
        summary = run_gradcheck(TaskType.REGRESSION, trials=5, seed=3)
        assert summary.passed()
        assert summary.to_dict()['by_definition'] == ['decision_weights', 'decision_biases']

    def test_error_kind_reported(self):
        summary = run_gradcheck(TaskType.CLASSIFICATION, trials=3, seed=1)
        data = summary.to_dict()
        assert data['error_kind'].startswith('relative')
        assert '1e-2' in data['error_kind']
        # a smaller denominator can only raise the error
        assert data['max_unfloored_rel_error'] >= data['max_rel_error']
        assert data['max_abs_error'] >= 0.0

    def test_floor_bounds_tiny_gradients(self):
        net = create_regressor(1, num_features=2, seed=0)
        X = np.random.default_rng(0).standard_normal((6, 2))
        report = finite_difference_check(net, X, np.zeros(6))
        assert report.max_abs_error < 1e-6
        assert report.max_rel_error <= report.max_unfloored_rel_error

    def test_zero_trials(self):
        with pytest.raises(InvalidArgument):
            run_gradcheck(trials=0)

    @pytest.mark.slow
    def test_default_trials(self):
        assert run_gradcheck().max_rel_error < 1e-4
