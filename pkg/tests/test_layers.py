"""Layer forward/backward pairs checked against finite differences."""

import math

import numpy as np
import pytest

from oscnet import layers
from oscnet.activations import ActivationId
from oscnet.errors import LabelError, ShapeError

A = ActivationId
RNG = np.random.default_rng(1234)


def fd_grad(f, x, h=1e-6):
    """Central-difference gradient of scalar f wrt array x."""
    g = np.zeros_like(x, dtype=np.float64)
    flat, gflat = x.ravel(), g.ravel()
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f()
        flat[i] = old - h
        fm = f()
        flat[i] = old
        gflat[i] = (fp - fm) / (2 * h)
    return g


class TestConv2d:
    def test_all_ones_kernel_sums_the_window(self):
        x = np.ones((1, 1, 3, 3))
        w = np.ones((1, 1, 3, 3))
        b = np.zeros(1)
        y, _ = layers.conv2d_forward(x, w, b)
        assert y[0, 0, 1, 1] == 9.0  # centre sees the full window
        assert y[0, 0, 0, 0] == 4.0  # corner sees a 2x2 patch through the padding

    def test_delta_kernel_is_identity(self):
        x = RNG.standard_normal((2, 3, 8, 8))
        w = np.zeros((3, 3, 3, 3))
        for c in range(3):
            w[c, c, 1, 1] = 1.0
        y, _ = layers.conv2d_forward(x, w, np.zeros(3))
        np.testing.assert_allclose(y, x, atol=1e-12)

    def test_gradients_match_finite_differences(self):
        x = RNG.standard_normal((1, 2, 5, 5))
        w = RNG.standard_normal((4, 2, 3, 3))
        b = RNG.standard_normal(4)
        dy = RNG.standard_normal((1, 4, 5, 5))

        def loss():
            return float((layers.conv2d_forward(x, w, b)[0] * dy).sum())

        _, cache = layers.conv2d_forward(x, w, b)
        dx, dw, db = layers.conv2d_backward(dy, cache)
        for analytic, arr in ((dw, w), (dx, x), (db, b)):
            numeric = fd_grad(loss, arr)
            rel = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))
            assert rel.max() < 1e-4

    def test_shape_errors_list_expected_vs_actual(self):
        with pytest.raises(ShapeError, match=r"\(K,3,3,3\)"):
            layers.conv2d_forward(np.zeros((1, 3, 8, 8)), np.zeros((4, 2, 3, 3)), np.zeros(4))
        with pytest.raises(ShapeError, match="4-d"):
            layers.conv2d_forward(np.zeros((3, 8, 8)), np.zeros((4, 3, 3, 3)), np.zeros(4))


class TestMaxPool:
    def test_block_maximum(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]]).reshape(1, 1, 2, 2)
        y, _ = layers.maxpool2_forward(x)
        assert y[0, 0, 0, 0] == 4.0

    def test_tie_routes_to_first_element(self):
        x = np.ones((1, 1, 2, 2))
        y, cache = layers.maxpool2_forward(x)
        dx = layers.maxpool2_backward(np.ones_like(y), cache)
        expected = np.zeros((1, 1, 2, 2))
        expected[0, 0, 0, 0] = 1.0
        np.testing.assert_array_equal(dx, expected)

    def test_backward_conserves_gradient_mass(self):
        x = RNG.standard_normal((1, 1, 4, 4))
        y, cache = layers.maxpool2_forward(x)
        dy = RNG.standard_normal(y.shape)
        dx = layers.maxpool2_backward(dy, cache)
        assert dx.sum() == pytest.approx(dy.sum(), rel=1e-12)

    def test_odd_spatial_dims_rejected(self):
        with pytest.raises(ShapeError, match="even"):
            layers.maxpool2_forward(np.zeros((1, 1, 5, 4)))


class TestDense:
    def test_identity_weights(self):
        x = RNG.standard_normal((4, 3))
        y, _ = layers.dense_forward(x, np.eye(3), np.zeros(3))
        np.testing.assert_array_equal(y, x)

    def test_zero_weights_broadcast_bias(self):
        y, _ = layers.dense_forward(np.ones((2, 3)), np.zeros((3, 5)), np.full(5, 7.0))
        np.testing.assert_array_equal(y, np.full((2, 5), 7.0))

    def test_gradients_match_finite_differences(self):
        x = RNG.standard_normal((2, 3))
        w = RNG.standard_normal((3, 4))
        b = RNG.standard_normal(4)
        dy = RNG.standard_normal((2, 4))

        def loss():
            return float((layers.dense_forward(x, w, b)[0] * dy).sum())

        _, cache = layers.dense_forward(x, w, b)
        dx, dw, db = layers.dense_backward(dy, cache)
        for analytic, arr in ((dx, x), (dw, w), (db, b)):
            np.testing.assert_allclose(analytic, fd_grad(loss, arr), atol=1e-4)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            layers.dense_forward(np.zeros((2, 3)), np.zeros((4, 5)), np.zeros(5))


class TestActivationLayer:
    def test_gcu_fixed_points(self):
        z = np.zeros((2, 3))
        y, _ = layers.activation_forward(z, A.GCU)
        np.testing.assert_array_equal(y, z)
        y, _ = layers.activation_forward(np.full((2, 2), math.pi), A.GCU)
        np.testing.assert_allclose(y, -math.pi)

    def test_squ_jacobian_diagonal(self):
        z = RNG.standard_normal((3, 4))
        _, cache = layers.activation_forward(z, A.SQU)
        dy = np.ones_like(z)
        dz = layers.activation_backward(dy, cache, A.SQU)
        np.testing.assert_allclose(dz, 2 * z + 1, atol=1e-12)

        h = 1e-6
        numeric = (layers.activation_forward(z + h, A.SQU)[0]
                   - layers.activation_forward(z - h, A.SQU)[0]) / (2 * h)
        np.testing.assert_allclose(dz, numeric, atol=1e-6)

    def test_kinks_use_zero_subgradient(self):
        z = np.array([-1.0, 0.0, 1.0])
        dz = layers.activation_backward(np.ones(3), z, A.RELU)
        np.testing.assert_array_equal(dz, [0.0, 0.0, 1.0])


class TestDropout:
    def test_rate_zero_is_identity(self):
        x = RNG.standard_normal((5, 5))
        y, mask = layers.dropout_forward(x, 0.0, train=True, rng=np.random.default_rng(0))
        assert mask is None
        np.testing.assert_array_equal(y, x)

    def test_eval_mode_is_identity(self):
        x = RNG.standard_normal((5, 5))
        y, mask = layers.dropout_forward(x, 0.5, train=False)
        assert mask is None
        np.testing.assert_array_equal(y, x)

    def test_inverted_scaling_keeps_the_mean(self):
        x = np.ones(1_000_000, dtype=np.float32)
        y, _ = layers.dropout_forward(x, 0.5, train=True, rng=np.random.default_rng(7))
        assert abs(float(y.mean()) - 1.0) < 0.01

    def test_survivors_scaled_by_keep_inverse(self):
        x = np.ones(1000)
        y, _ = layers.dropout_forward(x, 0.2, train=True, rng=np.random.default_rng(3))
        kept = y[y != 0]
        np.testing.assert_allclose(kept, 1.0 / 0.8)

    def test_backward_reuses_the_mask(self):
        x = np.ones((4, 4))
        y, mask = layers.dropout_forward(x, 0.5, train=True, rng=np.random.default_rng(5))
        dy = RNG.standard_normal((4, 4))
        np.testing.assert_array_equal(layers.dropout_backward(dy, mask), dy * mask)

    def test_rejects_rate_one(self):
        with pytest.raises(ValueError):
            layers.dropout_forward(np.ones(3), 1.0, train=True, rng=np.random.default_rng(0))


class TestSoftmaxCrossEntropy:
    def test_uniform_logits_give_log_k(self):
        loss, _ = layers.softmax_cross_entropy(np.zeros((4, 10)), np.arange(4) % 10)
        assert loss == pytest.approx(math.log(10.0), abs=1e-12)

    def test_saturated_true_class(self):
        logits = np.zeros((1, 10))
        logits[0, 3] = 50.0
        loss, _ = layers.softmax_cross_entropy(logits, np.array([3]))
        assert loss < 1e-9

    def test_gradient_rows_sum_to_zero(self):
        logits = RNG.standard_normal((6, 10))
        _, grad = layers.softmax_cross_entropy(logits, RNG.integers(0, 10, 6))
        np.testing.assert_allclose(grad.sum(axis=1), 0.0, atol=1e-12)

    def test_gradient_matches_finite_differences(self):
        logits = RNG.standard_normal((3, 10))
        labels = RNG.integers(0, 10, 3)

        def loss():
            return layers.softmax_cross_entropy(logits, labels)[0]

        _, grad = layers.softmax_cross_entropy(logits, labels)
        np.testing.assert_allclose(grad, fd_grad(loss, logits), atol=1e-6)

    def test_large_logits_stay_finite(self):
        logits = np.full((2, 10), 1e4)
        loss, grad = layers.softmax_cross_entropy(logits, np.array([0, 1]))
        assert math.isfinite(loss) and np.isfinite(grad).all()

    def test_out_of_range_label(self):
        with pytest.raises(LabelError, match="10"):
            layers.softmax_cross_entropy(np.zeros((1, 10)), np.array([10]))
