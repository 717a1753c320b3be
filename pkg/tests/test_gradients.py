"""Finite-difference checks for every layer and the assembled network.

The difference quotient is always evaluated in float64. For float32
parameters the analytic gradient is compared against the float64
quotient at a loose 1e-3, for float64 at 1e-6.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdprscan.errors import StateError
from gdprscan.nn.layers import (
    conv1d,
    conv1d_backward,
    cross_entropy,
    dense,
    dense_backward,
    maxpool_time,
    maxpool_time_backward,
    relu,
    relu_backward,
    softmax,
)
from gdprscan.nn.network import PARAM_ORDER, ConvTextNet, philox_rng

from gradcheck import away_from_relu_kink, fd_gradient, rel_error, separate_column_maxima

F32_TOL = 1e-3
F64_TOL = 1e-6


def _tiny_net(dtype=np.float32, seed=5):
    return ConvTextNet.init(
        embed_dim=8, n_filters=5, kernel_size=3, fc_units=4, n_classes=3,
        rng=philox_rng(seed), dropout_conv=0.1, dropout_fc=0.5, dtype=dtype,
    )


def _as_float64(net: ConvTextNet) -> ConvTextNet:
    params = {name: net.params[name].astype(np.float64) for name in PARAM_ORDER}
    return ConvTextNet(params, dropout_conv=net.dropout_conv,
                       dropout_fc=net.dropout_fc)


class TestLayerGradients:
    @given(st.integers(min_value=1, max_value=7),
           st.integers(min_value=1, max_value=5),
           st.integers(min_value=1, max_value=4),
           st.integers(min_value=1, max_value=5),
           st.integers(min_value=0, max_value=2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_conv1d_backward_matches_quotient(self, length, depth, kernel, filters, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(length, depth))
        w = rng.normal(size=(filters, kernel, depth))
        b = rng.normal(size=filters)
        r = rng.normal(size=(length, filters))
        grad_w, grad_b, grad_x = conv1d_backward(x, w, r)
        assert rel_error(grad_x, fd_gradient(lambda v: float(np.sum(conv1d(v, w, b) * r)), x)) <= F64_TOL
        assert rel_error(grad_w, fd_gradient(lambda v: float(np.sum(conv1d(x, v, b) * r)), w)) <= F64_TOL
        assert rel_error(grad_b, fd_gradient(lambda v: float(np.sum(conv1d(x, w, v) * r)), b)) <= F64_TOL

    @given(st.integers(min_value=1, max_value=8),
           st.integers(min_value=1, max_value=8),
           st.integers(min_value=0, max_value=2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_dense_backward_matches_quotient(self, n_in, n_out, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=n_in)
        w = rng.normal(size=(n_out, n_in))
        b = rng.normal(size=n_out)
        r = rng.normal(size=n_out)
        grad_w, grad_b, grad_x = dense_backward(x, w, r)
        assert rel_error(grad_x, fd_gradient(lambda v: float(np.sum(dense(v, w, b) * r)), x)) <= F64_TOL
        assert rel_error(grad_w, fd_gradient(lambda v: float(np.sum(dense(x, v, b) * r)), w)) <= F64_TOL
        assert rel_error(grad_b, fd_gradient(lambda v: float(np.sum(dense(x, w, v) * r)), b)) <= F64_TOL

    @given(st.integers(min_value=1, max_value=30),
           st.integers(min_value=0, max_value=2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_relu_backward_matches_quotient(self, size, seed):
        rng = np.random.default_rng(seed)
        x = away_from_relu_kink(rng.normal(size=size))
        r = rng.normal(size=size)
        grad = relu_backward(x, r)
        assert rel_error(grad, fd_gradient(lambda v: float(np.sum(relu(v) * r)), x)) <= F64_TOL

    @given(st.integers(min_value=1, max_value=6),
           st.integers(min_value=1, max_value=6),
           st.integers(min_value=0, max_value=2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_maxpool_backward_matches_quotient(self, length, features, seed):
        rng = np.random.default_rng(seed)
        x = separate_column_maxima(rng.normal(size=(length, features)))
        r = rng.normal(size=features)
        grad = maxpool_time_backward(x, r)
        assert rel_error(grad, fd_gradient(lambda v: float(np.sum(maxpool_time(v) * r)), x)) <= F64_TOL

    @given(st.integers(min_value=2, max_value=10),
           st.integers(min_value=0, max_value=2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_softmax_cross_entropy_matches_quotient(self, n, seed):
        rng = np.random.default_rng(seed)
        z = rng.normal(scale=2.0, size=n)
        gold = int(rng.integers(n))
        _, grad = cross_entropy(softmax(z), gold)
        fd = fd_gradient(lambda v: float(cross_entropy(softmax(v), gold)[0]), z)
        assert rel_error(grad, fd) <= F64_TOL


class TestNetworkGradients:
    def _check_assembled(self, dtype, tol, seed):
        net = _tiny_net(dtype=dtype, seed=seed)
        rng = np.random.default_rng(seed + 1)
        x = rng.normal(size=(2, 6, 8)).astype(dtype)
        golds = np.array([0, 2])
        net.forward_batch(x, train_mode=False)
        net.loss_batch(golds)
        grads = net.backward_batch(golds)
        net64 = _as_float64(net)
        x64 = x.astype(np.float64)
        coord_rng = np.random.default_rng(seed + 2)
        eps = 1e-6
        for name in PARAM_ORDER:
            param = net64.params[name]
            flat = param.reshape(-1)
            n_probe = min(10, flat.size)
            for idx in coord_rng.choice(flat.size, size=n_probe, replace=False):
                original = flat[idx]
                flat[idx] = original + eps
                net64.forward_batch(x64, train_mode=False)
                up = net64.loss_batch(golds)
                flat[idx] = original - eps
                net64.forward_batch(x64, train_mode=False)
                down = net64.loss_batch(golds)
                flat[idx] = original
                quotient = (up - down) / (2 * eps)
                analytic = float(grads[name].reshape(-1)[idx])
                denom = max(abs(quotient), abs(analytic), 1e-8)
                assert abs(analytic - quotient) / denom <= tol, (name, idx)

    def test_assembled_float32_matches_quotient(self):
        """Backprop through conv, pool and both dense layers agrees with
        the float64 difference quotient at sampled coordinates."""
        self._check_assembled(np.float32, F32_TOL, seed=9)

    def test_assembled_float64_matches_quotient(self):
        self._check_assembled(np.float64, F64_TOL, seed=13)

    def test_certain_correct_prediction_has_vanishing_gradients(self):
        """Pushing the gold logit far above the rest drives the loss to
        zero, and every parameter gradient goes to zero with it."""
        net = _tiny_net(dtype=np.float64, seed=3)
        net.params["fc2_b"][1] += 50.0
        x = np.random.default_rng(4).normal(size=(3, 6, 8))
        net.forward_batch(x, train_mode=False)
        grads = net.backward_batch(np.array([1, 1, 1]))
        for name in PARAM_ORDER:
            assert np.max(np.abs(grads[name])) <= 1e-8, name

    def test_no_gradient_flows_into_the_encoded_input(self):
        """The embedding matrix is frozen during classifier training, so
        the backward pass exposes parameter gradients only."""
        net = _tiny_net(seed=6)
        x = np.random.default_rng(8).normal(size=(2, 6, 8)).astype(np.float32)
        net.forward_batch(x, train_mode=False)
        grads = net.backward_batch(np.array([0, 1]))
        assert set(grads) == set(PARAM_ORDER)

    def test_backward_before_forward_rejected(self):
        net = _tiny_net(seed=7)
        with pytest.raises(StateError):
            net.backward_batch(np.array([0]))

    def test_gradient_dtype_follows_parameters(self):
        net = _tiny_net(dtype=np.float32, seed=10)
        x = np.random.default_rng(12).normal(size=(2, 6, 8)).astype(np.float32)
        net.forward_batch(x, train_mode=False)
        grads = net.backward_batch(np.array([1, 2]))
        assert all(grads[name].dtype == np.float32 for name in PARAM_ORDER)
