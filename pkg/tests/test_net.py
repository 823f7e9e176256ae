import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfgen.charfn import random_gaussian_mixture_spec
from cfgen.kernel import KernelSpec, sample_frequencies
from cfgen.loss import TargetValues, loss_and_grad
from cfgen.net import (
    AdamState,
    MlpParams,
    NetArch,
    NonFiniteGradient,
    adam_step,
    backward,
    clip_by_norm,
    forward,
    init_mlp,
)
from cfgen.numkit import RngStream


def test_default_parameter_count():
    arch = NetArch.default(2)
    assert arch.sizes == [4, 300, 50, 2]
    assert arch.n_params == 4 * 300 + 300 + 300 * 50 + 50 + 50 * 2 + 2 == 16652


def test_init_is_deterministic():
    arch = NetArch.default(2)
    a = init_mlp(arch, RngStream(9))
    b = init_mlp(arch, RngStream(9))
    np.testing.assert_array_equal(a.theta, b.theta)
    assert not np.array_equal(a.theta, init_mlp(arch, RngStream(10)).theta)


def test_init_scale():
    p = init_mlp(NetArch(4, (400, 400), 2), RngStream(0))
    W1, b1 = p.layers[1]
    assert np.all(b1 == 0)
    assert abs(W1.var() * 400 / 2 - 1) < 0.02


def test_theory_guard():
    with pytest.raises(ValueError, match="7d\\+1"):
        NetArch(4, (8, 8), 2, theory_guard=True)
    with pytest.raises(ValueError):
        NetArch(4, (15,), 2, theory_guard=True)
    NetArch(4, (15, 15), 2, theory_guard=True)


def test_zero_params_give_zero_output(stream):
    arch = NetArch(3, (7, 5), 2)
    Y, _ = forward(MlpParams(arch, np.zeros(arch.n_params)), stream.normal((10, 3)))
    np.testing.assert_array_equal(Y, 0.0)


def test_hand_built_relu_layer(stream):
    # hidden layer = identity, output layer = identity: the net computes ReLU(z)
    arch = NetArch(3, (3,), 3)
    p = MlpParams(arch, np.zeros(arch.n_params))
    p.layers[0][0][...] = np.eye(3)
    p.layers[1][0][...] = np.eye(3)
    Z = stream.normal((20, 3))
    np.testing.assert_array_equal(forward(p, Z)[0], np.maximum(Z, 0))


def test_positive_homogeneity_without_biases(stream):
    arch = NetArch(2, (2,), 2)
    p = init_mlp(arch, stream.split("p"))
    Z = stream.split("z").normal((6, 2))
    Y1, Y2 = forward(p, Z)[0], forward(p, 2 * Z)[0]
    np.testing.assert_allclose(Y2, 2 * Y1, rtol=1e-14)
    p.layers[0][1][...] = [0.5, -0.5]
    assert not np.allclose(forward(p, 2 * Z)[0], 2 * forward(p, Z)[0])


def test_zero_upstream_gradient(stream):
    p = init_mlp(NetArch(4, (8, 8), 2), stream)
    _, cache = forward(p, stream.normal((5, 4)))
    np.testing.assert_array_equal(backward(p, cache, np.zeros((5, 2))), 0.0)


def test_single_linear_layer_gradient(stream):
    arch = NetArch(3, (), 2)
    p = init_mlp(arch, stream.split("p"))
    Z = stream.split("z").normal((7, 3))
    _, cache = forward(p, Z)
    g = MlpParams(arch, backward(p, cache, np.ones((7, 2))))
    gW, gb = g.layers[0]
    np.testing.assert_allclose(gW, np.repeat(Z.sum(0)[:, None], 2, axis=1), rtol=1e-14)
    np.testing.assert_array_equal(gb, [7.0, 7.0])


def test_backward_rejects_foreign_cache(stream):
    arch = NetArch(2, (4,), 1)
    p, q = init_mlp(arch, stream.split("a")), init_mlp(arch, stream.split("b"))
    _, cache = forward(p, np.ones((3, 2)))
    with pytest.raises(ValueError):
        backward(q, cache, np.ones((3, 1)))


@pytest.mark.parametrize("widths", [(16, 16), (7,), (5, 6, 4)])
def test_network_gradient_finite_differences(stream, widths):
    d = 2
    phi = random_gaussian_mixture_spec(d, 2, stream.split("phi"))
    target = TargetValues(sample_frequencies(KernelSpec(), stream.split("W"), 16, d), phi)
    p = init_mlp(NetArch(2 * d, widths, d), stream.split("init"))
    Z = stream.split("z").normal((16, 2 * d))
    Y, cache = forward(p, Z)
    grad = backward(p, cache, loss_and_grad(Y, target)[1])
    f = lambda th: loss_and_grad(forward(MlpParams(p.arch, th), Z)[0], target, with_grad=False)[0]
    h = 1e-5
    for i in stream.split("idx").choice(p.theta.size, 20):
        tp, tm = p.theta.copy(), p.theta.copy()
        tp[i] += h
        tm[i] -= h
        fd = (f(tp) - f(tm)) / (2 * h)
        if abs(fd) < 1e-9 and abs(grad[i]) < 1e-9:
            continue
        assert abs(grad[i] - fd) / max(abs(fd), abs(grad[i])) < 1e-6


def test_adam_zero_gradient_keeps_params(stream):
    p = init_mlp(NetArch(2, (3,), 1), stream)
    q, st_ = adam_step(p, AdamState.zeros(p.theta.size), np.zeros(p.theta.size), 0.1)
    np.testing.assert_array_equal(q.theta, p.theta)
    assert st_.t == 1


@settings(max_examples=30, deadline=None)
@given(g=st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=4, max_size=4), lr=st.floats(1e-4, 1.0))
def test_adam_first_step(g, lr):
    arch = NetArch(1, (1,), 1)
    p = MlpParams(arch, np.zeros(4))
    g = np.array(g)
    q, _ = adam_step(p, AdamState.zeros(4), g, lr)
    np.testing.assert_allclose(q.theta, -lr * g / (np.abs(g) + 1e-8), rtol=1e-12, atol=1e-300)


def test_adam_constant_gradient_limit():
    arch = NetArch(1, (), 1)
    p = MlpParams(arch, np.zeros(2))
    st_ = AdamState.zeros(2)
    g = np.array([0.3, -20.0])
    lr = 1e-3
    for _ in range(10_000):
        prev = p.theta
        p, st_ = adam_step(p, st_, g, lr)
    np.testing.assert_allclose(p.theta - prev, -lr * np.sign(g), rtol=1e-6)


def test_adam_rejects_nonfinite(stream):
    p = init_mlp(NetArch(2, (3,), 1), stream)
    g = np.zeros(p.theta.size)
    g[2] = np.inf
    with pytest.raises(NonFiniteGradient):
        adam_step(p, AdamState.zeros(p.theta.size), g, 0.1)
    assert issubclass(NonFiniteGradient, FloatingPointError)


def test_clip_by_norm():
    g = np.array([3.0, 4.0])
    np.testing.assert_allclose(clip_by_norm(g, 1.0), [0.6, 0.8])
    assert clip_by_norm(g, None) is g
    np.testing.assert_array_equal(clip_by_norm(g, 10.0), g)


def test_generator_tails_are_linear(stream):
    # a ReLU net is piecewise linear, so |N(z)| grows at most linearly in |z|
    p = init_mlp(NetArch(4, (32, 16), 2), stream.split("p"))
    Z = stream.split("z").normal((2000, 4))
    direction = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    for r in (10.0, 100.0, 1000.0):
        Y = forward(p, r * direction)[0]
        assert np.max(np.linalg.norm(Y, axis=1)) / r < 1e3
    big = forward(p, 1e3 * direction)[0]
    bigger = forward(p, 2e3 * direction)[0]
    ratio = np.linalg.norm(bigger, axis=1) / np.maximum(np.linalg.norm(big, axis=1), 1e-300)
    assert np.all(ratio < 2.0 + 1e-3)
