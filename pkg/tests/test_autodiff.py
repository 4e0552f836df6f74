import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbdnode import autodiff as ad
from conftest import central_diff, max_rel_err


def leaf(value):
    return ad.Graph().leaf(value)


class TestElementwise:
    def test_tanh_at_origin(self):
        x = leaf([0.0])
        y = ad.elementwise("tanh", x)
        assert y.value[0] == 0.0
        grads = ad.backward(y.sum())
        assert grads.of(x)[0] == 1.0

    def test_relu_negative(self):
        x = leaf([-3.5])
        y = ad.elementwise("relu", x)
        assert y.value[0] == 0.0
        assert ad.backward(y.sum()).of(x)[0] == 0.0

    def test_sigmoid_value_and_grad(self):
        x0 = 0.7
        x = leaf([x0])
        y = ad.elementwise("sigmoid", x)
        want = 1.0 / (1.0 + math.exp(-x0))
        assert abs(y.value[0] - want) < 1e-15

        def f(v):
            g = ad.Graph()
            return float(ad.elementwise("sigmoid", g.leaf(v)).sum().value)

        fd = central_diff(f, np.array([x0]))
        got = ad.backward(y.sum()).of(x)
        assert max_rel_err(got, fd) < 1e-7

    def test_shape_mismatch_raises(self):
        g = ad.Graph()
        a = g.leaf(np.zeros(3))
        b = g.leaf(np.zeros(4))
        with pytest.raises(ValueError):
            ad.elementwise("add", a, b)

    def test_nonfinite_rejected(self):
        with pytest.raises(ad.NonFiniteError):
            leaf([np.nan])
        x = leaf([1e308])
        with np.errstate(over="ignore"), pytest.raises(ad.NonFiniteError):
            ad.elementwise("scale", x, 1e10)

    @pytest.mark.parametrize("kind", ad.UNARY_KINDS)
    def test_unary_gradients_match_fd(self, kind):
        rng = np.random.default_rng(hash(kind) % 2**32)
        for _ in range(100):
            x0 = rng.uniform(-2.0, 2.0, size=5)
            if kind == "relu":  # keep away from the kink
                x0[np.abs(x0) < 1e-3] += 0.01
            w = rng.uniform(-1.0, 1.0, size=5)

            def f(v):
                g = ad.Graph()
                out = ad.elementwise(kind, g.leaf(v))
                return float((out * g.leaf(w)).sum().value)

            g = ad.Graph()
            xv = g.leaf(x0)
            loss = (ad.elementwise(kind, xv) * g.leaf(w)).sum()
            got = ad.backward(loss).of(xv)
            assert max_rel_err(got, central_diff(f, x0)) < 1e-6

    @pytest.mark.parametrize("kind", ad.BINARY_KINDS)
    def test_binary_gradients_match_fd(self, kind):
        rng = np.random.default_rng(hash(kind) % 2**32)
        for _ in range(100):
            a0 = rng.uniform(-2.0, 2.0, size=4)
            b0 = rng.uniform(-2.0, 2.0, size=4)
            w = rng.uniform(-1.0, 1.0, size=4)

            def f_a(v):
                g = ad.Graph()
                out = ad.elementwise(kind, g.leaf(v), g.leaf(b0))
                return float((out * g.leaf(w)).sum().value)

            def f_b(v):
                g = ad.Graph()
                out = ad.elementwise(kind, g.leaf(a0), g.leaf(v))
                return float((out * g.leaf(w)).sum().value)

            g = ad.Graph()
            av, bv = g.leaf(a0), g.leaf(b0)
            loss = (ad.elementwise(kind, av, bv) * g.leaf(w)).sum()
            grads = ad.backward(loss)
            assert max_rel_err(grads.of(av), central_diff(f_a, a0)) < 1e-6
            assert max_rel_err(grads.of(bv), central_diff(f_b, b0)) < 1e-6

    def test_scalar_broadcast(self):
        g = ad.Graph()
        a = g.leaf(np.arange(6.0).reshape(2, 3))
        s = g.leaf([2.0])
        out = ad.elementwise("mul", a, s)
        assert np.array_equal(out.value, a.value * 2.0)
        grads = ad.backward(out.sum())
        assert grads.of(s)[0] == a.value.sum()

    def test_row_broadcast_bias(self):
        g = ad.Graph()
        a = g.leaf(np.ones((4, 3)))
        b = g.leaf(np.array([1.0, 2.0, 3.0]))
        out = ad.elementwise("add", a, b)
        grads = ad.backward(out.sum())
        assert np.array_equal(grads.of(b), np.full(3, 4.0))


class TestMatmul:
    def test_identity(self):
        rng = np.random.default_rng(7)
        x0 = rng.normal(size=(3, 3))
        g = ad.Graph()
        out = ad.matmul(g.leaf(np.eye(3)), g.leaf(x0))
        assert np.allclose(out.value, x0)

    def test_hand_arithmetic(self):
        g = ad.Graph()
        out = ad.matmul(g.leaf([[1.0, 2.0], [3.0, 4.0]]), g.leaf([[1.0], [1.0]]))
        assert np.array_equal(out.value, [[3.0], [7.0]])

    def test_dimension_mismatch(self):
        g = ad.Graph()
        with pytest.raises(ValueError):
            ad.matmul(g.leaf(np.zeros((2, 3))), g.leaf(np.zeros((2, 3))))

    def test_grad_matches_fd(self):
        rng = np.random.default_rng(11)
        a0 = rng.normal(size=(3, 4))
        b0 = rng.normal(size=(4, 2))

        def f(v):
            g = ad.Graph()
            return float(ad.matmul(g.leaf(v), g.leaf(b0)).sum().value)

        g = ad.Graph()
        av = g.leaf(a0)
        loss = ad.matmul(av, g.leaf(b0)).sum()
        got = ad.backward(loss).of(av)
        assert max_rel_err(got, central_diff(f, a0)) < 1e-6


class TestBackward:
    def test_square_scalar(self):
        x = leaf([3.0])
        loss = ad.elementwise("square", x).sum()
        assert ad.backward(loss).of(x)[0] == 6.0

    def test_mse_affine_matches_fd(self):
        rng = np.random.default_rng(3)
        W0 = rng.normal(size=(4, 4))
        b0 = rng.normal(size=(1, 4))
        x0 = rng.normal(size=(1, 4))
        y0 = rng.normal(size=(1, 4))

        def build(g, Wv, bv):
            pred = ad.matmul(g.leaf(x0), Wv) + bv
            diff = pred - g.leaf(y0)
            return ad.elementwise("square", diff).sum()

        g = ad.Graph()
        Wv, bv = g.leaf(W0), g.leaf(b0)
        grads = ad.backward(build(g, Wv, bv))

        def f_w(v):
            gg = ad.Graph()
            return float(build(gg, gg.leaf(v), gg.leaf(b0)).value)

        def f_b(v):
            gg = ad.Graph()
            return float(build(gg, gg.leaf(W0), gg.leaf(v)).value)

        assert max_rel_err(grads.of(Wv), central_diff(f_w, W0)) < 1e-6
        assert max_rel_err(grads.of(bv), central_diff(f_b, b0)) < 1e-6

    def test_unrelated_var_gets_zero(self):
        g = ad.Graph()
        x = g.leaf([2.0])
        other = g.leaf([5.0])
        loss = ad.elementwise("square", x).sum()
        assert np.array_equal(ad.backward(loss).of(other), [0.0])

    def test_non_scalar_loss_rejected(self):
        x = leaf(np.ones(3))
        with pytest.raises(ValueError):
            ad.backward(x)

    @given(alpha=st.floats(-3, 3), beta=st.floats(-3, 3))
    @settings(max_examples=25, deadline=None)
    def test_backward_is_linear(self, alpha, beta):
        g = ad.Graph()
        x = g.leaf([0.3, -1.2])
        l1 = ad.elementwise("square", x).sum()
        l2 = ad.elementwise("sin", x).sum()
        combined = l1 * alpha + l2 * beta
        g1 = ad.backward(l1).of(x)
        g2 = ad.backward(l2).of(x)
        got = ad.backward(combined).of(x)
        assert np.allclose(got, alpha * g1 + beta * g2, rtol=1e-12, atol=1e-12)

    def test_bit_identical_replay(self):
        def run():
            rng = np.random.default_rng(42)
            g = ad.Graph()
            x = g.leaf(rng.normal(size=(2, 3)))
            W = g.leaf(rng.normal(size=(3, 3)))
            y = ad.elementwise("tanh", ad.matmul(x, W))
            return ad.backward(y.sum()).of(W)

        a, b = run(), run()
        assert np.array_equal(a, b) and a.tobytes() == b.tobytes()


class TestJacobian:
    def test_linear_map(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(3, 3))

        def f(x):
            col = ad.reshape(x, (3, 1))
            return ad.reshape(ad.matmul(x.graph.leaf(A), col), (3,))

        J = ad.jacobian(f, np.array([0.3, -0.7, 1.1]))
        assert np.allclose(J, A, atol=1e-12)

    def test_two_by_two_by_hand(self):
        def f(v):
            x = ad.narrow(v, 0, 0, 1)
            y = ad.narrow(v, 0, 1, 1)
            return ad.concat([ad.elementwise("sin", x), x * y])

        J = ad.jacobian(f, np.array([0.0, 2.0]))
        assert np.allclose(J, [[1.0, 0.0], [2.0, 0.0]], atol=1e-12)

    def test_mlp_jacobian_matches_fd(self):
        rng = np.random.default_rng(5)
        W1, b1 = rng.normal(size=(4, 6)), rng.normal(size=(1, 6))
        W2, b2 = rng.normal(size=(6, 3)), rng.normal(size=(1, 3))

        def f(x):
            g = x.graph
            h = ad.elementwise("tanh", ad.matmul(ad.reshape(x, (1, 4)), g.leaf(W1)) + g.leaf(b1))
            return ad.reshape(ad.matmul(h, g.leaf(W2)) + g.leaf(b2), (3,))

        x0 = rng.normal(size=4)
        J = ad.jacobian(f, x0)

        def scalar(i):
            def fi(v):
                g = ad.Graph()
                h = np.tanh(v.reshape(1, 4) @ W1 + b1)
                return float((h @ W2 + b2)[0, i])
            return fi

        J_fd = np.stack([central_diff(scalar(i), x0) for i in range(3)])
        assert max_rel_err(J, J_fd) < 1e-5


class TestStructuralOps:
    def test_concat_narrow_roundtrip_grads(self):
        g = ad.Graph()
        a = g.leaf([1.0, 2.0])
        b = g.leaf([3.0])
        joined = ad.concat([a, b])
        tail = ad.narrow(joined, 0, 1, 2)
        grads = ad.backward(ad.elementwise("square", tail).sum())
        assert np.allclose(grads.of(a), [0.0, 4.0])
        assert np.allclose(grads.of(b), [6.0])

    def test_reshape_grad(self):
        g = ad.Graph()
        a = g.leaf(np.arange(6.0))
        m = ad.reshape(a, (2, 3))
        grads = ad.backward(ad.elementwise("square", m).sum())
        assert np.allclose(grads.of(a), 2.0 * np.arange(6.0))
