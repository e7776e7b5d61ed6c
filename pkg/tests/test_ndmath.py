import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pdcnet.ndmath import (
    Adam,
    AdamState,
    LstmParams,
    Tape,
    Tensor,
    adam_step,
    attention_pool,
    attention_weights,
    bce_loss,
    bilstm,
    dense,
    grad_check,
    lstm_cell,
)
from pdcnet.ndmath import tensor as nd
from pdcnet.rng import Rng

finite = st.floats(-5, 5, allow_nan=False)


def test_grad_check_square():
    x = Tensor(np.array(3.0))
    assert grad_check(lambda t: nd.mul(t, t), [x]) < 1e-8


def test_grad_check_detects_wrong_gradient():
    def bad(t):
        return nd._op([t], np.sum(t.data**2), lambda g: (g * t.data,))  # half the true derivative

    assert grad_check(bad, [Tensor(np.array([1.0, 2.0]))]) > 0.1


def test_dense_examples():
    x = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(dense(x, np.eye(3), np.zeros(3)).data, x)
    b = np.array([0.5, -1.0])
    np.testing.assert_array_equal(dense(np.zeros(3), np.ones((2, 3)), b).data, b)
    with pytest.raises(ValueError):
        dense(x, np.ones((2, 4)), b)
    with pytest.raises(ValueError):
        dense(x, np.ones((2, 3)), np.zeros(3))


def test_dense_gradient_tight():
    rng = Rng(3)
    x, W, b = (Tensor(rng.uniform_array(n).reshape(s) - 0.5) for n, s in ((5, (5,)), (15, (3, 5)), (3, (3,))))
    assert grad_check(lambda x, W, b: nd.sum(nd.tanh(dense(x, W, b))), [x, W, b]) < 1e-6


def test_bilstm_zero_params_fixed_point():
    z = LstmParams(Tensor(np.zeros((65, 4 * 3))), Tensor(np.zeros((3, 12))), Tensor(np.zeros(12)))
    X = Rng(1).uniform_array(4 * 65).reshape(4, 65)
    H = bilstm(X, z, z)
    assert H.shape == (4, 6) and not H.data.any()


def test_bilstm_single_step_halves():
    rng = Rng(2)
    p = LstmParams.init(rng, 65, 4)
    X = rng.uniform_array(65).reshape(1, 65)
    H = bilstm(X, p, p)
    h, _ = lstm_cell(X[0], Tensor(np.zeros(4)), Tensor(np.zeros(4)), p)
    np.testing.assert_array_equal(H.data[0, :4], h.data)
    np.testing.assert_array_equal(H.data[0, 4:], h.data)


def test_lstm_init_forget_bias():
    p = LstmParams.init(Rng(0), 65, 8)
    np.testing.assert_array_equal(p.b.data[8:16], 1.0)
    assert not p.b.data[:8].any() and not p.b.data[16:].any()
    limit = math.sqrt(6 / (65 + 32))
    assert np.abs(p.wx.data).max() <= limit


def test_attention_examples():
    h = np.array([[0.3, -1.2, 2.0]])
    t1, A = attention_pool(h, return_weights=True)
    assert A.data[0, 0] == 1.0
    np.testing.assert_array_equal(t1.data, h[0])
    H = np.tile([1.0, 2.0, -0.5], (5, 1))
    np.testing.assert_allclose(attention_pool(H).data, H[0], rtol=0, atol=1e-15)


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 5)), elements=finite))
def test_attention_rows_sum_to_one(H):
    A = attention_weights(H).data
    np.testing.assert_allclose(A.sum(axis=1), 1.0, atol=1e-12)


@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=finite), finite)
def test_softmax_shift_invariance(X, c):
    a = nd.softmax_rows(X).data
    b = nd.softmax_rows(X + c).data
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_bce_examples():
    for y in (0.0, 1.0):
        assert bce_loss(0.5, y).item() == pytest.approx(math.log(2), abs=1e-12)
        assert bce_loss(y, y).item() < 1e-6
    assert bce_loss(0.3, 1.0, pos_weight=1.0).item() == bce_loss(0.3, 1.0).item()
    assert bce_loss(0.3, 1.0, pos_weight=2.0).item() == pytest.approx(2 * bce_loss(0.3, 1.0).item())
    assert bce_loss(0.3, 0.0, pos_weight=2.0).item() == bce_loss(0.3, 0.0).item()


@given(st.floats(-30, 30), st.sampled_from([0.0, 1.0]))
def test_bce_nonnegative_and_finite(z, y):
    loss = bce_loss(nd.sigmoid(Tensor(np.array(z))), y).item()
    assert loss >= 0 and math.isfinite(loss)


def test_adam_first_step_magnitude():
    p = [np.zeros(4)]
    g = [np.array([0.5, -2.0, 1e-3, 7.0])]
    new, state = adam_step(p, g, AdamState(), lr=0.01)
    np.testing.assert_allclose(np.abs(new[0]), 0.01, rtol=1e-4)
    assert state.step == 1


def test_adam_zero_gradient_is_noop():
    p = [np.array([1.0, -2.0])]
    state = AdamState()
    for _ in range(50):
        p, state = adam_step(p, [np.zeros(2)], state, lr=0.1)
    np.testing.assert_array_equal(p[0], [1.0, -2.0])


def _quadratic_run(seed):
    rng = Rng(seed)
    w = Tensor(rng.uniform_array(6), requires_grad=True)
    target = rng.uniform_array(6)
    opt = Adam([w], lr=0.05)
    traj = []
    for _ in range(30):
        opt.zero_grad()
        with Tape() as tape:
            d = nd.sub(w, target)
            loss = nd.sum(nd.mul(d, d))
        tape.backward(loss)
        opt.step()
        traj.append(w.data.copy())
    return np.array(traj), loss.item()


def test_adam_deterministic_and_converging():
    a, la = _quadratic_run(8)
    b, lb = _quadratic_run(8)
    assert np.array_equal(a, b) and la == lb
    assert la < 0.5


def test_no_tape_means_no_graph():
    x = Tensor(np.ones(3), requires_grad=True)
    y = nd.sum(nd.mul(x, x))
    assert y.item() == 3.0
    with Tape() as tape:
        y = nd.sum(nd.mul(x, x))
    assert len(tape) > 0
    tape.backward(y)
    np.testing.assert_array_equal(x.grad, 2 * np.ones(3))


def test_broadcast_gradients():
    rng = Rng(4)
    a = Tensor(rng.uniform_array(12).reshape(3, 4))
    b = Tensor(rng.uniform_array(4))
    assert grad_check(lambda a, b: nd.sum(nd.mul(nd.add(a, b), nd.sub(a, b))), [a, b]) < 1e-8
