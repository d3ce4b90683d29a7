import math

import numpy as np
import pytest

from helpers import fd_gradient
from rnnbench.classifier import (ClassifierParams, Prediction, backward,
                                 cross_entropy, dropout, forward)
from rnnbench.errors import (InvalidConfigError, InvalidLabelError,
                             InvalidShapeError)
from rnnbench.numkit import ParamTensor, Rng, max_rel_error


def make_params(k=4, dim=5, seed=3):
    return ClassifierParams(k, dim, Rng(seed))


def test_uniform_softmax_at_zero_params():
    p = make_params(k=4, dim=3)
    p.W.value[...] = 0.0
    p.b.value[...] = 0.0
    pred = forward(p, np.array([1.0, -2.0, 0.5]))
    assert np.allclose(pred.probs, 0.25, atol=1e-15)


def test_softmax_shift_invariance():
    p = make_params(k=3, dim=3)
    h = np.array([0.2, -0.4, 0.9])
    base = forward(p, h).probs
    p.b.value += 321.5          # shift all logits by a constant
    shifted = forward(p, h).probs
    assert np.abs(base - shifted).max() < 1e-12


def test_softmax_closed_form_log_logits():
    p = make_params(k=3, dim=3)
    p.W.value[...] = 0.0
    p.b.value[...] = np.log([1.0, 2.0, 3.0])
    pred = forward(p, np.zeros(3))
    assert np.allclose(pred.probs, [1 / 6, 2 / 6, 3 / 6], atol=1e-14)
    assert pred.label == 2


def test_softmax_normalization_large_logits():
    p = make_params(k=6, dim=2)
    rng = Rng(9)
    for _ in range(200):
        p.b.value[...] = rng.uniform(-500.0, 500.0, 6)
        pred = forward(p, np.zeros(2))
        assert abs(pred.probs.sum() - 1.0) < 1e-12
        assert np.all(pred.probs >= 0)
    # entries stay strictly inside (0, 1) for moderate logits
    p.b.value[...] = rng.uniform(-30.0, 30.0, 6)
    pred = forward(p, np.zeros(2))
    assert np.all(pred.probs > 0) and np.all(pred.probs < 1)


def test_forward_shape_check():
    p = make_params(k=3, dim=4)
    with pytest.raises(InvalidShapeError):
        forward(p, np.zeros(5))


def test_cross_entropy_perfect_prediction():
    pred = Prediction(np.array([1.0, 0.0, 0.0]))
    assert cross_entropy(pred, 0) == 0.0


def test_cross_entropy_uniform_is_ln_k():
    pred = Prediction(np.full(6, 1 / 6))
    assert cross_entropy(pred, 3) == pytest.approx(math.log(6), rel=1e-12)


def test_cross_entropy_quarter():
    pred = Prediction(np.array([0.25, 0.75]))
    assert cross_entropy(pred, 0) == pytest.approx(math.log(4), rel=1e-12)


def test_cross_entropy_label_range():
    pred = Prediction(np.array([0.5, 0.5]))
    with pytest.raises(InvalidLabelError):
        cross_entropy(pred, 2)


def test_loss_positive_unless_certain():
    pred = Prediction(np.array([0.999, 0.001]))
    assert cross_entropy(pred, 0) > 0.0


def test_dropout_rate_zero_identity():
    h = np.array([1.0, -2.0, 3.0])
    out, mask = dropout(h, 0.0, training=True, rng=Rng(1))
    assert np.array_equal(out, h)
    assert np.array_equal(mask, np.ones(3))


def test_dropout_eval_identity():
    h = np.array([1.0, -2.0, 3.0])
    out, _ = dropout(h, 0.5, training=False)
    assert np.array_equal(out, h)


def test_dropout_invalid_rate():
    with pytest.raises(InvalidConfigError):
        dropout(np.ones(2), 1.0, training=True, rng=Rng(1))


def test_dropout_monte_carlo_expectation():
    h = np.array([1.0, -2.0, 0.5, 3.0])
    rng = Rng(321)
    total = np.zeros_like(h)
    n = 100_000
    for _ in range(n):
        out, _ = dropout(h, 0.5, training=True, rng=rng)
        total += out
    assert np.all(np.abs(total / n - h) <= 0.02 * np.abs(h))


def test_dropout_mask_replay_in_backward():
    p = make_params(k=3, dim=6, seed=5)
    h = Rng(2).uniform(-1.0, 1.0, 6)
    h_dropped, mask = dropout(h, 0.5, training=True, rng=Rng(7))
    pred = forward(p, h_dropped)
    grad_h = backward(p, pred, h_dropped, mask, 1)
    assert np.array_equal(grad_h[mask == 0.0], np.zeros(np.sum(mask == 0.0)))


def test_backward_zero_at_optimum():
    p = make_params(k=3, dim=4)
    h = np.ones(4)
    pred = Prediction(np.array([0.0, 1.0, 0.0]))
    for t in p.tensors():
        t.zero_grad()
    backward(p, pred, h, np.ones(4), 1)
    assert np.array_equal(p.W.grad, np.zeros((3, 4)))
    assert np.array_equal(p.b.grad, np.zeros(3))


def test_backward_logit_gradients_sum_to_zero():
    p = make_params(k=5, dim=3, seed=11)
    h = Rng(4).uniform(-1.0, 1.0, 3)
    pred = forward(p, h)
    for t in p.tensors():
        t.zero_grad()
    backward(p, pred, h, np.ones(3), 2)
    assert abs(p.b.grad.sum()) < 1e-14


def test_backward_matches_finite_differences():
    p = make_params(k=4, dim=5, seed=13)
    h = Rng(21).uniform(-1.0, 1.0, 5)
    gold = 2

    def loss():
        return cross_entropy(forward(p, h), gold)

    for t in p.tensors():
        t.zero_grad()
    pred = forward(p, h)
    backward(p, pred, h, np.ones(5), gold)
    for t in p.tensors():
        fd = fd_gradient(loss, t, eps=1e-5)
        assert max_rel_error(t.grad, fd, floor=1e-2) < 1e-8, t.name

    # gradient w.r.t. the feature vector
    ht = ParamTensor("h", h)
    for t in p.tensors():
        t.zero_grad()
    pred = forward(p, h)
    grad_h = backward(p, pred, h, np.ones(5), gold)

    def loss_h():
        return cross_entropy(forward(p, ht.value), gold)

    assert max_rel_error(grad_h, fd_gradient(loss_h, ht, eps=1e-5),
                         floor=1e-2) < 1e-8
