"""Feature-layer dropout, affine-plus-softmax output, and cross-entropy.

Dropout is inverted (train-time scaling by 1/(1-rate)) so evaluation is
a pure identity.  Softmax subtracts the max logit for stability.
"""

import math

import numpy as np

from .errors import (InvalidConfigError, InvalidLabelError,
                     InvalidShapeError)
from .numkit import INIT_BOUND, ParamTensor, Rng


class ClassifierParams:
    """Affine output layer: W (K x dim), b (K)."""

    def __init__(self, n_classes: int, dim: int, rng: Rng, bound: float = INIT_BOUND):
        if n_classes < 2:
            raise InvalidConfigError(f"need at least 2 classes, got {n_classes}")
        self.n_classes = n_classes
        self.dim = dim
        self.W = ParamTensor.init_uniform("cls.W", n_classes, dim, rng, bound)
        self.b = ParamTensor.init_uniform("cls.b", n_classes, -1, rng, bound)

    def tensors(self) -> list[ParamTensor]:
        return [self.W, self.b]

    def param_count(self) -> int:
        return self.W.size + self.b.size


class Prediction:
    __slots__ = ("probs", "label")

    def __init__(self, probs: np.ndarray):
        self.probs = probs
        self.label = int(np.argmax(probs))


def dropout(h: np.ndarray, rate: float, training: bool, rng: Rng | None = None):
    """Inverted dropout on the feature layer; returns (h', mask).

    The mask already carries the 1/(1-rate) scaling, so backward is a
    plain elementwise product with it.
    """
    if not 0.0 <= rate < 1.0:
        raise InvalidConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return h, np.ones_like(h)
    keep = 1.0 - rate
    mask = (rng.uniform(0.0, 1.0, h.shape[0]) < keep) / keep
    return h * mask, mask


def forward(params: ClassifierParams, h: np.ndarray) -> Prediction:
    """y = softmax(W h + b), computed with max subtraction."""
    if h.shape != (params.dim,):
        raise InvalidShapeError(
            f"feature shape {h.shape} does not match classifier dim {params.dim}")
    logits = params.W.value @ h + params.b.value
    logits -= logits.max()
    exps = np.exp(logits)
    return Prediction(exps / exps.sum())


def cross_entropy(pred: Prediction, gold: int) -> float:
    """-ln(probs[gold]); infinite when the gold probability underflows."""
    if not 0 <= gold < pred.probs.shape[0]:
        raise InvalidLabelError(
            f"gold label {gold} out of range for {pred.probs.shape[0]} classes")
    p = pred.probs[gold]
    return -math.log(p) if p > 0.0 else math.inf


def backward(params: ClassifierParams, pred: Prediction, h_dropped: np.ndarray,
             mask: np.ndarray, gold: int) -> np.ndarray:
    """Softmax cross-entropy adjoint: dlogits = probs - onehot(gold).

    Accumulates into W/b gradients and returns the gradient w.r.t. the
    pre-dropout feature vector (the forward mask re-applied).
    """
    if not 0 <= gold < params.n_classes:
        raise InvalidLabelError(
            f"gold label {gold} out of range for {params.n_classes} classes")
    dlogits = pred.probs.copy()
    dlogits[gold] -= 1.0
    params.W.grad += np.outer(dlogits, h_dropped)
    params.b.grad += dlogits
    return (params.W.value.T @ dlogits) * mask
