"""Feature-aggregation heads over a hidden-state sequence.

Five kinds: tail (last-node states), mean_pool, max_pool, and the two
hybrids that concatenate tail with a pooling output, tail first.  Each
has an exact adjoint used by the trainer.
"""

import numpy as np

from .errors import ContractViolationError, InvalidShapeError
from .rnn_core import HiddenSequence

HEADS = ("tail", "mean_pool", "max_pool", "hybrid_mean", "hybrid_max")

HEAD_DISPLAY = {
    "tail": "Tail",
    "mean_pool": "MeanPool",
    "max_pool": "MaxPool",
    "hybrid_mean": "HybridMeanPool",
    "hybrid_max": "HybridMaxPool",
}


class FeatureVector:
    """Head output tagged with its kind, body, and source sequence."""

    __slots__ = ("kind", "body", "values", "argmax_trace", "source")

    def __init__(self, kind, body, values, source, argmax_trace=None):
        self.kind = kind
        self.body = body
        self.values = values
        self.argmax_trace = argmax_trace    # max-pool only
        self.source = source

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def _body(seq: HiddenSequence) -> str:
    return "blstm" if seq.bidirectional else "lstm"


def feature_dim(kind: str, body: str, d_h: int) -> int:
    """Width of the feature layer for a (head, body, hidden-size) choice."""
    base = 2 * d_h if body == "blstm" else d_h
    if kind == "tail" or kind in ("mean_pool", "max_pool"):
        return base
    if kind in ("hybrid_mean", "hybrid_max"):
        return 2 * base
    raise InvalidShapeError(f"unknown head kind {kind!r}")


def tail_feature(seq: HiddenSequence) -> FeatureVector:
    return FeatureVector("tail", _body(seq), seq.tail(), seq)


def mean_pool(seq: HiddenSequence) -> FeatureVector:
    values = seq.states.sum(axis=0) / seq.m
    return FeatureVector("mean_pool", _body(seq), values, seq)


def max_pool(seq: HiddenSequence) -> FeatureVector:
    # ties break to the smallest timestep index (np.argmax convention)
    trace = np.argmax(seq.states, axis=0)
    values = seq.states[trace, np.arange(seq.width)]
    return FeatureVector("max_pool", _body(seq), values, seq, argmax_trace=trace)


def hybrid_feature(tail: FeatureVector, pool: FeatureVector) -> FeatureVector:
    """Concatenate tail-then-pool features computed from one sequence."""
    if tail.source is not pool.source:
        raise ContractViolationError(
            "tail and pooling features come from different hidden sequences")
    if tail.kind != "tail" or pool.kind not in ("mean_pool", "max_pool"):
        raise ContractViolationError(
            f"hybrid_feature needs (tail, pooling), got ({tail.kind}, {pool.kind})")
    kind = "hybrid_mean" if pool.kind == "mean_pool" else "hybrid_max"
    values = np.concatenate([tail.values, pool.values])
    return FeatureVector(kind, tail.body, values, tail.source,
                         argmax_trace=pool.argmax_trace)


def compute(kind: str, seq: HiddenSequence) -> FeatureVector:
    """Dispatch a head kind over a hidden sequence."""
    if kind == "tail":
        return tail_feature(seq)
    if kind == "mean_pool":
        return mean_pool(seq)
    if kind == "max_pool":
        return max_pool(seq)
    if kind == "hybrid_mean":
        return hybrid_feature(tail_feature(seq), mean_pool(seq))
    if kind == "hybrid_max":
        return hybrid_feature(tail_feature(seq), max_pool(seq))
    raise InvalidShapeError(f"unknown head kind {kind!r}")


def _tail_backward(seq: HiddenSequence, grad_h: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(seq.states)
    if seq.bidirectional:
        d_h = seq.d_h
        grad[-1, :d_h] = grad_h[:d_h]      # forward last node
        grad[0, d_h:] = grad_h[d_h:]       # backward last node, aligned at 0
    else:
        grad[-1] = grad_h
    return grad


def _mean_backward(seq: HiddenSequence, grad_h: np.ndarray) -> np.ndarray:
    return np.tile(grad_h / seq.m, (seq.m, 1))


def _max_backward(seq: HiddenSequence, grad_h: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(seq.states)
    trace = np.argmax(seq.states, axis=0)
    grad[trace, np.arange(seq.width)] = grad_h
    return grad


def head_backward(kind: str, seq: HiddenSequence, grad_h: np.ndarray) -> np.ndarray:
    """Route a feature-layer gradient back onto the hidden states (m x d)."""
    grad_h = np.asarray(grad_h, dtype=np.float64)
    want = feature_dim(kind, _body(seq), seq.d_h)
    if grad_h.shape != (want,):
        raise InvalidShapeError(
            f"grad_h shape {grad_h.shape} does not match feature dim {want}")
    if kind == "tail":
        return _tail_backward(seq, grad_h)
    if kind == "mean_pool":
        return _mean_backward(seq, grad_h)
    if kind == "max_pool":
        return _max_backward(seq, grad_h)
    if kind in ("hybrid_mean", "hybrid_max"):
        cut = seq.width
        grad = _tail_backward(seq, grad_h[:cut])
        if kind == "hybrid_mean":
            grad += _mean_backward(seq, grad_h[cut:])
        else:
            grad += _max_backward(seq, grad_h[cut:])
        return grad
    raise InvalidShapeError(f"unknown head kind {kind!r}")
