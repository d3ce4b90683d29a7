"""Shared test utilities: finite-difference oracles, fixture corpora,
and an independent word2vec fixture writer."""

import struct

import numpy as np

from rnnbench import classifier as cls
from rnnbench import heads
from rnnbench.data import Example
from rnnbench.embeddings import EmbeddingTable
from rnnbench.numkit import Rng, derive_seed


def model_loss(model, xs, gold):
    """Forward-only loss with dropout disabled (for numeric gradients)."""
    seq = model.forward_states(xs)
    feat = heads.compute(model.config.head, seq)
    pred = cls.forward(model.cls, feat.values)
    return cls.cross_entropy(pred, gold)


def analytic_gradients(model, xs, gold):
    """One backward pass; returns {tensor name: gradient array}."""
    for t in model.tensors():
        t.zero_grad()
    seq = model.forward_states(xs)
    feat = heads.compute(model.config.head, seq)
    h, mask = cls.dropout(feat.values, 0.0, training=True)
    pred = cls.forward(model.cls, h)
    loss = cls.cross_entropy(pred, gold)
    grad_h = cls.backward(model.cls, pred, h, mask, gold)
    grad_states = heads.head_backward(model.config.head, seq, grad_h)
    model.backward_states(seq, grad_states)
    return loss, {t.name: t.grad.copy() for t in model.tensors()}


def fd_gradient(loss_fn, tensor, eps=1e-5):
    """Central finite differences of loss_fn over one ParamTensor."""
    grad = np.zeros_like(tensor.value)
    it = np.nditer(tensor.value, flags=["multi_index"])
    while not it.finished:
        ix = it.multi_index
        orig = tensor.value[ix]
        tensor.value[ix] = orig + eps
        up = loss_fn()
        tensor.value[ix] = orig - eps
        down = loss_fn()
        tensor.value[ix] = orig
        grad[ix] = (up - down) / (2.0 * eps)
        it.iternext()
    return grad


def fd_model_gradients(model, xs, gold, eps=1e-5):
    return {t.name: fd_gradient(lambda: model_loss(model, xs, gold), t, eps)
            for t in model.tensors()}


def fixture_table(tokens, dim=8, seed=123) -> EmbeddingTable:
    """Random embedding table over the given vocabulary."""
    tokens = sorted(set(tokens))
    rng = Rng(derive_seed(seed, "fixture-table"))
    vectors = rng.uniform(-0.25, 0.25, len(tokens) * dim).reshape(len(tokens), dim)
    return EmbeddingTable(dim, {t: i for i, t in enumerate(tokens)},
                          vectors, seed=seed)


# Two classes keyed by disjoint token sets; linearly separable from any head.
TOY_CLASS_TOKENS = (
    ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"],
    ["golf", "hotel", "india", "juliet", "kilo", "lima"],
)


def toy_corpus(n=40, seed=7):
    """n separable examples, balanced over the two classes."""
    rng = Rng(derive_seed(seed, "toy-corpus"))
    examples = []
    for k in range(n):
        label = k % 2
        vocab = TOY_CLASS_TOKENS[label]
        m = 3 + rng.below(4)
        tokens = [vocab[rng.below(len(vocab))] for _ in range(m)]
        examples.append(Example(" ".join(tokens), tokens, label))
    return examples


def toy_table(dim=8, seed=123):
    return fixture_table(TOY_CLASS_TOKENS[0] + TOY_CLASS_TOKENS[1],
                         dim=dim, seed=seed)


def write_word2vec_binary(path, entries, trailing_newline=True):
    """Independent fixture writer for the binary word2vec format."""
    dim = len(entries[0][1])
    with open(path, "wb") as f:
        f.write(f"{len(entries)} {dim}\n".encode("ascii"))
        for token, values in entries:
            f.write(token.encode("utf-8") + b" ")
            f.write(struct.pack(f"<{dim}f", *values))
            if trailing_newline:
                f.write(b"\n")


def write_word2vec_text(path, entries):
    with open(path, "w", encoding="utf-8") as f:
        for token, values in entries:
            f.write(token + " " + " ".join(repr(float(np.float32(v)))
                                           for v in values) + "\n")
