"""Model assembly, the Adagrad training loop, and evaluation.

A model is body (LSTM or BLSTM) + head + classifier.  Training is pure
per-example SGD in a freshly shuffled order each epoch, full BPTT, with
early stopping on dev accuracy; the parameters kept are those of the
best-dev epoch.  Gradients reaching the static embeddings are computed
and discarded.
"""

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import classifier as cls_mod
from . import heads, rnn_core
from .checkpoint import load_tensors, save_tensors
from .data import Example
from .embeddings import EmbeddingTable
from .errors import DivergedError, InvalidConfigError, ParseError
from .numkit import Rng, adagrad_step, derive_seed

BODIES = ("lstm", "blstm")

DEFAULT_HIDDEN = {"lstm": 300, "blstm": 185}


@dataclass
class ModelConfig:
    body: str
    head: str
    n_classes: int
    seed: int = 1
    d_h: int | None = None              # None -> 300 (lstm) / 185 (blstm)
    input_dim: int = 300
    dropout_rate: float = 0.5
    learning_rate: float = 0.1
    max_epochs: int = 25
    patience: int = 5
    batch_size: int = 1
    adagrad_epsilon: float = 1e-8
    init_std: float = 0.08
    init_literal_std: bool = True       # bound = std*sqrt(3); False -> U[-std, std]
    grad_clip: float = 0.0              # 0 disables clipping

    @property
    def hidden(self) -> int:
        return self.d_h if self.d_h is not None else DEFAULT_HIDDEN[self.body]

    @property
    def init_bound(self) -> float:
        return self.init_std * math.sqrt(3.0) if self.init_literal_std else self.init_std

    def validate(self):
        if self.body not in BODIES:
            raise InvalidConfigError(f"unknown body {self.body!r}")
        if self.head not in heads.HEADS:
            raise InvalidConfigError(f"unknown head {self.head!r}")
        if self.n_classes < 2:
            raise InvalidConfigError("n_classes must be >= 2")
        if self.hidden < 1 or self.input_dim < 1:
            raise InvalidConfigError("hidden and input sizes must be >= 1")
        if self.learning_rate < 0:
            raise InvalidConfigError("learning_rate must be >= 0")
        if self.max_epochs < 1:
            raise InvalidConfigError("max_epochs must be >= 1")
        if self.patience < 1:
            raise InvalidConfigError("patience must be >= 1")
        if self.batch_size < 1:
            raise InvalidConfigError("batch_size must be >= 1")
        return self

    def variant_name(self) -> str:
        return f"{self.body.upper()}_{heads.HEAD_DISPLAY[self.head]}"


class Model:
    """One assembled (body, head, classifier) variant."""

    def __init__(self, config: ModelConfig):
        config.validate()
        self.config = config
        rng = Rng(derive_seed(config.seed, "init"))
        bound = config.init_bound
        if config.body == "lstm":
            self.body = rnn_core.LstmParams(config.input_dim, config.hidden,
                                            rng, bound, prefix="fwd.")
        else:
            self.body = rnn_core.BlstmParams(config.input_dim, config.hidden,
                                             rng, bound)
        self.feature_dim = heads.feature_dim(config.head, config.body, config.hidden)
        self.cls = cls_mod.ClassifierParams(config.n_classes, self.feature_dim,
                                            rng, bound)

    def tensors(self):
        return self.body.tensors() + self.cls.tensors()

    def forward_states(self, xs) -> rnn_core.HiddenSequence:
        if self.config.body == "lstm":
            return rnn_core.lstm_forward_sequence(self.body, xs)
        return rnn_core.blstm_forward(self.body, xs)

    def backward_states(self, seq, grad_states):
        if self.config.body == "lstm":
            return rnn_core.lstm_backward_sequence(self.body, seq, grad_states)
        return rnn_core.blstm_backward_sequence(self.body, seq, grad_states)

    def predict(self, table: EmbeddingTable, tokens) -> cls_mod.Prediction:
        seq = self.forward_states(table.embed_sentence(tokens))
        feature = heads.compute(self.config.head, seq)
        return cls_mod.forward(self.cls, feature.values)

    def loss_and_backward(self, table: EmbeddingTable, ex: Example,
                          dropout_rng: Rng) -> float:
        """One training example: loss plus gradient accumulation."""
        seq = self.forward_states(table.embed_sentence(ex.tokens))
        feature = heads.compute(self.config.head, seq)
        h_dropped, mask = cls_mod.dropout(feature.values, self.config.dropout_rate,
                                          training=True, rng=dropout_rng)
        pred = cls_mod.forward(self.cls, h_dropped)
        loss = cls_mod.cross_entropy(pred, ex.label)
        grad_h = cls_mod.backward(self.cls, pred, h_dropped, mask, ex.label)
        grad_states = heads.head_backward(self.config.head, seq, grad_h)
        self.backward_states(seq, grad_states)   # input grads discarded: static
        return loss

    def snapshot(self) -> dict[str, np.ndarray]:
        return {t.name: t.value.copy() for t in self.tensors()}

    def restore(self, values: dict[str, np.ndarray]) -> None:
        for t in self.tensors():
            t.value[...] = values[t.name]


def build_model(config: ModelConfig) -> Model:
    return Model(config)


def param_report(model: Model) -> dict[str, int]:
    """Itemized parameter counts: recurrent core vs classifier."""
    recurrent = model.body.param_count()
    classifier = model.cls.param_count()
    return {"recurrent": recurrent, "classifier": classifier,
            "total": recurrent + classifier}


@dataclass
class EvalResult:
    accuracy: float
    n_correct: int
    n_total: int
    per_class_total: list[int]
    per_class_correct: list[int]


def evaluate(model: Model, table: EmbeddingTable, examples) -> EvalResult:
    """Dropout off, argmax prediction, exact counts; mutates nothing."""
    if not examples:
        raise InvalidConfigError("cannot evaluate on an empty example list")
    k = model.config.n_classes
    total = [0] * k
    correct = [0] * k
    for ex in examples:
        pred = model.predict(table, ex.tokens)
        total[ex.label] += 1
        if pred.label == ex.label:
            correct[ex.label] += 1
    n_correct = sum(correct)
    n_total = len(examples)
    return EvalResult(n_correct / n_total, n_correct, n_total, total, correct)


@dataclass
class TrainResult:
    model: Model
    epoch_selected: int
    dev_accuracy_history: list[float] = field(default_factory=list)
    train_loss_history: list[float] = field(default_factory=list)

    @property
    def best_dev_accuracy(self) -> float:
        return self.dev_accuracy_history[self.epoch_selected - 1]


def _clip_grads(tensors, max_norm):
    total = math.sqrt(sum(float(np.sum(t.grad * t.grad)) for t in tensors))
    if total > max_norm > 0:
        scale = max_norm / total
        for t in tensors:
            t.grad *= scale


def train(model: Model, table: EmbeddingTable, train_examples, dev_examples,
          log=None, stop_accuracy: float | None = None) -> TrainResult:
    """Run the full training protocol and keep the best-dev parameters.

    stop_accuracy, when set, ends training as soon as dev accuracy
    reaches it (used by overfitting sanity checks).
    """
    if not train_examples or not dev_examples:
        raise InvalidConfigError("train and dev sets must be non-empty")
    cfg = model.config
    dropout_rng = Rng(derive_seed(cfg.seed, "dropout"))
    tensors = model.tensors()

    best_values = model.snapshot()
    best_acc = -1.0
    best_epoch = 0
    dev_history: list[float] = []
    loss_history: list[float] = []

    def step():
        if cfg.grad_clip > 0:
            _clip_grads(tensors, cfg.grad_clip)
        for t in tensors:
            adagrad_step(t, cfg.learning_rate, cfg.adagrad_epsilon)

    for epoch in range(1, cfg.max_epochs + 1):
        order = list(range(len(train_examples)))
        Rng(derive_seed(cfg.seed, "order", epoch)).shuffle(order)
        total_loss = 0.0
        pending = 0
        for idx in order:
            loss = model.loss_and_backward(table, train_examples[idx], dropout_rng)
            if not math.isfinite(loss):
                raise DivergedError(
                    f"non-finite loss at epoch {epoch}, example {idx}",
                    epoch=epoch, example_index=idx)
            total_loss += loss
            pending += 1
            if pending == cfg.batch_size:
                step()
                pending = 0
        if pending:
            step()
        loss_history.append(total_loss / len(train_examples))
        dev_acc = evaluate(model, table, dev_examples).accuracy
        dev_history.append(dev_acc)
        if log:
            log(f"epoch {epoch}: train loss {loss_history[-1]:.4f}, "
                f"dev acc {dev_acc:.4f}")
        if dev_acc > best_acc:
            best_acc = dev_acc
            best_epoch = epoch
            best_values = model.snapshot()
        elif epoch - best_epoch >= cfg.patience:
            break
        if stop_accuracy is not None and dev_acc >= stop_accuracy:
            break

    model.restore(best_values)
    return TrainResult(model, best_epoch, dev_history, loss_history)


def save_model(model: Model, path) -> None:
    """Write all parameter values to the named-tensor container."""
    save_tensors(path, {t.name: t.value for t in model.tensors()})


def load_model(path, config: ModelConfig) -> Model:
    """Rebuild a model from a config and a saved checkpoint."""
    model = Model(config)
    values = load_tensors(path)
    for t in model.tensors():
        if t.name not in values:
            raise ParseError(f"checkpoint missing tensor {t.name!r}")
        if values[t.name].shape != t.value.shape:
            raise ParseError(
                f"checkpoint tensor {t.name!r} has shape {values[t.name].shape}, "
                f"model expects {t.value.shape}")
        t.value[...] = values[t.name]
    return model


def config_metadata(config: ModelConfig) -> dict:
    return asdict(config)
