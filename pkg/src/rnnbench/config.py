"""Key-value config files for experiment runs.

Format: one `key = value` per line, `#` starts a comment, blank lines
ignored.  Lists are comma-separated.  Keys mirror the experiment and
model fields; `rnnbench config --dump-defaults` prints them all.
"""

from dataclasses import dataclass, field, fields

from .data import DATASET_ORDER, canonical_name
from .errors import InvalidConfigError
from .heads import HEADS
from .trainer import BODIES


@dataclass
class ExperimentSpec:
    """Everything that determines a grid run."""

    datasets: list[str] = field(default_factory=lambda: list(DATASET_ORDER))
    bodies: list[str] = field(default_factory=lambda: list(BODIES))
    heads: list[str] = field(default_factory=lambda: list(HEADS))
    seeds: list[int] = field(default_factory=lambda: [1])
    data_dir: str = "data"
    embeddings: str = ""
    out_dir: str = "runs/grid"
    folds: int = 10
    dev_fraction: float = 0.1
    workers: int = 1
    oov_seed: int = 1
    oov_range: float = 0.25
    embedding_dim: int = 300

    # model/trainer hyperparameters (d_h of 0 means the per-body default)
    d_h: int = 0
    dropout_rate: float = 0.5
    learning_rate: float = 0.1
    max_epochs: int = 25
    patience: int = 5
    batch_size: int = 1
    adagrad_epsilon: float = 1e-8
    init_std: float = 0.08
    init_literal_std: bool = True
    grad_clip: float = 0.0

    def validate(self):
        if not self.datasets or not self.bodies or not self.heads or not self.seeds:
            raise InvalidConfigError("datasets, bodies, heads, seeds must be non-empty")
        for b in self.bodies:
            if b not in BODIES:
                raise InvalidConfigError(f"unknown body {b!r}")
        for h in self.heads:
            if h not in HEADS:
                raise InvalidConfigError(f"unknown head {h!r}")
        if self.workers < 1:
            raise InvalidConfigError("workers must be >= 1")
        return self


_LIST_STR = ("datasets", "bodies", "heads")
_LIST_INT = ("seeds",)
_BOOL = ("init_literal_std",)


def _parse_value(name: str, text: str, target_type):
    text = text.strip()
    if name in _LIST_STR:
        return [t.strip() for t in text.split(",") if t.strip()]
    if name in _LIST_INT:
        return [int(t) for t in text.split(",") if t.strip()]
    if name in _BOOL:
        if text.lower() in ("true", "1", "yes", "on"):
            return True
        if text.lower() in ("false", "0", "no", "off"):
            return False
        raise InvalidConfigError(f"{name}: expected a boolean, got {text!r}")
    return target_type(text)


def parse_config_text(text: str, path: str = "<config>") -> ExperimentSpec:
    spec = ExperimentSpec()
    types = {f.name: type(getattr(spec, f.name)) for f in fields(spec)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in types:
            raise InvalidConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            setattr(spec, key, _parse_value(
                key, value, int if key in ("folds", "workers") else types[key]))
        except (ValueError, InvalidConfigError) as exc:
            raise InvalidConfigError(f"{path}:{lineno}: {exc}") from None
    # normalize dataset spellings; unknown names pass through as custom corpora
    spec.datasets = [canonical_name(d) or d for d in spec.datasets]
    return spec.validate()


def load_config(path) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config_text(f.read(), str(path))


def dump_defaults() -> str:
    spec = ExperimentSpec()
    lines = ["# rnnbench experiment configuration (key = value; '#' comments)"]
    for f in fields(spec):
        value = getattr(spec, f.name)
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
