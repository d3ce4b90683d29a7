"""From-scratch LSTM/BLSTM sentence classification and benchmark harness."""

__version__ = "0.1.0"

from .numkit import Rng, ParamTensor, adagrad_step, uniform_init  # noqa: F401
from .trainer import ModelConfig, build_model, evaluate, train  # noqa: F401
