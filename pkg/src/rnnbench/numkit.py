"""Dense numeric kernels, portable RNG, and per-parameter optimizer state.

Everything is float64; matrices are plain 2-D numpy arrays in row-major
order and vectors are 1-D arrays.  Gradients are hand-derived elsewhere,
so this module only provides the kernels, the initializer, the Adagrad
update, and a reproducible random number generator.
"""

import math

import numpy as np

from .errors import InvalidConfigError, InvalidShapeError, NumericFaultError

MASK64 = (1 << 64) - 1

# Weight initializer: uniform with standard deviation 0.08, read literally,
# i.e. support [-0.08*sqrt(3), +0.08*sqrt(3)].  Some codebases use
# U[-0.08, 0.08] instead (std ~0.046); pass bound=0.08 to get that.
INIT_STD = 0.08
INIT_BOUND = INIT_STD * math.sqrt(3.0)

_GAMMA = 0x9E3779B97F4A7C15  # golden-ratio increment of SplitMix64


def _mix64(z):
    """SplitMix64 finalizer: xor-shift/multiply mixing of one 64-bit word.

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27; z *= 0x94D049BB133111EB
    z ^= z >> 31
    """
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_vec(z):
    """Vectorized _mix64 over a uint64 array (wrap-around semantics)."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash; used to fold strings into seed derivations."""
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def derive_seed(seed: int, *keys) -> int:
    """Derive a child seed from (seed, keys).

    Splitting rule: fold each key (strings via FNV-1a of their UTF-8
    bytes, ints taken modulo 2^64) into the accumulator with
    acc = mix64((acc ^ key) + GAMMA).  Fully determined by its inputs,
    identical on every platform.
    """
    acc = seed & MASK64
    for key in keys:
        if isinstance(key, str):
            kv = fnv1a64(key.encode("utf-8"))
        else:
            kv = int(key) & MASK64
        acc = _mix64((acc ^ kv) + _GAMMA)
    return acc


class Rng:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    Recurrence: state_{n+1} = state_n + 0x9E3779B97F4A7C15 (mod 2^64);
    output_n = mix64(state_{n+1}) with the finalizer documented on
    :func:`_mix64`.  Doubles are (output >> 11) * 2**-53, uniform on
    [0, 1).  The same seed yields the same stream on every platform, and
    block draws consume the stream exactly like repeated single draws.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return _mix64(self._state)

    def _block_u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self._state) + np.uint64(_GAMMA) * steps
        self._state = (self._state + n * _GAMMA) & MASK64
        return _mix64_vec(states)

    def next_f64(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float, n: int | None = None):
        """Uniform draw(s) on [lo, hi); n=None gives a scalar."""
        if n is None:
            return lo + (hi - lo) * self.next_f64()
        u = (self._block_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return lo + (hi - lo) * u

    def below(self, n: int) -> int:
        """Integer in [0, n) via modulo reduction (documented, portable)."""
        return self.next_u64() % n

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise NumericFaultError(f"non-finite entries in {what}")


def uniform_init(rows: int, cols: int, rng: Rng, bound: float = INIT_BOUND) -> np.ndarray:
    """Matrix of i.i.d. uniform entries on [-bound, +bound].

    With the default bound the distribution's standard deviation is
    exactly 0.08.  cols=0 is rejected; pass cols=-1 for a 1-D vector of
    length rows (bias initialization).
    """
    vector = cols == -1
    if rows < 1 or (not vector and cols < 1):
        raise InvalidShapeError(f"invalid init shape ({rows}, {cols})")
    n = rows if vector else rows * cols
    flat = rng.uniform(-bound, bound, n)
    return flat if vector else flat.reshape(rows, cols)


def zeros_like(a: np.ndarray) -> np.ndarray:
    return np.zeros_like(a, dtype=np.float64)


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise InvalidShapeError(f"matvec shape mismatch: {m.shape} vs {v.shape}")
    return m @ v


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise InvalidShapeError(f"add shape mismatch: {a.shape} vs {b.shape}")
    return a + b


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise InvalidShapeError(f"hadamard shape mismatch: {a.shape} vs {b.shape}")
    return a * b


class ParamTensor:
    """One trainable tensor: value, gradient buffer, and Adagrad accumulator.

    value/grad/accum always share one shape; accum is nonnegative and
    nondecreasing across optimizer steps.
    """

    __slots__ = ("name", "value", "grad", "accum")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.accum = np.zeros_like(self.value)

    @classmethod
    def init_uniform(cls, name, rows, cols, rng, bound=INIT_BOUND):
        return cls(name, uniform_init(rows, cols, rng, bound))

    @property
    def size(self) -> int:
        return self.value.size

    def zero_grad(self) -> None:
        self.grad[...] = 0.0


def adagrad_step(p: ParamTensor, learning_rate: float, epsilon: float = 1e-8) -> ParamTensor:
    """In-place Adagrad update: accum += g^2; value -= lr*g/(sqrt(accum)+eps).

    The gradient buffer is consumed (reset to zero).  lr=0 is allowed and
    still accumulates, which keeps the update monotonically shrinking.
    """
    if learning_rate < 0:
        raise InvalidConfigError(f"learning_rate must be >= 0, got {learning_rate}")
    if epsilon <= 0:
        raise InvalidConfigError(f"epsilon must be > 0, got {epsilon}")
    if not np.all(np.isfinite(p.grad)):
        raise NumericFaultError(f"non-finite gradient in tensor '{p.name}'")
    g = p.grad
    p.accum += g * g
    p.value -= learning_rate * g / (np.sqrt(p.accum) + epsilon)
    p.grad[...] = 0.0
    return p


def max_rel_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-2) -> float:
    """Worst-case relative difference with an absolute floor.

    Entries whose magnitudes both sit below `floor` are effectively
    compared with absolute tolerance tol*floor, which keeps
    finite-difference roundoff from dominating near-zero gradients.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidShapeError(f"max_rel_error shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / scale))
