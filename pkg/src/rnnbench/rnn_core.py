"""LSTM cell, directional sequence unrolling, BLSTM composition, and exact
gradients via full backpropagation through time.

Cell (forget-gate LSTM, no peepholes):

    i = sigmoid(W_i x + U_i h + b_i)        input gate
    f = sigmoid(W_f x + U_f h + b_f)        forget gate
    o = sigmoid(W_o x + U_o h + b_o)        output gate
    g = tanh   (W_g x + U_g h + b_g)        candidate
    c_t = f * c_prev + i * g
    h_t = o * tanh(c_t)

Initial states h_0 = c_0 = 0, non-trainable.  Reverse-direction hidden
states are re-aligned to input positions: the state reported for
position j is the one after consuming xs[m-1..j], so position 0 carries
the full right-to-left summary.
"""

import numpy as np

from .errors import EmptyInputError, InvalidShapeError
from .numkit import INIT_BOUND, ParamTensor, Rng

GATES = ("i", "f", "o", "g")


def _sigmoid(x):
    # evaluated in two branches to stay exact for large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class LstmParams:
    """Gate parameters for one direction: W_g (d_h x d_in), U_g (d_h x d_h),
    b_g (d_h) for each gate, each a ParamTensor."""

    def __init__(self, d_in: int, d_h: int, rng: Rng, bound: float = INIT_BOUND,
                 prefix: str = ""):
        self.d_in = d_in
        self.d_h = d_h
        self.W = {}
        self.U = {}
        self.b = {}
        for g in GATES:
            self.W[g] = ParamTensor.init_uniform(f"{prefix}W_{g}", d_h, d_in, rng, bound)
            self.U[g] = ParamTensor.init_uniform(f"{prefix}U_{g}", d_h, d_h, rng, bound)
            self.b[g] = ParamTensor.init_uniform(f"{prefix}b_{g}", d_h, -1, rng, bound)

    def tensors(self) -> list[ParamTensor]:
        out = []
        for g in GATES:
            out.extend((self.W[g], self.U[g], self.b[g]))
        return out

    def param_count(self) -> int:
        return sum(t.size for t in self.tensors())

    def _stacked(self):
        """Concatenate the four gates (GATES order) for batched kernels."""
        Wx = np.concatenate([self.W[g].value for g in GATES], axis=0)
        Uh = np.concatenate([self.U[g].value for g in GATES], axis=0)
        b = np.concatenate([self.b[g].value for g in GATES])
        return Wx, Uh, b

    def _scatter_grads(self, dWx, dUh, db):
        H = self.d_h
        for k, g in enumerate(GATES):
            self.W[g].grad += dWx[k * H:(k + 1) * H]
            self.U[g].grad += dUh[k * H:(k + 1) * H]
            self.b[g].grad += db[k * H:(k + 1) * H]


class BlstmParams:
    """Independent forward and backward direction parameters."""

    def __init__(self, d_in: int, d_h: int, rng: Rng, bound: float = INIT_BOUND):
        self.d_in = d_in
        self.d_h = d_h
        self.fwd = LstmParams(d_in, d_h, rng, bound, prefix="fwd.")
        self.bwd = LstmParams(d_in, d_h, rng, bound, prefix="bwd.")

    def tensors(self) -> list[ParamTensor]:
        return self.fwd.tensors() + self.bwd.tensors()

    def param_count(self) -> int:
        return self.fwd.param_count() + self.bwd.param_count()


def lstm_param_count(d_in: int, d_h: int) -> int:
    """Closed form 4*(d_in*d_h + d_h^2 + d_h) for one direction."""
    return 4 * (d_in * d_h + d_h * d_h + d_h)


class _SeqCache:
    """Forward activations of one direction, in consumption order."""

    __slots__ = ("xs", "acts", "c", "tc", "hs", "reverse")

    def __init__(self, xs, acts, c, tc, hs, reverse):
        self.xs = xs          # m x d_in
        self.acts = acts      # m x 4H, post-activation [i|f|o|g]
        self.c = c            # m x H
        self.tc = tc          # m x H, tanh(c)
        self.hs = hs          # m x H
        self.reverse = reverse


class HiddenSequence:
    """Per-position hidden states plus the forward cache needed for BPTT.

    states has one row per input position; for BLSTM the row is the
    concatenation [h_fwd_j ; h_bwd_j] with the alignment rule from the
    module docstring, so width = 2*d_h.
    """

    def __init__(self, states, d_h, fwd_cache, bwd_cache=None):
        self.states = states
        self.d_h = d_h
        self._fwd = fwd_cache
        self._bwd = bwd_cache

    @property
    def m(self) -> int:
        return self.states.shape[0]

    @property
    def width(self) -> int:
        return self.states.shape[1]

    @property
    def bidirectional(self) -> bool:
        return self._bwd is not None

    def tail(self) -> np.ndarray:
        """Last-node feature: h_m for one direction, [h_fwd_m ; h_bwd@0]
        for two."""
        if not self.bidirectional:
            return self.states[-1].copy()
        return np.concatenate([self.states[-1, :self.d_h],
                               self.states[0, self.d_h:]])


def lstm_cell_forward(p: LstmParams, x_t, h_prev, c_prev):
    """One timestep; returns (h_t, c_t, cell_cache)."""
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    if x_t.shape != (p.d_in,) or h_prev.shape != (p.d_h,) or c_prev.shape != (p.d_h,):
        raise InvalidShapeError(
            f"cell inputs {x_t.shape}/{h_prev.shape}/{c_prev.shape} do not match "
            f"(d_in={p.d_in}, d_h={p.d_h})")
    Wx, Uh, b = p._stacked()
    z = Wx @ x_t + Uh @ h_prev + b
    H = p.d_h
    i = _sigmoid(z[0:H])
    f = _sigmoid(z[H:2 * H])
    o = _sigmoid(z[2 * H:3 * H])
    g = np.tanh(z[3 * H:4 * H])
    c_t = f * c_prev + i * g
    tc = np.tanh(c_t)
    h_t = o * tc
    cache = {"x": x_t, "h_prev": h_prev, "c_prev": c_prev,
             "i": i, "f": f, "o": o, "g": g, "tc": tc}
    return h_t, c_t, cache


def lstm_cell_backward(p: LstmParams, cache, dh, dc=None):
    """Exact adjoint of one timestep.

    Accumulates parameter gradients into p and returns
    (dx, dh_prev, dc_prev).
    """
    i, f, o, g, tc = cache["i"], cache["f"], cache["o"], cache["g"], cache["tc"]
    if dc is None:
        dc = np.zeros_like(dh)
    do = dh * tc
    dc_t = dh * o * (1.0 - tc * tc) + dc
    di = dc_t * g
    dg = dc_t * i
    df = dc_t * cache["c_prev"]
    dz = np.concatenate([di * i * (1.0 - i),
                         df * f * (1.0 - f),
                         do * o * (1.0 - o),
                         dg * (1.0 - g * g)])
    Wx, Uh, _ = p._stacked()
    p._scatter_grads(np.outer(dz, cache["x"]), np.outer(dz, cache["h_prev"]), dz)
    dx = Wx.T @ dz
    dh_prev = Uh.T @ dz
    dc_prev = dc_t * f
    return dx, dh_prev, dc_prev


def _run_direction(p: LstmParams, xs: np.ndarray, reverse: bool) -> _SeqCache:
    m = xs.shape[0]
    H = p.d_h
    Wx, Uh, b = p._stacked()
    # contiguous copy so both directions hit the same BLAS path bit-for-bit
    ordered = np.ascontiguousarray(xs[::-1] if reverse else xs)
    Zx = ordered @ Wx.T                       # m x 4H, input contributions
    acts = np.empty((m, 4 * H))
    cs = np.empty((m, H))
    tcs = np.empty((m, H))
    hs = np.empty((m, H))
    h = np.zeros(H)
    c = np.zeros(H)
    for t in range(m):
        z = Zx[t] + Uh @ h + b
        i = _sigmoid(z[0:H])
        f = _sigmoid(z[H:2 * H])
        o = _sigmoid(z[2 * H:3 * H])
        g = np.tanh(z[3 * H:4 * H])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        acts[t, 0:H] = i
        acts[t, H:2 * H] = f
        acts[t, 2 * H:3 * H] = o
        acts[t, 3 * H:4 * H] = g
        cs[t] = c
        tcs[t] = tc
        hs[t] = h
    return _SeqCache(ordered, acts, cs, tcs, hs, reverse)


def lstm_forward_sequence(p: LstmParams, xs: np.ndarray,
                          reverse: bool = False) -> HiddenSequence:
    """Unroll one direction over xs (m x d_in), h_0 = c_0 = 0.

    states rows are re-aligned to input positions (reversed back for the
    reverse direction).
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != p.d_in:
        raise InvalidShapeError(f"inputs {xs.shape} do not match d_in={p.d_in}")
    if xs.shape[0] == 0:
        raise EmptyInputError("cannot unroll an empty sequence")
    cache = _run_direction(p, xs, reverse)
    states = cache.hs[::-1].copy() if reverse else cache.hs.copy()
    return HiddenSequence(states, p.d_h, cache)


def blstm_forward(p: BlstmParams, xs: np.ndarray) -> HiddenSequence:
    """Both directions; states row j = [h_fwd_j ; h_bwd_j] (aligned)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != p.d_in:
        raise InvalidShapeError(f"inputs {xs.shape} do not match d_in={p.d_in}")
    if xs.shape[0] == 0:
        raise EmptyInputError("cannot unroll an empty sequence")
    fwd = _run_direction(p.fwd, xs, reverse=False)
    bwd = _run_direction(p.bwd, xs, reverse=True)
    states = np.concatenate([fwd.hs, bwd.hs[::-1]], axis=1)
    return HiddenSequence(states, p.d_h, fwd, bwd)


def _backward_direction(p: LstmParams, cache: _SeqCache,
                        grad_aligned: np.ndarray) -> np.ndarray:
    """Full BPTT for one direction; accumulates into p, returns grad_xs
    aligned to input positions."""
    m, H = cache.hs.shape
    grads = grad_aligned[::-1] if cache.reverse else grad_aligned
    acts, cs, tcs, hs = cache.acts, cache.c, cache.tc, cache.hs
    Wx, Uh, _ = p._stacked()
    dZ = np.empty((m, 4 * H))
    dh_carry = np.zeros(H)
    dc_carry = np.zeros(H)
    for t in range(m - 1, -1, -1):
        i = acts[t, 0:H]
        f = acts[t, H:2 * H]
        o = acts[t, 2 * H:3 * H]
        g = acts[t, 3 * H:4 * H]
        tc = tcs[t]
        c_prev = cs[t - 1] if t > 0 else np.zeros(H)
        dh = grads[t] + dh_carry
        do = dh * tc
        dc_t = dh * o * (1.0 - tc * tc) + dc_carry
        di = dc_t * g
        dg = dc_t * i
        df = dc_t * c_prev
        dZ[t, 0:H] = di * i * (1.0 - i)
        dZ[t, H:2 * H] = df * f * (1.0 - f)
        dZ[t, 2 * H:3 * H] = do * o * (1.0 - o)
        dZ[t, 3 * H:4 * H] = dg * (1.0 - g * g)
        dh_carry = Uh.T @ dZ[t]
        dc_carry = dc_t * f
    h_prev = np.vstack([np.zeros((1, H)), hs[:-1]])
    p._scatter_grads(dZ.T @ cache.xs, dZ.T @ h_prev, dZ.sum(axis=0))
    dxs = dZ @ Wx
    return dxs[::-1] if cache.reverse else dxs


def lstm_backward_sequence(p: LstmParams, seq: HiddenSequence,
                           grad_states: np.ndarray) -> np.ndarray:
    """Backpropagate upstream gradients (m x d_h, aligned to positions)
    through the whole unrolled sequence.

    Parameter gradients accumulate into p; the returned input gradients
    exist for completeness and are discarded by callers with static
    embeddings.
    """
    grad_states = np.asarray(grad_states, dtype=np.float64)
    if seq.bidirectional:
        raise InvalidShapeError("use blstm_backward_sequence for BLSTM sequences")
    if grad_states.shape != seq.states.shape:
        raise InvalidShapeError(
            f"grad shape {grad_states.shape} does not match states {seq.states.shape}")
    return _backward_direction(p, seq._fwd, grad_states)


def blstm_backward_sequence(p: BlstmParams, seq: HiddenSequence,
                            grad_states: np.ndarray) -> np.ndarray:
    """BPTT through both directions of a BLSTM forward pass."""
    grad_states = np.asarray(grad_states, dtype=np.float64)
    if not seq.bidirectional:
        raise InvalidShapeError("sequence was not produced by blstm_forward")
    if grad_states.shape != seq.states.shape:
        raise InvalidShapeError(
            f"grad shape {grad_states.shape} does not match states {seq.states.shape}")
    H = seq.d_h
    dxs = _backward_direction(p.fwd, seq._fwd, grad_states[:, :H])
    dxs += _backward_direction(p.bwd, seq._bwd, grad_states[:, H:])
    return dxs
