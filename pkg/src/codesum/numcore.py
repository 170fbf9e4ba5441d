"""Dense float64 tensors with reverse-mode gradients, plus the
transformer primitives built on them: positional encoding, softmax,
multi-head attention, feed-forward, layer norm, and dropout.

The graph is taped implicitly: every op returns a Tensor holding a
backward closure; `backward(loss)` walks the tape in reverse
topological order and accumulates gradients into every reachable
tensor with `requires_grad` set. Everything runs in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FullyMaskedError(ValueError):
    """An attention query row with every key position disallowed."""


class Tensor:
    """A dense array plus an optional gradient slot and tape linkage."""

    # numpy must defer to our reflected operators instead of building
    # object arrays
    __array_ufunc__ = None

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return "Tensor(shape=%r, requires_grad=%r)" % (self.shape, self.requires_grad)

    # -- operator sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __getitem__(self, key):
        return take(self, key)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, shape)

    def transpose(self):
        return transpose(self)

    @property
    def T(self):
        return transpose(self)


class Parameter(Tensor):
    """A named Tensor tracked by the optimizer; frozen ones never get grads."""

    __slots__ = ("name", "trainable")

    def __init__(self, data, name: str, trainable: bool = True):
        super().__init__(data, requires_grad=trainable)
        self.name = name
        self.trainable = trainable


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _from_op(data, parents) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
    return out


def _acc(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


# -- primitive ops -------------------------------------------------------

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = _from_op(a.data + b.data, (a, b))
    if out.requires_grad:
        def _bw():
            _acc(a, _unbroadcast(out.grad, a.data.shape))
            _acc(b, _unbroadcast(out.grad, b.data.shape))
        out._backward = _bw
    return out


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = _from_op(a.data - b.data, (a, b))
    if out.requires_grad:
        def _bw():
            _acc(a, _unbroadcast(out.grad, a.data.shape))
            _acc(b, _unbroadcast(-out.grad, b.data.shape))
        out._backward = _bw
    return out


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = _from_op(a.data * b.data, (a, b))
    if out.requires_grad:
        def _bw():
            _acc(a, _unbroadcast(out.grad * b.data, a.data.shape))
            _acc(b, _unbroadcast(out.grad * a.data, b.data.shape))
        out._backward = _bw
    return out


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = _from_op(a.data / b.data, (a, b))
    if out.requires_grad:
        def _bw():
            _acc(a, _unbroadcast(out.grad / b.data, a.data.shape))
            _acc(b, _unbroadcast(-out.grad * a.data / (b.data * b.data), b.data.shape))
        out._backward = _bw
    return out


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError("matmul expects 2-D operands, got %r and %r" % (a.shape, b.shape))
    if a.data.shape[1] != b.data.shape[0]:
        raise ValueError("matmul shape mismatch: %r @ %r" % (a.shape, b.shape))
    out = _from_op(a.data @ b.data, (a, b))
    if out.requires_grad:
        def _bw():
            _acc(a, out.grad @ b.data.T)
            _acc(b, a.data.T @ out.grad)
        out._backward = _bw
    return out


def relu(x):
    x = as_tensor(x)
    out = _from_op(np.maximum(x.data, 0.0), (x,))
    if out.requires_grad:
        def _bw():
            _acc(x, out.grad * (x.data > 0.0))
        out._backward = _bw
    return out


def exp(x):
    x = as_tensor(x)
    out = _from_op(np.exp(x.data), (x,))
    if out.requires_grad:
        def _bw():
            _acc(x, out.grad * out.data)
        out._backward = _bw
    return out


def log(x):
    x = as_tensor(x)
    out = _from_op(np.log(x.data), (x,))
    if out.requires_grad:
        def _bw():
            _acc(x, out.grad / x.data)
        out._backward = _bw
    return out


def sqrt(x):
    x = as_tensor(x)
    out = _from_op(np.sqrt(x.data), (x,))
    if out.requires_grad:
        def _bw():
            _acc(x, out.grad * 0.5 / out.data)
        out._backward = _bw
    return out


def tsum(x, axis=None, keepdims=False):
    x = as_tensor(x)
    out = _from_op(x.data.sum(axis=axis, keepdims=keepdims), (x,))
    if out.requires_grad:
        def _bw():
            g = out.grad
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            _acc(x, np.broadcast_to(g, x.data.shape).copy())
        out._backward = _bw
    return out


def tmean(x, axis=None, keepdims=False):
    x = as_tensor(x)
    count = x.data.size if axis is None else x.data.shape[axis]
    return mul(tsum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(x, shape):
    x = as_tensor(x)
    out = _from_op(x.data.reshape(shape), (x,))
    if out.requires_grad:
        def _bw():
            _acc(x, out.grad.reshape(x.data.shape))
        out._backward = _bw
    return out


def transpose(x):
    x = as_tensor(x)
    out = _from_op(x.data.T, (x,))
    if out.requires_grad:
        def _bw():
            _acc(x, out.grad.T)
        out._backward = _bw
    return out


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    out = _from_op(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    if out.requires_grad:
        sizes = [t.data.shape[axis] for t in tensors]
        offsets = np.cumsum(sizes)[:-1]
        def _bw():
            for t, piece in zip(tensors, np.split(out.grad, offsets, axis=axis)):
                _acc(t, piece)
        out._backward = _bw
    return out


def take(x, key):
    """Index with ints, slices, or integer arrays; backward scatter-adds."""
    x = as_tensor(x)
    out = _from_op(x.data[key], (x,))
    if out.requires_grad:
        def _bw():
            g = np.zeros_like(x.data)
            np.add.at(g, key, out.grad)
            _acc(x, g)
        out._backward = _bw
    return out


def gather_rows(table, ids):
    """Row lookup by integer id (the embedding primitive)."""
    ids = np.asarray(ids, dtype=np.int64)
    n = table.data.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        raise IndexError("id out of range for table with %d rows" % n)
    return take(table, ids)


def masked_fill(x, disallowed, value):
    """Replace entries where `disallowed` is True; no gradient flows there."""
    x = as_tensor(x)
    disallowed = np.asarray(disallowed, dtype=bool)
    out = _from_op(np.where(disallowed, value, x.data), (x,))
    if out.requires_grad:
        def _bw():
            _acc(x, out.grad * ~disallowed)
        out._backward = _bw
    return out


def backward(loss: Tensor) -> None:
    """Populate grads of everything `loss` depends on. Scalar losses only."""
    if loss.data.size != 1:
        raise ValueError("backward requires a scalar loss, got shape %r" % (loss.shape,))
    if not loss.requires_grad:
        raise ValueError("loss does not depend on any trainable tensor")
    order = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward()


def zero_grads(params) -> None:
    for p in params:
        p.grad = None


# -- transformer primitives ----------------------------------------------

@dataclass(frozen=True)
class AttentionConfig:
    """Model width, head count, and shared per-head Q/K/V dimension."""

    d_model: int
    n_heads: int
    d_k: int = 64


def positional_encoding(length: int, d_model: int) -> np.ndarray:
    """Sinusoidal position table: sin at even columns, cos at odd ones."""
    if d_model % 2 != 0:
        raise ValueError("d_model must be even, got %d" % d_model)
    pos = np.arange(length, dtype=np.float64)[:, None]
    i = np.arange(d_model // 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * i / d_model)
    pe = np.empty((length, d_model), dtype=np.float64)
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle)
    return pe


def softmax(x, axis=-1):
    """Row-stable softmax; rows of -inf entries get exactly zero weight."""
    x = as_tensor(x)
    shift = x.data.max(axis=axis, keepdims=True)  # constant: softmax is shift-invariant
    e = exp(sub(x, shift))
    return div(e, tsum(e, axis=axis, keepdims=True))


def log_softmax(x, axis=-1):
    x = as_tensor(x)
    shift = x.data.max(axis=axis, keepdims=True)
    shifted = sub(x, shift)
    return sub(shifted, log(tsum(exp(shifted), axis=axis, keepdims=True)))


def _expand_mask(mask, n_queries):
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim == 1:
        mask = np.broadcast_to(mask, (n_queries, mask.shape[0]))
    if not mask.any(axis=1).all():
        raise FullyMaskedError("a query row has no allowed key positions")
    return mask


def scaled_dot_attention(q, k, v, d_k, mask=None, return_weights=False):
    """softmax(q k^T / sqrt(d_k)) v with optional key masking.

    `mask` is True at key positions a query may attend to; disallowed
    positions get weight exactly 0.
    """
    scores = mul(matmul(q, transpose(k)), 1.0 / np.sqrt(d_k))
    if mask is not None:
        allowed = _expand_mask(mask, scores.data.shape[0])
        scores = masked_fill(scores, ~allowed, -np.inf)
    weights = softmax(scores, axis=-1)
    out = matmul(weights, v)
    if return_weights:
        return out, weights
    return out


class AttentionParams:
    """Per-head projection weights plus the output projection."""

    def __init__(self, name, d_q_in, d_kv_in, cfg: AttentionConfig, rng, d_out=None):
        d_out = cfg.d_model if d_out is None else d_out
        self.cfg = cfg
        self.wq = [
            Parameter(glorot(d_q_in, cfg.d_k, rng), "%s.wq%d" % (name, j))
            for j in range(cfg.n_heads)
        ]
        self.wk = [
            Parameter(glorot(d_kv_in, cfg.d_k, rng), "%s.wk%d" % (name, j))
            for j in range(cfg.n_heads)
        ]
        self.wv = [
            Parameter(glorot(d_kv_in, cfg.d_k, rng), "%s.wv%d" % (name, j))
            for j in range(cfg.n_heads)
        ]
        self.wo = Parameter(glorot(cfg.n_heads * cfg.d_k, d_out, rng), "%s.wo" % name)

    def parameters(self):
        yield from self.wq
        yield from self.wk
        yield from self.wv
        yield self.wo


def multi_head_attention(q_in, k_in, v_in, params: AttentionParams, mask=None,
                         return_weights=False):
    """Concat of per-head scaled-dot attentions, projected by wo.

    `mask` (1-D over keys, or (Lq, Lk)) is True where attention is
    allowed; a fully masked query row raises FullyMaskedError.
    """
    q_in, k_in, v_in = as_tensor(q_in), as_tensor(k_in), as_tensor(v_in)
    if k_in.data.shape[0] != v_in.data.shape[0]:
        raise ValueError("key and value row counts differ")
    heads = []
    all_weights = []
    for j in range(params.cfg.n_heads):
        q = matmul(q_in, params.wq[j])
        k = matmul(k_in, params.wk[j])
        v = matmul(v_in, params.wv[j])
        head, w = scaled_dot_attention(q, k, v, params.cfg.d_k, mask=mask,
                                       return_weights=True)
        heads.append(head)
        all_weights.append(w)
    out = matmul(concat(heads, axis=1), params.wo)
    if return_weights:
        return out, all_weights
    return out


class FeedForwardParams:
    def __init__(self, name, d_model, d_ff, rng):
        self.w1 = Parameter(glorot(d_model, d_ff, rng), name + ".w1")
        self.b1 = Parameter(np.zeros(d_ff), name + ".b1")
        self.w2 = Parameter(glorot(d_ff, d_model, rng), name + ".w2")
        self.b2 = Parameter(np.zeros(d_model), name + ".b2")

    def parameters(self):
        yield from (self.w1, self.b1, self.w2, self.b2)


def feed_forward(x, params: FeedForwardParams):
    """max(0, x w1 + b1) w2 + b2, applied row-wise."""
    return add(matmul(relu(add(matmul(x, params.w1), params.b1)), params.w2), params.b2)


# Gains start above 1: with a small fixed SGD step and no schedule, logit
# margins grow with ||gain||^2, and 1.0 is too slow at desk scale.
LAYER_NORM_GAIN_INIT = 2.0


class LayerNormParams:
    def __init__(self, name, dim):
        self.gain = Parameter(np.full(dim, LAYER_NORM_GAIN_INIT), name + ".gain")
        self.bias = Parameter(np.zeros(dim), name + ".bias")

    def parameters(self):
        yield from (self.gain, self.bias)


LAYER_NORM_EPS = 1e-5


def layer_norm(x, gain, bias, eps=LAYER_NORM_EPS):
    """Per-row standardization followed by an elementwise affine map."""
    mu = tmean(x, axis=-1, keepdims=True)
    centered = sub(x, mu)
    var = tmean(mul(centered, centered), axis=-1, keepdims=True)
    normalized = div(centered, sqrt(add(var, eps)))
    return add(mul(normalized, gain), bias)


def dropout(x, rate, rng, training):
    """Inverted dropout; identity at rate 0 or outside training."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must be in [0, 1)")
    if not training or rate == 0.0:
        return as_tensor(x)
    keep = (rng.random(as_tensor(x).data.shape) >= rate) / (1.0 - rate)
    return mul(x, keep)


def glorot(fan_in, fan_out, rng):
    """Uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))
