"""Minimal reverse-mode automatic differentiation over numpy arrays.

Tensors wrap ndarrays and remember how they were produced; ``backward``
walks the graph in reverse topological order and accumulates gradients into
``grad``.  Ops are deliberately few and fused where the network needs speed
or numerical care (masked softmax, layer norm, GELU, masked cross-entropy).
Everything is plain numpy, so a computation is bit-reproducible for a fixed
thread count, and float32/float64 behavior follows the input dtypes.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

__all__ = [
    "Tensor", "tensor", "add", "sub", "mul", "matmul", "linear", "reshape",
    "transpose", "concat", "take", "take_along_batch", "embedding", "tsum",
    "gelu", "layer_norm", "masked_softmax", "masked_ce", "backward",
    "Parameters",
]


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, parents=(), backward=None):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, -1.0)


def tensor(data, requires_grad: bool = False) -> Tensor:
    return Tensor(np.asarray(data), requires_grad=requires_grad)


def _accum(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _wrap(data, parents, bw) -> Tensor:
    req = any(p.requires_grad for p in parents)
    return Tensor(data, req, tuple(parents) if req else (), bw if req else None)


def _const(x, like: Tensor) -> np.ndarray:
    return np.asarray(x, dtype=like.data.dtype)


# ---------------------------------------------------------------------------
# Elementwise and shape ops


def add(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        return _wrap(a.data + _const(b, a), (a,), lambda g, a=a: _accum(a, _unbroadcast(g, a.shape)))
    out = a.data + b.data

    def bw(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))

    return _wrap(out, (a, b), bw)


def sub(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        return add(a, -np.asarray(b))
    return add(a, mul(b, -1.0))


def mul(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        c = _const(b, a)
        return _wrap(a.data * c, (a,), lambda g, a=a, c=c: _accum(a, _unbroadcast(g * c, a.shape)))
    out = a.data * b.data

    def bw(g):
        _accum(a, _unbroadcast(g * b.data, a.shape))
        _accum(b, _unbroadcast(g * a.data, b.shape))

    return _wrap(out, (a, b), bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Stacked matrix product [..., m, k] @ [..., k, n] with broadcasting."""
    out = a.data @ b.data

    def bw(g):
        _accum(a, _unbroadcast(g @ b.data.swapaxes(-1, -2), a.shape))
        _accum(b, _unbroadcast(a.data.swapaxes(-1, -2) @ g, b.shape))

    return _wrap(out, (a, b), bw)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """x [..., din] @ w [din, dout] (+ b [dout])."""
    out = x.data @ w.data
    if b is not None:
        out = out + b.data
    parents = (x, w) if b is None else (x, w, b)

    def bw(g):
        _accum(x, g @ w.data.T)
        g2 = g.reshape(-1, g.shape[-1])
        _accum(w, x.data.reshape(-1, x.data.shape[-1]).T @ g2)
        if b is not None:
            _accum(b, g2.sum(axis=0))

    return _wrap(out, parents, bw)


def reshape(x: Tensor, shape) -> Tensor:
    return _wrap(x.data.reshape(shape), (x,), lambda g: _accum(x, g.reshape(x.data.shape)))


def transpose(x: Tensor, axes) -> Tensor:
    inv = np.argsort(axes)
    return _wrap(x.data.transpose(axes), (x,), lambda g: _accum(x, g.transpose(inv)))


def concat(parts: list[Tensor], axis: int = -1) -> Tensor:
    out = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        for p, piece in zip(parts, np.split(g, splits, axis=axis)):
            _accum(p, piece)

    return _wrap(out, tuple(parts), bw)


def take(x: Tensor, indices: np.ndarray, axis: int = 0) -> Tensor:
    indices = np.asarray(indices)
    out = np.take(x.data, indices, axis=axis)

    def bw(g):
        if not x.requires_grad:
            return
        if x.grad is None:
            x.grad = np.zeros_like(x.data)
        gm = np.moveaxis(g, axis, 0) if axis else g
        tgt = np.moveaxis(x.grad, axis, 0) if axis else x.grad
        np.add.at(tgt, indices.reshape(-1) if indices.ndim > 1 else indices,
                  gm.reshape((-1,) + gm.shape[indices.ndim:]) if indices.ndim > 1 else gm)

    return _wrap(out, (x,), bw)


def take_along_batch(x: Tensor, idx: np.ndarray) -> Tensor:
    """x [B, N, ...], idx [B, S] integer -> out [B, S, ...]."""
    b = np.arange(x.data.shape[0])[:, None]
    out = x.data[b, idx]

    def bw(g):
        if not x.requires_grad:
            return
        if x.grad is None:
            x.grad = np.zeros_like(x.data)
        np.add.at(x.grad, (b, idx), g)

    return _wrap(out, (x,), bw)


def embedding(table: Tensor, idx: np.ndarray) -> Tensor:
    """Row lookup: out[..., :] = table[idx[...]]."""
    idx = np.asarray(idx)
    out = table.data[idx]

    def bw(g):
        if not table.requires_grad:
            return
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        np.add.at(table.grad, idx, g)

    return _wrap(out, (table,), bw)


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def bw(g):
        if axis is None:
            _accum(x, np.broadcast_to(g, x.data.shape).copy())
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            _accum(x, np.broadcast_to(gg, x.data.shape).copy())

    return _wrap(out, (x,), bw)


# ---------------------------------------------------------------------------
# Fused network ops


def gelu(x: Tensor) -> Tensor:
    """Exact (erf-based) GELU."""
    xd = x.data
    inv_sqrt2 = np.array(1.0, dtype=xd.dtype) / np.sqrt(np.array(2.0, dtype=xd.dtype))
    phi = 0.5 * (1.0 + erf(xd * inv_sqrt2))
    out = xd * phi

    def bw(g):
        pdf = np.exp(-0.5 * xd * xd) / np.sqrt(np.array(2.0 * np.pi, dtype=xd.dtype))
        _accum(x, g * (phi + xd * pdf))

    return _wrap(out.astype(xd.dtype, copy=False), (x,), bw)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalization over the last axis with learned scale and offset."""
    xd = x.data
    mu = xd.mean(axis=-1, keepdims=True)
    var = xd.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + np.asarray(eps, dtype=xd.dtype))
    xhat = (xd - mu) * inv
    out = xhat * gamma.data + beta.data
    n = xd.shape[-1]

    def bw(g):
        gg = g * gamma.data
        m1 = gg.mean(axis=-1, keepdims=True)
        m2 = (gg * xhat).mean(axis=-1, keepdims=True)
        _accum(x, inv * (gg - m1 - xhat * m2))
        axes = tuple(range(g.ndim - 1))
        _accum(gamma, (g * xhat).sum(axis=axes))
        _accum(beta, g.sum(axis=axes))

    del n
    return _wrap(out.astype(xd.dtype, copy=False), (x, gamma, beta), bw)


def masked_softmax(scores: Tensor, mask: np.ndarray) -> Tensor:
    """Softmax over the last axis restricted to allowed (True) entries.

    Disallowed entries behave as -inf pre-softmax and come out exactly 0,
    so masked keys contribute nothing, bit for bit.  Rows with no allowed
    entry produce an all-zero distribution instead of NaN.
    """
    xd = scores.data
    mask = np.broadcast_to(mask, xd.shape)
    neg = np.where(mask, xd, -np.inf)
    m = neg.max(axis=-1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0).astype(xd.dtype, copy=False)
    e = np.where(mask, np.exp(np.where(mask, xd, m) - m), 0.0).astype(xd.dtype, copy=False)
    denom = e.sum(axis=-1, keepdims=True)
    y = np.divide(e, denom, out=np.zeros_like(e), where=denom > 0)

    def bw(g):
        dot = (g * y).sum(axis=-1, keepdims=True)
        _accum(scores, y * (g - dot))

    return _wrap(y, (scores,), bw)


def masked_ce(
    logits: Tensor,
    targets: np.ndarray,
    weights: np.ndarray,
    vocab_limits: np.ndarray | None = None,
) -> Tensor:
    """Sum of weighted cross-entropies: logits [N, V], integer targets [N].

    ``vocab_limits`` restricts the softmax of row n to its first
    vocab_limits[n] entries (per-type vocabularies padded into one matrix).
    ``weights`` carries validity masks and loss gates; zero-weight rows
    contribute nothing, in value or gradient.
    """
    xd = logits.data
    n, v = xd.shape
    if vocab_limits is None:
        vm = np.ones((n, v), dtype=bool)
    else:
        vm = np.arange(v)[None, :] < np.asarray(vocab_limits)[:, None]
    neg = np.where(vm, xd, -np.inf)
    m = neg.max(axis=-1, keepdims=True)
    e = np.where(vm, np.exp(np.where(vm, xd, m) - m), 0.0).astype(xd.dtype, copy=False)
    s = e.sum(axis=-1, keepdims=True)
    logz = (m + np.log(s)).squeeze(-1)
    rows = np.arange(n)
    nll = (logz - xd[rows, targets]) * weights
    out = nll.sum()

    def bw(g):
        soft = e / s
        soft[rows, targets] -= 1.0
        _accum(logits, (g * weights)[:, None] * soft)

    return _wrap(np.asarray(out, dtype=xd.dtype), (logits,), bw)


# ---------------------------------------------------------------------------
# Backward pass and parameter store


def backward(loss: Tensor, grad: np.ndarray | None = None) -> None:
    if grad is None:
        grad = np.ones_like(loss.data)
    loss.grad = np.asarray(grad, dtype=loss.data.dtype)
    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, done = stack.pop()
        if done:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))
    for node in reversed(topo):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


class Parameters:
    """Named learnable arrays with a stable iteration order."""

    def __init__(self):
        self._store: dict[str, Tensor] = {}

    def add(self, name: str, array: np.ndarray) -> Tensor:
        if name in self._store:
            raise KeyError(f"duplicate parameter {name!r}")
        t = Tensor(np.asarray(array), requires_grad=True)
        self._store[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._store[name]

    def __contains__(self, name: str) -> bool:
        return name in self._store

    def names(self) -> list[str]:
        return sorted(self._store)

    def items(self):
        return [(k, self._store[k]) for k in self.names()]

    def zero_grad(self) -> None:
        for t in self._store.values():
            t.grad = None

    def n_scalars(self) -> int:
        return sum(t.data.size for t in self._store.values())

    def astype(self, dtype) -> "Parameters":
        out = Parameters()
        for k, t in self.items():
            out.add(k, t.data.astype(dtype))
        return out
