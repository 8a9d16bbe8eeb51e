"""Dense tensors with reverse-mode automatic differentiation.

Every operation builds a node in an implicit tape (the graph of parent
links); calling :func:`backward` on a scalar loss walks the tape in
reverse topological order and accumulates gradients into every reachable
tensor. Values are float64 throughout.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "ShapeMismatch",
    "NonFiniteInput",
    "NonScalarLoss",
    "TargetOutOfRange",
    "backward",
    "add",
    "mul",
    "scale",
    "matmul",
    "transpose",
    "concat",
    "stack_rows",
    "slice_cols",
    "row",
    "exp_clamped",
    "embed_lookup",
    "mean",
    "mean_rows",
    "sum_all",
    "relu",
    "tanh",
    "softmax_rows",
    "cross_entropy",
    "linear",
    "multi_head_attention",
    "cross_entropy_rows",
    "dropout",
    "layer_norm_rows",
]

PROB_FLOOR = 1e-12


class ShapeMismatch(ValueError):
    pass


class NonFiniteInput(ValueError):
    pass


class NonScalarLoss(ValueError):
    pass


class TargetOutOfRange(IndexError):
    pass


class Tensor:
    """A value node on the tape: dense array + accumulated gradient."""

    __slots__ = ("values", "grad", "parents", "_backward", "name")

    def __init__(self, values, parents=(), backward=None, name=None):
        arr = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInput(f"non-finite values in tensor {name or '<anon>'}")
        self.values = arr
        self.grad = None
        self.parents = tuple(parents)
        self._backward = backward
        self.name = name

    @property
    def shape(self):
        return self.values.shape

    def accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        self.grad += g

    def zero_grad(self):
        self.grad = None

    def item(self):
        return float(self.values)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, name={self.name!r})"

    # convenience operators
    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g, shape):
    """Sum gradient `g` down to `shape` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def backward(loss: Tensor) -> None:
    """Accumulate gradients of `loss` into every tensor on its tape."""
    if loss.values.ndim != 0 and loss.values.size != 1:
        raise NonScalarLoss(f"loss has shape {loss.shape}")
    # iterative topological sort; tapes can be deep
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
        for p in node.parents:
            if id(p) not in visited:
                stack.append((p, False))
    loss.accumulate(np.ones_like(loss.values))
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out_values = a.values + b.values
    except ValueError as e:
        raise ShapeMismatch(f"add: {a.shape} vs {b.shape}") from e

    def bwd(g):
        a.accumulate(_unbroadcast(g, a.shape))
        b.accumulate(_unbroadcast(g, b.shape))

    return Tensor(out_values, (a, b), bwd)


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out_values = a.values * b.values
    except ValueError as e:
        raise ShapeMismatch(f"mul: {a.shape} vs {b.shape}") from e

    def bwd(g):
        a.accumulate(_unbroadcast(g * b.values, a.shape))
        b.accumulate(_unbroadcast(g * a.values, b.shape))

    return Tensor(out_values, (a, b), bwd)


def scale(a, k: float):
    a = _as_tensor(a)
    k = float(k)

    def bwd(g):
        a.accumulate(g * k)

    return Tensor(a.values * k, (a,), bwd)


def matmul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.values.shape[-1] != b.values.shape[0]:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}")
    out_values = a.values @ b.values

    def bwd(g):
        if a.values.ndim == 1 and b.values.ndim == 1:
            a.accumulate(g * b.values)
            b.accumulate(g * a.values)
        elif a.values.ndim == 1:
            a.accumulate(b.values @ g)
            b.accumulate(np.outer(a.values, g))
        elif b.values.ndim == 1:
            a.accumulate(np.outer(g, b.values))
            b.accumulate(a.values.T @ g)
        else:
            a.accumulate(g @ b.values.T)
            b.accumulate(a.values.T @ g)

    return Tensor(out_values, (a, b), bwd)


def transpose(a):
    a = _as_tensor(a)

    def bwd(g):
        a.accumulate(g.T)

    return Tensor(a.values.T, (a,), bwd)


def concat(tensors, axis=0):
    tensors = [_as_tensor(t) for t in tensors]
    try:
        out_values = np.concatenate([t.values for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeMismatch(f"concat along {axis}: {[t.shape for t in tensors]}") from e
    sizes = [t.values.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            t.accumulate(g[tuple(idx)])

    return Tensor(out_values, tuple(tensors), bwd)


def stack_rows(vectors):
    """Stack 1-D tensors into a matrix, one vector per row."""
    vectors = [_as_tensor(v) for v in vectors]

    def bwd(g):
        for i, v in enumerate(vectors):
            v.accumulate(g[i])

    return Tensor(np.stack([v.values for v in vectors]), tuple(vectors), bwd)


def embed_lookup(table, ids):
    """Gather rows of `table` (V x H) at integer positions `ids`."""
    table = _as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.values.shape[0]):
        raise TargetOutOfRange(f"id out of range for table of {table.values.shape[0]} rows")

    def bwd(g):
        if table.grad is None:
            table.grad = np.zeros_like(table.values)
        np.add.at(table.grad, ids, g)

    return Tensor(table.values[ids], (table,), bwd)


def slice_cols(a, lo: int, hi: int):
    a = _as_tensor(a)

    def bwd(g):
        ga = np.zeros_like(a.values)
        ga[..., lo:hi] = g
        a.accumulate(ga)

    return Tensor(a.values[..., lo:hi], (a,), bwd)


def row(a, i: int):
    """Extract row i of a matrix as a 1-D tensor."""
    a = _as_tensor(a)

    def bwd(g):
        ga = np.zeros_like(a.values)
        ga[i] = g
        a.accumulate(ga)

    return Tensor(a.values[i], (a,), bwd)


def exp_clamped(a, cap: float):
    """exp(x) clipped from above at `cap`; zero gradient where clipped."""
    a = _as_tensor(a)
    e = np.exp(np.minimum(a.values, np.log(cap)))
    active = a.values < np.log(cap)

    def bwd(g):
        a.accumulate(g * e * active)

    return Tensor(np.minimum(e, cap), (a,), bwd)


def mean(a):
    a = _as_tensor(a)
    n = a.values.size

    def bwd(g):
        a.accumulate(np.full_like(a.values, g / n))

    return Tensor(a.values.mean(), (a,), bwd)


def mean_rows(a):
    """Column-wise mean of a matrix: (n, H) -> (H,)."""
    a = _as_tensor(a)
    n = a.values.shape[0]

    def bwd(g):
        a.accumulate(np.broadcast_to(g / n, a.values.shape).copy())

    return Tensor(a.values.mean(axis=0), (a,), bwd)


def sum_all(a):
    a = _as_tensor(a)

    def bwd(g):
        a.accumulate(np.full_like(a.values, g))

    return Tensor(a.values.sum(), (a,), bwd)


def relu(a):
    a = _as_tensor(a)
    mask = a.values > 0

    def bwd(g):
        a.accumulate(g * mask)

    return Tensor(a.values * mask, (a,), bwd)


def tanh(a):
    a = _as_tensor(a)
    out_values = np.tanh(a.values)

    def bwd(g):
        a.accumulate(g * (1.0 - out_values**2))

    return Tensor(out_values, (a,), bwd)


def softmax_rows(a, mask=None):
    """Numerically stable softmax over the last axis.

    `mask`, if given, is a boolean array broadcastable to `a`; False
    positions receive zero probability (and must not cover a full row).
    """
    a = _as_tensor(a)
    z = a.values
    if mask is not None:
        z = np.where(mask, z, -np.inf)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=-1, keepdims=True)

    def bwd(g):
        dot = (g * p).sum(axis=-1, keepdims=True)
        a.accumulate(p * (g - dot))

    return Tensor(p, (a,), bwd)


def cross_entropy(p, target: int):
    """-ln p[target] for a probability vector, floored at PROB_FLOOR."""
    p = _as_tensor(p)
    if not 0 <= target < p.values.shape[-1]:
        raise TargetOutOfRange(f"target {target} for {p.shape}")
    pt = max(p.values[target], PROB_FLOOR)

    def bwd(g):
        gp = np.zeros_like(p.values)
        gp[target] = -g / pt
        p.accumulate(gp)

    return Tensor(-np.log(pt), (p,), bwd)


def cross_entropy_rows(p, targets):
    """Mean of -ln p[t, targets[t]] over rows of a probability matrix."""
    p = _as_tensor(p)
    targets = np.asarray(targets, dtype=np.int64)
    n, v = p.values.shape
    if targets.shape != (n,):
        raise ShapeMismatch(f"{n} rows vs {targets.shape} targets")
    if targets.size and (targets.min() < 0 or targets.max() >= v):
        raise TargetOutOfRange("target id outside vocabulary")
    pt = np.maximum(p.values[np.arange(n), targets], PROB_FLOOR)

    def bwd(g):
        gp = np.zeros_like(p.values)
        gp[np.arange(n), targets] = -g / (n * pt)
        p.accumulate(gp)

    return Tensor(-np.log(pt).mean(), (p,), bwd)


def linear(x, w, b):
    """x @ w + b with b broadcast over rows."""
    x, w, b = _as_tensor(x), _as_tensor(w), _as_tensor(b)
    if x.values.shape[-1] != w.values.shape[0]:
        raise ShapeMismatch(f"linear: {x.shape} @ {w.shape}")
    out_values = x.values @ w.values + b.values

    def bwd(g):
        x.accumulate(g @ w.values.T)
        w.accumulate(x.values.T @ g if x.values.ndim > 1 else np.outer(x.values, g))
        b.accumulate(g.sum(axis=0) if g.ndim > 1 else g)

    return Tensor(out_values, (x, w, b), bwd)


def multi_head_attention(x, memory, wq, wk, wv, wo, heads: int, causal: bool):
    """Fused scaled dot-product attention over `heads` column blocks.

    x: (n, H) queries; memory: (m, H) keys/values; all projections H x H.
    Implemented as a single tape node with an analytic backward rule to
    keep the tape short.
    """
    x, memory = _as_tensor(x), _as_tensor(memory)
    wq, wk, wv, wo = _as_tensor(wq), _as_tensor(wk), _as_tensor(wv), _as_tensor(wo)
    n, h = x.values.shape
    m = memory.values.shape[0]
    if h % heads != 0:
        raise ShapeMismatch(f"{h} hidden not divisible by {heads} heads")
    dh = h // heads
    s = 1.0 / np.sqrt(dh)

    def split(a):  # (rows, H) -> (heads, rows, dh)
        return a.reshape(a.shape[0], heads, dh).transpose(1, 0, 2)

    q = split(x.values @ wq.values)
    k = split(memory.values @ wk.values)
    v = split(memory.values @ wv.values)
    z = np.matmul(q, k.transpose(0, 2, 1)) * s        # (heads, n, m)
    if causal:
        z = np.where(np.tril(np.ones((n, m), dtype=bool)), z, -np.inf)
    z -= z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    a = e / e.sum(axis=-1, keepdims=True)             # (heads, n, m)
    o = np.matmul(a, v)                               # (heads, n, dh)
    o_flat = o.transpose(1, 0, 2).reshape(n, h)
    out_values = o_flat @ wo.values

    def bwd(g):
        do_flat = g @ wo.values.T
        wo.accumulate(o_flat.T @ g)
        do = split(do_flat)
        da = np.matmul(do, v.transpose(0, 2, 1))
        dv = np.matmul(a.transpose(0, 2, 1), do)
        dz = a * (da - (da * a).sum(axis=-1, keepdims=True))
        dq = np.matmul(dz, k) * s
        dk = np.matmul(dz.transpose(0, 2, 1), q) * s

        def merge(t):  # (heads, rows, dh) -> (rows, H)
            return t.transpose(1, 0, 2).reshape(t.shape[1], h)

        dq_f, dk_f, dv_f = merge(dq), merge(dk), merge(dv)
        x.accumulate(dq_f @ wq.values.T)
        memory.accumulate(dk_f @ wk.values.T + dv_f @ wv.values.T)
        wq.accumulate(x.values.T @ dq_f)
        wk.accumulate(memory.values.T @ dk_f)
        wv.accumulate(memory.values.T @ dv_f)

    return Tensor(out_values, (x, memory, wq, wk, wv, wo), bwd)


def dropout(a, rate: float, rng: np.random.Generator | None):
    """Inverted dropout; identity when rng is None (evaluation) or rate 0."""
    a = _as_tensor(a)
    if rng is None or rate <= 0.0:
        return a
    keep = 1.0 - rate
    dmask = (rng.random(a.values.shape) < keep) / keep

    def bwd(g):
        a.accumulate(g * dmask)

    return Tensor(a.values * dmask, (a,), bwd)


def layer_norm_rows(a, gain, bias, eps: float = 1e-5):
    """Per-row layer normalization with learned gain and bias."""
    a, gain, bias = _as_tensor(a), _as_tensor(gain), _as_tensor(bias)
    x = a.values
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    out_values = xhat * gain.values + bias.values

    def bwd(g):
        gxhat = g * gain.values
        dx = inv * (gxhat - gxhat.mean(axis=-1, keepdims=True)
                    - xhat * (gxhat * xhat).mean(axis=-1, keepdims=True))
        a.accumulate(dx)
        axes = tuple(range(g.ndim - 1))
        gain.accumulate((g * xhat).sum(axis=axes) if axes else g * xhat)
        bias.accumulate(g.sum(axis=axes) if axes else g)

    return Tensor(out_values, (a, gain, bias), bwd)
