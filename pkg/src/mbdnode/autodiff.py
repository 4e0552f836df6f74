"""Reverse-mode automatic differentiation on dense float64 arrays.

A ``Graph`` is a tape: every operation appends one node recording its parents
and a vector-Jacobian-product closure.  ``Var`` is a handle into the tape that
also carries the forward value, so expressions can be written with normal
Python operators.  Tapes are cheap and meant to be rebuilt for every training
step; a ``Var`` must never be mixed into a graph other than the one that
created it.

Graphs are confined to a single thread; independent graphs may run in
parallel threads freely.  All values are C-order ``float64`` arrays and every
op eagerly rejects non-finite results so that a divergence is reported at the
op that produced it.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

Tensor = np.ndarray  # dense, row-major (C-order), float64

__all__ = [
    "Tensor",
    "NonFiniteError",
    "Graph",
    "Var",
    "Gradients",
    "elementwise",
    "matmul",
    "concat",
    "narrow",
    "reshape",
    "backward",
    "jacobian",
]

# op kinds accepted by elementwise(); unary kinds take no second operand
UNARY_KINDS = ("tanh", "relu", "sigmoid", "sin", "cos", "square", "neg")
BINARY_KINDS = ("add", "sub", "mul")
PARAM_KINDS = ("scale", "shift")  # second operand is a plain Python number


class NonFiniteError(ArithmeticError):
    """An op produced NaN or Inf (or was handed one in a leaf)."""


def as_tensor(x) -> Tensor:
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


def _check_finite(value: Tensor, what: str) -> Tensor:
    if not np.isfinite(value).all():
        raise NonFiniteError(f"non-finite value produced by '{what}'")
    return value


class _Node:
    __slots__ = ("parents", "vjp")

    def __init__(self, parents: tuple, vjp):
        self.parents = parents
        self.vjp = vjp


class Graph:
    """Append-only op tape.  Parents of node i always have indices < i."""

    def __init__(self):
        self._nodes: list[_Node] = []

    def __len__(self) -> int:
        return len(self._nodes)

    def _record(self, value: Tensor, parents: tuple, vjp, kind: str) -> "Var":
        _check_finite(value, kind)
        self._nodes.append(_Node(parents, vjp))
        return Var(self, len(self._nodes) - 1, value)

    def leaf(self, value) -> "Var":
        """Enter a constant or parameter into the tape."""
        return self._record(as_tensor(value), (), None, "leaf")


class Var:
    """Value plus tape handle.  Valid only against the graph that made it."""

    __slots__ = ("graph", "index", "value")

    def __init__(self, graph: Graph, index: int, value: Tensor):
        self.graph = graph
        self.index = index
        self.value = value

    @property
    def shape(self):
        return self.value.shape

    def sum(self) -> "Var":
        """Reduce to a scalar (shape ``()``) by summing all entries."""
        shape = self.value.shape
        out = np.asarray(self.value.sum())
        return self.graph._record(
            out, (self.index,), lambda g: (np.full(shape, g),), "sum")

    # -- operator sugar -------------------------------------------------
    def _lift(self, other) -> "Var":
        if isinstance(other, Var):
            if other.graph is not self.graph:
                raise ValueError("Vars belong to different graphs")
            return other
        return self.graph.leaf(other)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return elementwise("shift", self, float(other))
        return elementwise("add", self, self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return elementwise("shift", self, -float(other))
        return elementwise("sub", self, self._lift(other))

    def __rsub__(self, other):
        return elementwise("sub", self._lift(other), self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return elementwise("scale", self, float(other))
        return elementwise("mul", self, self._lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return elementwise("neg", self)

    def __matmul__(self, other):
        return matmul(self, self._lift(other))

    def __repr__(self):
        return f"Var(#{self.index}, shape={self.value.shape})"


def _unbroadcast(grad: Tensor, shape: tuple) -> Tensor:
    """Sum a broadcasted gradient back down to the operand's shape."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def elementwise(kind: str, a: Var, b=None) -> Var:
    """Apply one elementwise op.

    ``kind`` is one of add/sub/mul (b: Var, broadcast-compatible),
    scale/shift (b: Python number) or tanh/relu/sigmoid/sin/cos/square/neg.
    """
    g = a.graph
    x = a.value
    if kind in BINARY_KINDS:
        if not isinstance(b, Var):
            raise TypeError(f"'{kind}' needs a Var second operand")
        y = b.value
        try:
            np.broadcast_shapes(x.shape, y.shape)
        except ValueError as e:
            raise ValueError(f"shape mismatch in '{kind}': {x.shape} vs {y.shape}") from e
        ash, bsh = x.shape, y.shape
        if kind == "add":
            out = x + y
            vjp = lambda gr: (_unbroadcast(gr, ash), _unbroadcast(gr, bsh))
        elif kind == "sub":
            out = x - y
            vjp = lambda gr: (_unbroadcast(gr, ash), _unbroadcast(-gr, bsh))
        else:  # mul
            out = x * y
            vjp = lambda gr: (_unbroadcast(gr * y, ash), _unbroadcast(gr * x, bsh))
        return g._record(out, (a.index, b.index), vjp, kind)

    if kind in PARAM_KINDS:
        c = float(b)
        if kind == "scale":
            return g._record(x * c, (a.index,), lambda gr: (gr * c,), kind)
        return g._record(x + c, (a.index,), lambda gr: (gr,), kind)

    if kind not in UNARY_KINDS:
        raise ValueError(f"unknown elementwise kind '{kind}'")
    if b is not None:
        raise TypeError(f"'{kind}' is unary")
    if kind == "tanh":
        out = np.tanh(x)
        vjp = lambda gr: (gr * (1.0 - out * out),)
    elif kind == "relu":
        out = np.maximum(x, 0.0)
        vjp = lambda gr: (gr * (x > 0.0),)
    elif kind == "sigmoid":
        out = 1.0 / (1.0 + np.exp(-x))
        vjp = lambda gr: (gr * (out * (1.0 - out)),)
    elif kind == "sin":
        out = np.sin(x)
        vjp = lambda gr: (gr * np.cos(x),)
    elif kind == "cos":
        out = np.cos(x)
        vjp = lambda gr: (-gr * np.sin(x),)
    elif kind == "square":
        out = x * x
        vjp = lambda gr: (2.0 * gr * x,)
    else:  # neg
        out = -x
        vjp = lambda gr: (-gr,)
    return g._record(out, (a.index,), vjp, kind)


def matmul(a: Var, b: Var) -> Var:
    """Matrix product with the usual VJPs dA = G·Bᵀ and dB = Aᵀ·G."""
    x, y = a.value, b.value
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {x.shape} @ {y.shape}")
    vjp = lambda gr: (gr @ y.T, x.T @ gr)
    return a.graph._record(x @ y, (a.index, b.index), vjp, "matmul")


def concat(parts: Sequence[Var], axis: int = 0) -> Var:
    """Concatenate along ``axis``; gradient splits back to the parts."""
    if not parts:
        raise ValueError("concat needs at least one Var")
    g = parts[0].graph
    values = [p.value for p in parts]
    sizes = [v.shape[axis] for v in values]
    offsets = np.cumsum([0] + sizes)

    def vjp(gr):
        return tuple(
            np.take(gr, np.arange(offsets[i], offsets[i + 1]), axis=axis)
            for i in range(len(sizes)))

    return g._record(np.concatenate(values, axis=axis),
                     tuple(p.index for p in parts), vjp, "concat")


def reshape(a: Var, shape) -> Var:
    """View with a new shape; gradient reshapes back."""
    old = a.value.shape
    out = a.value.reshape(shape)
    return a.graph._record(
        np.ascontiguousarray(out), (a.index,),
        lambda gr: (gr.reshape(old),), "reshape")


def narrow(a: Var, axis: int, start: int, length: int) -> Var:
    """Contiguous slice [start, start+length) along ``axis``."""
    x = a.value
    if start < 0 or start + length > x.shape[axis]:
        raise ValueError("narrow out of range")
    idx = [slice(None)] * x.ndim
    idx[axis] = slice(start, start + length)
    idx = tuple(idx)
    shape = x.shape

    def vjp(gr):
        full = np.zeros(shape)
        full[idx] = gr
        return (full,)

    return a.graph._record(np.ascontiguousarray(x[idx]), (a.index,), vjp, "narrow")


class Gradients:
    """Result of a backward sweep: node index -> gradient array.

    Nodes that the loss does not depend on get an exact zero of the right
    shape via :meth:`of`.
    """

    def __init__(self, slots: list):
        self._slots = slots

    def __getitem__(self, index: int) -> Tensor:
        grad = self._slots[index]
        if grad is None:
            raise KeyError(index)
        return grad

    def of(self, var: Var) -> Tensor:
        grad = self._slots[var.index] if var.index < len(self._slots) else None
        if grad is None:
            return np.zeros_like(var.value)
        return np.asarray(grad).reshape(var.value.shape)

    def as_dict(self) -> dict:
        return {i: g for i, g in enumerate(self._slots) if g is not None}


def _sweep(graph: Graph, seed_index: int, seed_value: Tensor) -> Gradients:
    slots: list = [None] * (seed_index + 1)
    slots[seed_index] = seed_value
    nodes = graph._nodes
    for i in range(seed_index, -1, -1):
        grad = slots[i]
        if grad is None:
            continue
        node = nodes[i]
        if not node.parents:
            continue
        for parent, pgrad in zip(node.parents, node.vjp(grad)):
            if slots[parent] is None:
                slots[parent] = pgrad
            else:
                slots[parent] = slots[parent] + pgrad
    return Gradients(slots)


def backward(loss: Var) -> Gradients:
    """Reverse sweep from a scalar loss; exact for the recorded graph."""
    if loss.value.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.value.shape}")
    return _sweep(loss.graph, loss.index, np.ones_like(loss.value))


def jacobian(f: Callable[[Var], Var], x) -> Tensor:
    """Full Jacobian of ``f`` at ``x``: row i is the backward pass from
    output component i.  ``f`` must be built from ops of this module."""
    x = as_tensor(x)
    graph = Graph()
    xv = graph.leaf(x)
    out = f(xv)
    m, n = out.value.size, x.size
    J = np.empty((m, n))
    for i in range(m):
        seed = np.zeros(out.value.shape)
        seed.reshape(-1)[i] = 1.0
        J[i] = _sweep(graph, out.index, seed).of(xv).reshape(-1)
    return J
