"""Reverse-mode automatic differentiation over dense float64 arrays.

A Tensor wraps a numpy array together with a gradient buffer and links to the
tensors it was computed from.  Every operation records a closure that knows how
to push the output adjoint back into its parents, so calling backward() on a
scalar result fills .grad of every upstream tensor that requires it.  The graph
is dynamic: it is rebuilt from scratch on every forward pass, which keeps
variable-length sequence models simple.

All arithmetic is 64-bit.  Gradients accumulate additively; callers zero them
between optimization steps.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DomainError, ShapeError, UsageError


class Tensor:
    """Node of the differentiation graph: values, gradient, and provenance."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad=False, _parents=(), _op="leaf"):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = None
        self._op = _op

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def zero_grad(self):
        self.grad[...] = 0.0

    def item(self):
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self._op}, requires_grad={self.requires_grad})"

    # operator sugar; binary ops take Tensors, scalars go through scale()
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def _result(data, parents, op):
    out = Tensor(data, requires_grad=any(p.requires_grad for p in parents),
                 _parents=tuple(parents), _op=op)
    return out


def trace(root: Tensor) -> list[Tensor]:
    """Nodes reachable from root in topological order (parents first).

    Iterative depth-first search; sequence graphs routinely exceed Python's
    recursion limit.
    """
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(root: Tensor) -> None:
    """Accumulate d(root)/d(tensor) into .grad of every reachable tensor.

    root must be scalar (shape ()).  Grads add up across calls and across
    shared subgraphs; callers zero them between steps.
    """
    if root.data.ndim != 0:
        raise UsageError(f"backward root must be scalar, got shape {root.shape}")
    order = trace(root)
    root.grad = np.asarray(1.0)
    for node in reversed(order):
        if node._backward is not None and node.requires_grad:
            node._backward()


# ---------------------------------------------------------------------------
# core operations


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product; b may be 1-D for a matrix-vector product."""
    if a.data.ndim != 2 or b.data.ndim not in (1, 2):
        raise ShapeError(f"matmul expects 2-D @ 1-or-2-D, got {a.shape} @ {b.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} @ {b.shape}")
    out = _result(a.data @ b.data, (a, b), "matmul")

    def _bw():
        g = out.grad
        if b.data.ndim == 1:
            if a.requires_grad:
                a.grad += np.outer(g, b.data)
            if b.requires_grad:
                b.grad += a.data.T @ g
        else:
            if a.requires_grad:
                a.grad += g @ b.data.T
            if b.requires_grad:
                b.grad += a.data.T @ g

    out._backward = _bw
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"add requires equal shapes, got {a.shape} and {b.shape}")
    out = _result(a.data + b.data, (a, b), "add")

    def _bw():
        if a.requires_grad:
            a.grad += out.grad
        if b.requires_grad:
            b.grad += out.grad

    out._backward = _bw
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"mul requires equal shapes, got {a.shape} and {b.shape}")
    out = _result(a.data * b.data, (a, b), "mul")

    def _bw():
        if a.requires_grad:
            a.grad += out.grad * b.data
        if b.requires_grad:
            b.grad += out.grad * a.data

    out._backward = _bw
    return out


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    out = _result(x.data * c, (x,), "scale")

    def _bw():
        if x.requires_grad:
            x.grad += out.grad * c

    out._backward = _bw
    return out


def sigmoid(x: Tensor) -> Tensor:
    d = x.data
    # split by sign to avoid overflow in exp
    s = np.where(d >= 0, 1.0 / (1.0 + np.exp(-np.abs(d))),
                 np.exp(-np.abs(d)) / (1.0 + np.exp(-np.abs(d))))
    out = _result(s, (x,), "sigmoid")

    def _bw():
        if x.requires_grad:
            x.grad += out.grad * out.data * (1.0 - out.data)

    out._backward = _bw
    return out


def tanh(x: Tensor) -> Tensor:
    out = _result(np.tanh(x.data), (x,), "tanh")

    def _bw():
        if x.requires_grad:
            x.grad += out.grad * (1.0 - out.data * out.data)

    out._backward = _bw
    return out


def exp(x: Tensor) -> Tensor:
    out = _result(np.exp(x.data), (x,), "exp")

    def _bw():
        if x.requires_grad:
            x.grad += out.grad * out.data

    out._backward = _bw
    return out


def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0.0):
        raise DomainError("log requires strictly positive values")
    out = _result(np.log(x.data), (x,), "log")

    def _bw():
        if x.requires_grad:
            x.grad += out.grad / x.data

    out._backward = _bw
    return out


_ELEMENTWISE = {
    "sigmoid": sigmoid,
    "tanh": tanh,
    "exp": exp,
    "log": log,
    "add": add,
    "mul": mul,
    "scale": scale,
}


def elementwise(op: str, *args) -> Tensor:
    """Dispatch by name over the elementwise operation set."""
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise UsageError(f"unknown elementwise op {op!r}") from None
    return fn(*args)


def concat(parts: list[Tensor], axis: int = 0) -> Tensor:
    if not parts:
        raise UsageError("concat of zero tensors")
    ndim = parts[0].data.ndim
    if axis < 0:
        axis += ndim
    for p in parts[1:]:
        if p.data.ndim != ndim:
            raise ShapeError(f"concat rank mismatch: {parts[0].shape} vs {p.shape}")
        for ax in range(ndim):
            if ax != axis and p.shape[ax] != parts[0].shape[ax]:
                raise ShapeError(
                    f"concat off-axis dimensions disagree: {parts[0].shape} vs {p.shape}")
    out = _result(np.concatenate([p.data for p in parts], axis=axis), parts, "concat")
    sizes = [p.shape[axis] for p in parts]

    def _bw():
        offset = 0
        for p, n in zip(parts, sizes):
            if p.requires_grad:
                index = [slice(None)] * ndim
                index[axis] = slice(offset, offset + n)
                p.grad += out.grad[tuple(index)]
            offset += n

    out._backward = _bw
    return out


def log_sum_exp(x: Tensor, axis: int = 0) -> Tensor:
    """Numerically stable log(sum(exp(x))) along axis.

    -inf entries contribute nothing; an all--inf slice reduces to -inf.
    """
    d = x.data
    if not -d.ndim <= axis < d.ndim:
        raise UsageError(f"log_sum_exp axis {axis} invalid for shape {x.shape}")
    m = np.max(d, axis=axis)
    finite = np.isfinite(m)
    m_safe = np.where(finite, m, 0.0)
    shifted = d - np.expand_dims(m_safe, axis)
    e = np.where(np.isneginf(d), 0.0, np.exp(shifted))
    s = np.sum(e, axis=axis)
    value = np.where(finite, m_safe + np.log(np.where(s > 0.0, s, 1.0)), -np.inf)
    out = _result(value, (x,), "log_sum_exp")

    def _bw():
        if x.requires_grad:
            denom = np.where(s > 0.0, s, 1.0)
            p = e / np.expand_dims(denom, axis)
            x.grad += np.expand_dims(out.grad, axis) * p

    out._backward = _bw
    return out


def lookup(table: Tensor, idx: int) -> Tensor:
    """Select row idx of a 2-D table; backward accumulates into that row only."""
    if table.data.ndim != 2:
        raise ShapeError(f"lookup expects a 2-D table, got {table.shape}")
    idx = int(idx)
    if not 0 <= idx < table.shape[0]:
        raise IndexError(f"lookup id {idx} out of range [0, {table.shape[0]})")
    out = _result(table.data[idx].copy(), (table,), "lookup")

    def _bw():
        if table.requires_grad:
            table.grad[idx] += out.grad

    out._backward = _bw
    return out


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: survivors scaled by 1/(1-p) so inference is identity."""
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    out = _result(x.data * keep, (x,), "dropout")

    def _bw():
        if x.requires_grad:
            x.grad += out.grad * keep

    out._backward = _bw
    return out


# ---------------------------------------------------------------------------
# structural operations used by the encoders and the CRF


def reshape(x: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    out = _result(x.data.reshape(shape), (x,), "reshape")

    def _bw():
        if x.requires_grad:
            x.grad += out.grad.reshape(x.shape)

    out._backward = _bw
    return out


def broadcast_to(x: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    try:
        data = np.broadcast_to(x.data, shape)
    except ValueError:
        raise ShapeError(f"cannot broadcast {x.shape} to {shape}") from None
    out = _result(data.copy(), (x,), "broadcast")
    extra = len(shape) - x.data.ndim
    summed_axes = tuple(range(extra)) + tuple(
        extra + i for i, n in enumerate(x.shape) if n == 1 and shape[extra + i] != 1)

    def _bw():
        if x.requires_grad:
            g = out.grad.sum(axis=summed_axes) if summed_axes else out.grad
            x.grad += g.reshape(x.shape)

    out._backward = _bw
    return out


def transpose(x: Tensor) -> Tensor:
    if x.data.ndim != 2:
        raise ShapeError(f"transpose expects a 2-D tensor, got {x.shape}")
    out = _result(x.data.T.copy(), (x,), "transpose")

    def _bw():
        if x.requires_grad:
            x.grad += out.grad.T

    out._backward = _bw
    return out


def tensor_sum(x: Tensor, axis: int | None = None) -> Tensor:
    out = _result(np.sum(x.data, axis=axis), (x,), "sum")

    def _bw():
        if x.requires_grad:
            if axis is None:
                x.grad += out.grad
            else:
                x.grad += np.expand_dims(out.grad, axis)

    out._backward = _bw
    return out


def stack(rows: list[Tensor]) -> Tensor:
    """Stack 1-D tensors of equal length into a matrix, one per row."""
    return concat([reshape(r, (1, r.size)) for r in rows], axis=0)


def dot(a: Tensor, b: Tensor) -> Tensor:
    """Inner product of two 1-D tensors."""
    return tensor_sum(mul(a, b))
