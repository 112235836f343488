"""Reverse-mode automatic differentiation over dense numpy arrays.

A :class:`Tape` records every operation applied to tracked tensors. Calling
:meth:`Tape.backward` on a scalar walks the records in reverse order and
accumulates vector-Jacobian products into a :class:`Gradients` map.

Subgradient conventions at kinks are fixed: relu'(0) = 0, clamp_max has zero
gradient at (and above) its bound, |x|'(0) = 0, and min/max reductions route
the gradient to the lowest index on ties.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "Gradients",
    "ShapeError",
    "Tape",
    "Tensor",
    "as_tensor",
    "matmul",
    "elementwise",
    "reduce",
    "softmax",
]


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class DomainError(ValueError):
    """An operand lies outside the mathematical domain of an operation."""


VJP = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class _Node:
    __slots__ = ("parents", "vjp")

    def __init__(self, parents: tuple[int, ...], vjp: VJP | None):
        self.parents = parents
        self.vjp = vjp


class Tape:
    """Append-only record of differentiable operations."""

    def __init__(self) -> None:
        self._nodes: list[_Node] = []

    def __len__(self) -> int:
        return len(self._nodes)

    def variable(self, value, name: str | None = None) -> "Tensor":
        """Register a leaf tensor whose gradient should be tracked."""
        arr = np.array(value, dtype=np.float64)
        self._nodes.append(_Node((), None))
        return Tensor(arr, self, len(self._nodes) - 1, name=name)

    def _record(self, value: np.ndarray, parents: Sequence["Tensor"], vjp: VJP) -> "Tensor":
        ids = tuple(p.node if p.tape is self else -1 for p in parents)
        self._nodes.append(_Node(ids, vjp))
        return Tensor(value, self, len(self._nodes) - 1)

    def backward(self, root: "Tensor") -> "Gradients":
        """Accumulate d(root)/d(node) for every node recorded before ``root``."""
        if root.value.size != 1:
            raise ShapeError(f"backward needs a scalar root, got shape {root.shape}")
        if root.tape is not self:
            # a constant (untracked) root depends on nothing on this tape
            return Gradients({}, self)
        grads: dict[int, np.ndarray] = {root.node: np.ones_like(root.value)}
        for idx in range(root.node, -1, -1):
            g = grads.get(idx)
            node = self._nodes[idx]
            if g is None or node.vjp is None:
                continue
            for pid, pg in zip(node.parents, node.vjp(g)):
                if pid < 0 or pg is None:
                    continue
                if pid in grads:
                    grads[pid] = grads[pid] + pg
                else:
                    grads[pid] = pg
        return Gradients(grads, self)


class Gradients:
    """Gradient map returned by :meth:`Tape.backward`.

    Indexing with a tensor yields an array of the tensor's shape; tensors that
    are not ancestors of the root get zeros.
    """

    def __init__(self, by_node: dict[int, np.ndarray], tape: "Tape | None" = None):
        self._by_node = by_node
        self._tape = tape

    def __getitem__(self, t: "Tensor") -> np.ndarray:
        if t.node is None or t.tape is not self._tape:
            return np.zeros_like(t.value)
        g = self._by_node.get(t.node)
        if g is None:
            return np.zeros_like(t.value)
        return np.asarray(g, dtype=np.float64).reshape(t.value.shape)

    def __contains__(self, t: "Tensor") -> bool:
        return t.node is not None and t.tape is self._tape and t.node in self._by_node


def as_tensor(x) -> "Tensor":
    if isinstance(x, Tensor):
        return x
    return Tensor(np.array(x, dtype=np.float64))


def _tape_of(*ts: "Tensor") -> Tape | None:
    tape = None
    for t in ts:
        if t.tape is None:
            continue
        if tape is None:
            tape = t.tape
        elif t.tape is not tape:
            raise ValueError("operands are recorded on different tapes")
    return tape


def _make(value: np.ndarray, parents: Sequence["Tensor"], vjp: VJP) -> "Tensor":
    tape = _tape_of(*parents)
    if tape is None:
        return Tensor(value)
    return tape._record(value, parents, vjp)


def _check_binary(a: "Tensor", b: "Tensor") -> None:
    if a.shape == b.shape or a.value.ndim == 0 or b.value.ndim == 0:
        return
    raise ShapeError(f"shapes {a.shape} and {b.shape} are not compatible (same shape or scalar)")


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    return np.asarray(g.sum()).reshape(shape)


class Tensor:
    """Dense float64 array, optionally tracked on a :class:`Tape`."""

    __array_priority__ = 1000

    def __init__(self, value, tape: Tape | None = None, node: int | None = None, name: str | None = None):
        self.value = np.asarray(value, dtype=np.float64)
        self.tape = tape
        self.node = node
        self.name = name

    def __repr__(self) -> str:
        tracked = "" if self.tape is None else f", node={self.node}"
        return f"Tensor({self.value!r}{tracked})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def item(self) -> float:
        return float(self.value.reshape(-1)[0]) if self.value.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.value.copy()

    # arithmetic -----------------------------------------------------------

    def __add__(self, other) -> "Tensor":
        b = as_tensor(other)
        _check_binary(self, b)
        sa, sb = self.shape, b.shape
        return _make(self.value + b.value, (self, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))

    __radd__ = __add__

    def __sub__(self, other) -> "Tensor":
        b = as_tensor(other)
        _check_binary(self, b)
        sa, sb = self.shape, b.shape
        return _make(self.value - b.value, (self, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))

    def __rsub__(self, other) -> "Tensor":
        return as_tensor(other) - self

    def __mul__(self, other) -> "Tensor":
        b = as_tensor(other)
        _check_binary(self, b)
        av, bv = self.value, b.value
        return _make(
            av * bv,
            (self, b),
            lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        b = as_tensor(other)
        _check_binary(self, b)
        if np.any(b.value == 0):
            raise DomainError("division by zero")
        av, bv = self.value, b.value
        return _make(
            av / bv,
            (self, b),
            lambda g: (_unbroadcast(g / bv, av.shape), _unbroadcast(-g * av / (bv * bv), bv.shape)),
        )

    def __rtruediv__(self, other) -> "Tensor":
        return as_tensor(other) / self

    def __neg__(self) -> "Tensor":
        return _make(-self.value, (self,), lambda g: (-g,))

    def __matmul__(self, other) -> "Tensor":
        return matmul(self, other)

    def __getitem__(self, idx) -> "Tensor":
        shape = self.shape
        out = self.value[idx]

        def vjp(g):
            full = np.zeros(shape)
            np.add.at(full, idx, g)
            return (full,)

        return _make(np.array(out, dtype=np.float64), (self,), vjp)

    # elementwise ----------------------------------------------------------

    def relu(self) -> "Tensor":
        mask = (self.value > 0).astype(np.float64)
        return _make(self.value * mask, (self,), lambda g: (g * mask,))

    def sigmoid(self) -> "Tensor":
        x = self.value
        # split by sign so exp never overflows
        out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        return _make(out, (self,), lambda g: (g * out * (1.0 - out),))

    def tanh(self) -> "Tensor":
        out = np.tanh(self.value)
        return _make(out, (self,), lambda g: (g * (1.0 - out * out),))

    def exp(self) -> "Tensor":
        out = np.exp(self.value)
        return _make(out, (self,), lambda g: (g * out,))

    def log(self) -> "Tensor":
        x = self.value
        if np.any(x <= 0):
            raise DomainError("log of non-positive value")
        return _make(np.log(x), (self,), lambda g: (g / x,))

    def abs(self) -> "Tensor":
        sign = np.sign(self.value)
        return _make(np.abs(self.value), (self,), lambda g: (g * sign,))

    def clamp_max(self, bound: float) -> "Tensor":
        mask = (self.value < bound).astype(np.float64)
        return _make(np.minimum(self.value, bound), (self,), lambda g: (g * mask,))

    # reductions -----------------------------------------------------------

    def _axis(self, axis: int | None) -> int | None:
        if axis is None:
            if self.value.size == 0:
                raise ShapeError("reduction over an empty tensor")
            return None
        nd = self.value.ndim
        if not -nd <= axis < nd:
            raise ShapeError(f"axis {axis} out of range for shape {self.shape}")
        axis %= nd
        if self.shape[axis] == 0:
            raise ShapeError("reduction over an empty axis")
        return axis

    def sum(self, axis: int | None = None) -> "Tensor":
        ax = self._axis(axis)
        shape = self.shape

        def vjp(g):
            if ax is None:
                return (np.broadcast_to(g, shape).copy(),)
            return (np.broadcast_to(np.expand_dims(g, ax), shape).copy(),)

        return _make(np.asarray(self.value.sum(axis=ax)), (self,), vjp)

    def mean(self, axis: int | None = None) -> "Tensor":
        ax = self._axis(axis)
        n = self.value.size if ax is None else self.shape[ax]
        return self.sum(axis) * (1.0 / n)

    def _select(self, axis: int | None, pick) -> "Tensor":
        ax = self._axis(axis)
        shape = self.shape
        if ax is None:
            flat = int(pick(self.value.reshape(-1)))
            out = self.value.reshape(-1)[flat]

            def vjp(g):
                full = np.zeros(self.value.size)
                full[flat] = g
                return (full.reshape(shape),)

            return _make(np.asarray(out), (self,), vjp)
        idx = np.expand_dims(pick(self.value, axis=ax), ax)
        out = np.take_along_axis(self.value, idx, axis=ax).squeeze(ax)

        def vjp(g):
            full = np.zeros(shape)
            np.put_along_axis(full, idx, np.expand_dims(g, ax), axis=ax)
            return (full,)

        return _make(out, (self,), vjp)

    def min(self, axis: int | None = None) -> "Tensor":
        """Minimum; the gradient goes to the first minimal element."""
        return self._select(axis, np.argmin)

    def max(self, axis: int | None = None) -> "Tensor":
        """Maximum; the gradient goes to the first maximal element."""
        return self._select(axis, np.argmax)

    # shape ----------------------------------------------------------------

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape
        return _make(self.value.reshape(shape), (self,), lambda g: (g.reshape(old),))

    def broadcast_to(self, shape: tuple[int, ...]) -> "Tensor":
        """Explicit numpy-style broadcast; the gradient sums over expanded axes."""
        old = self.shape
        try:
            out = np.broadcast_to(self.value, shape).copy()
        except ValueError as exc:
            raise ShapeError(str(exc)) from None
        lead = len(shape) - len(old)

        def vjp(g):
            g = g.sum(axis=tuple(range(lead))) if lead else g
            axes = tuple(i for i, n in enumerate(old) if n == 1 and g.shape[i] != 1)
            if axes:
                g = g.sum(axis=axes, keepdims=True)
            return (g.reshape(old),)

        return _make(out, (self,), vjp)

    @property
    def T(self) -> "Tensor":
        if self.value.ndim != 2:
            raise ShapeError("transpose needs a 2-D tensor")
        return _make(self.value.T.copy(), (self,), lambda g: (g.T,))


def matmul(a, b) -> Tensor:
    """Matrix product of 2-D (or 2-D by 1-D) tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.value.ndim == 1:
        return matmul(a.reshape(1, -1), b).reshape(-1)
    if b.value.ndim == 1:
        return matmul(a, b.reshape(-1, 1)).reshape(-1)
    if a.value.ndim != 2 or b.value.ndim != 2:
        raise ShapeError("matmul supports 1-D and 2-D operands only")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    av, bv = a.value, b.value
    return _make(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def softmax(a) -> Tensor:
    """Max-shifted softmax of a vector."""
    a = as_tensor(a)
    if a.value.ndim != 1:
        raise ShapeError("softmax expects a vector")
    z = a.value - a.value.max()
    e = np.exp(z)
    out = e / e.sum()

    def vjp(g):
        return (out * (g - np.dot(g, out)),)

    return _make(out, (a,), vjp)


# method names, looked up on each call so patched methods are honoured
_UNARY = {
    "relu": "relu",
    "sigmoid": "sigmoid",
    "tanh": "tanh",
    "log": "log",
    "exp": "exp",
    "abs": "abs",
    "neg": "__neg__",
}
_BINARY = {
    "add": "__add__",
    "sub": "__sub__",
    "mul": "__mul__",
    "div": "__truediv__",
}


def elementwise(kind: str, a, b=None) -> Tensor:
    """Apply a named elementwise primitive.

    ``clamp_max`` takes its bound as ``b`` (a plain number).
    """
    a = as_tensor(a)
    if kind in _UNARY:
        if b is not None:
            raise TypeError(f"{kind} is unary")
        return getattr(a, _UNARY[kind])()
    if kind == "clamp_max":
        return a.clamp_max(float(b))
    if kind in _BINARY:
        if b is None:
            raise TypeError(f"{kind} needs two operands")
        return getattr(a, _BINARY[kind])(b)
    raise ValueError(f"unknown elementwise op {kind!r}")


def reduce(kind: str, a, axis: int | None = None) -> Tensor:
    a = as_tensor(a)
    if kind not in ("sum", "mean", "min", "max"):
        raise ValueError(f"unknown reduction {kind!r}")
    return getattr(a, kind)(axis)
