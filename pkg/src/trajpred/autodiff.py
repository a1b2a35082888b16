"""Minimal reverse-mode autodiff on dense float64 numpy arrays.

Every op checks shapes at the boundary and records a backward closure.
Gradients accumulate additively across fan-out; the training loop is
responsible for zeroing them. Reductions run in plain index order so a
fixed seed gives bit-identical runs.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Tensor", "Parameter", "ShapeError", "concat", "finite_difference_gradient"]


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad back down to `shape` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for i, dim in enumerate(shape):
        if dim == 1 and grad.shape[i] != 1:
            grad = grad.sum(axis=i, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """Dense float64 tensor participating in a dynamic computation graph."""

    __slots__ = ("data", "requires_grad", "grad", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        # list of (parent Tensor, fn mapping upstream grad -> parent grad)
        self._parents: list = []

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # ---- graph construction -------------------------------------------------

    @staticmethod
    def _result(data: np.ndarray, parents) -> "Tensor":
        tracked = [(p, fn) for p, fn in parents if p.requires_grad]
        out = Tensor(data, requires_grad=bool(tracked))
        out._parents = tracked
        return out

    def backward(self) -> None:
        """Populate .grad on every reachable tensor with requires_grad.

        The root must be scalar (shape () or a single element).
        """
        if self.data.size != 1:
            raise ValueError(
                f"backward() requires a scalar loss, got shape {self.shape}"
            )
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent, _ in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            g = node.grad
            if g is None:
                continue
            for parent, fn in node._parents:
                pg = fn(g)
                if parent.grad is None:
                    parent.grad = pg.astype(np.float64, copy=True)
                else:
                    parent.grad = parent.grad + pg

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> np.ndarray:
        return self.data

    # ---- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(other)

    def __add__(self, other):
        other = self._coerce(other)
        data = self.data + other.data
        return Tensor._result(data, [
            (self, lambda g: _unbroadcast(g, self.shape)),
            (other, lambda g: _unbroadcast(g, other.shape)),
        ])

    __radd__ = __add__

    def __neg__(self):
        return Tensor._result(-self.data, [(self, lambda g: -g)])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        data = self.data * other.data
        return Tensor._result(data, [
            (self, lambda g: _unbroadcast(g * other.data, self.shape)),
            (other, lambda g: _unbroadcast(g * self.data, other.shape)),
        ])

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        data = self.data / other.data
        return Tensor._result(data, [
            (self, lambda g: _unbroadcast(g / other.data, self.shape)),
            (other, lambda g: _unbroadcast(-g * self.data / other.data**2, other.shape)),
        ])

    def __pow__(self, exponent: float):
        data = self.data ** exponent
        return Tensor._result(data, [
            (self, lambda g: g * exponent * self.data ** (exponent - 1)),
        ])

    def matmul(self, other: "Tensor") -> "Tensor":
        other = self._coerce(other)
        a, b = self.data, other.data
        if a.ndim < 1 or b.ndim < 1:
            raise ShapeError(f"matmul needs >=1-d operands, got {a.shape} and {b.shape}")
        if a.shape[-1] != b.shape[-2 if b.ndim > 1 else -1]:
            raise ShapeError(
                f"matmul inner dimensions disagree: {a.shape} vs {b.shape}"
            )
        data = a @ b

        def grad_a(g):
            ga = g @ np.swapaxes(b, -1, -2) if b.ndim > 1 else np.expand_dims(g, -1) * b
            return _unbroadcast(ga, a.shape)

        def grad_b(g):
            gb = np.swapaxes(a, -1, -2) @ g if a.ndim > 1 else np.expand_dims(a, -1) * g
            return _unbroadcast(gb, b.shape)

        return Tensor._result(data, [(self, grad_a), (other, grad_b)])

    __matmul__ = matmul

    # ---- shape ops ----------------------------------------------------------

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape
        data = self.data.reshape(shape)
        return Tensor._result(data, [(self, lambda g: g.reshape(old))])

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        inverse = np.argsort(axes)
        data = self.data.transpose(axes)
        return Tensor._result(data, [(self, lambda g: g.transpose(inverse))])

    def broadcast_to(self, shape) -> "Tensor":
        old = self.shape
        data = np.broadcast_to(self.data, shape)
        return Tensor._result(data, [(self, lambda g: _unbroadcast(g, old))])

    def __getitem__(self, idx) -> "Tensor":
        data = self.data[idx]

        def grad_fn(g):
            out = np.zeros_like(self.data)
            np.add.at(out, idx, g)
            return out

        return Tensor._result(data, [(self, grad_fn)])

    def gather(self, axis: int, index: np.ndarray) -> "Tensor":
        """take_along_axis with a constant integer index array."""
        index = np.asarray(index)
        data = np.take_along_axis(self.data, index, axis=axis)

        def grad_fn(g):
            out = np.zeros_like(self.data)
            np.put_along_axis(out, index, g, axis=axis)
            return out

        return Tensor._result(data, [(self, grad_fn)])

    # ---- reductions ---------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        data = self.data.sum(axis=axis, keepdims=keepdims)
        shape = self.shape

        def grad_fn(g):
            if axis is None:
                return np.full(shape, g if np.ndim(g) == 0 else g.item())
            g2 = g if keepdims else np.expand_dims(g, axis)
            return np.broadcast_to(g2, shape).copy()

        return Tensor._result(data, [(self, grad_fn)])

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        n = self.data.size if axis is None else (
            np.prod([self.shape[a] for a in (axis if isinstance(axis, tuple) else (axis,))])
        )
        return self.sum(axis=axis, keepdims=keepdims) / float(n)

    def cumsum(self, axis: int) -> "Tensor":
        data = np.cumsum(self.data, axis=axis)

        def grad_fn(g):
            return np.flip(np.cumsum(np.flip(g, axis=axis), axis=axis), axis=axis)

        return Tensor._result(data, [(self, grad_fn)])

    # ---- elementwise nonlinearities -----------------------------------------

    def exp(self) -> "Tensor":
        data = np.exp(self.data)
        return Tensor._result(data, [(self, lambda g: g * data)])

    def sqrt(self) -> "Tensor":
        data = np.sqrt(self.data)
        return Tensor._result(data, [(self, lambda g: g * 0.5 / data)])

    def sigmoid(self) -> "Tensor":
        # split on sign for stability at large |x|
        x = self.data
        data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                        np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        # keep the open-interval contract where float64 would saturate
        data = np.clip(data, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
        return Tensor._result(data, [(self, lambda g: g * data * (1.0 - data))])

    def gelu(self) -> "Tensor":
        # exact gaussian CDF form
        x = self.data
        cdf = 0.5 * (1.0 + _erf(x / math.sqrt(2.0)))
        data = x * cdf
        pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        return Tensor._result(data, [(self, lambda g: g * (cdf + x * pdf))])

    def softmax(self, axis: int) -> "Tensor":
        x = self.data
        if not np.all(np.isfinite(x)):
            raise FloatingPointError("softmax input contains non-finite values")
        shifted = x - x.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        data = e / e.sum(axis=axis, keepdims=True)

        def grad_fn(g):
            dot = (g * data).sum(axis=axis, keepdims=True)
            return data * (g - dot)

        return Tensor._result(data, [(self, grad_fn)])

    def masked_fill(self, mask: np.ndarray, value: float) -> "Tensor":
        """Replace entries where mask is False by `value`; grad flows only
        through kept entries."""
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), self.shape)
        data = np.where(mask, self.data, value)
        return Tensor._result(data, [(self, lambda g: np.where(mask, g, 0.0))])

    def l2norm_lastaxis(self) -> "Tensor":
        """Euclidean norm over the last axis; subgradient 0 at the origin."""
        data = np.sqrt((self.data ** 2).sum(axis=-1))

        def grad_fn(g):
            denom = np.where(data > 0.0, data, 1.0)
            return np.expand_dims(g / denom, -1) * self.data * np.expand_dims(
                (data > 0.0).astype(np.float64), -1
            )

        return Tensor._result(data, [(self, grad_fn)])


def _erf(x: np.ndarray) -> np.ndarray:
    from scipy.special import erf

    return erf(x)


def concat(tensors: list[Tensor], axis: int) -> Tensor:
    """Concatenate along `axis`; grads slice back to each input."""
    datas = [t.data for t in tensors]
    out = np.concatenate(datas, axis=axis)
    offsets = np.cumsum([0] + [d.shape[axis] for d in datas])
    parents = []
    for i, t in enumerate(tensors):
        lo, hi = offsets[i], offsets[i + 1]

        def grad_fn(g, lo=lo, hi=hi):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            return g[tuple(sl)]

        parents.append((t, grad_fn))
    return Tensor._result(out, parents)


class Parameter:
    """Named trainable tensor. Names are unique within a model."""

    def __init__(self, name: str, data: np.ndarray):
        self.name = name
        self.tensor = Tensor(np.asarray(data, dtype=np.float64), requires_grad=True)

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @data.setter
    def data(self, value: np.ndarray):
        self.tensor.data = np.asarray(value, dtype=np.float64)

    @property
    def grad(self):
        return self.tensor.grad

    def zero_grad(self):
        self.tensor.grad = None

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.tensor.shape})"


def finite_difference_gradient(f, param: Parameter, epsilon: float = 1e-6) -> np.ndarray:
    """Central-difference gradient oracle: (f(p+e) - f(p-e)) / 2e per coordinate.

    Unreliable at kinks of non-smooth f (e.g. |x| at 0); callers probing a
    min/abs should steer clear of ties.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    base = param.data.copy()
    grad = np.zeros_like(base)
    flat = param.data.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + epsilon
        fp = float(f())
        flat[i] = orig - epsilon
        fm = float(f())
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * epsilon)
    param.data = base
    return grad
