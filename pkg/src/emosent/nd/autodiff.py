"""Dense float64 tensors and a record/replay tape for reverse-mode gradients.

Everything here is deliberately small: 1-D and 2-D arrays, the handful of
primitives the sequence model needs, and a tape that records ops in execution
order (which is already a topological order) and replays them backwards.
"""
from __future__ import annotations

import itertools
from contextlib import contextmanager
from typing import Callable, NamedTuple, Sequence

import numpy as np


class ShapeError(ValueError):
    """Operand shapes do not fit an operation's contract."""


_node_counter = itertools.count()


class Tensor:
    """A C-contiguous float64 array plus autodiff bookkeeping.

    Treat instances as immutable values: ops return fresh tensors and the
    optimizer produces new ones rather than writing in place.
    """

    __slots__ = ("data", "requires_grad", "node_id")

    def __init__(self, data, requires_grad: bool = False):
        # asarray keeps 0-d scalars 0-d; ascontiguousarray would promote them.
        self.data = np.asarray(data, dtype=np.float64, order="C")
        self.requires_grad = requires_grad
        self.node_id = next(_node_counter)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def sum(self) -> "Tensor":
        return sum(self)

    def mean(self) -> "Tensor":
        return mean(self)


def zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape))


class TapeEntry(NamedTuple):
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: Callable[[np.ndarray], tuple]


_tape_stack: list["Tape"] = []

# Test hook: name of the op whose backward rule is deliberately corrupted.
# Used by the gradient-check CLI to prove the checker catches bad rules.
_backward_fault: str | None = None


@contextmanager
def inject_backward_fault(op_name: str):
    """Corrupt one op's backward rule inside the block (test hook only)."""
    global _backward_fault
    _backward_fault = op_name
    try:
        yield
    finally:
        _backward_fault = None


class Tape:
    """Execution-ordered record of differentiable ops.

    Ops register themselves while a tape is active (``with tape:``) and at
    least one input requires gradients. Entry order is the execution order,
    so every entry's inputs precede it and one reverse sweep visits each
    node exactly once.
    """

    def __init__(self):
        self.entries: list[TapeEntry] = []

    def __enter__(self) -> "Tape":
        _tape_stack.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        popped = _tape_stack.pop()
        assert popped is self

    def __len__(self) -> int:
        return len(self.entries)

    def gradients(self, loss: Tensor, wrt: Sequence[Tensor]) -> list[np.ndarray]:
        """Gradients of a scalar loss for each tensor in `wrt`.

        Tensors not reachable from the loss get zero gradients.
        """
        if loss.shape != ():
            raise ValueError(
                f"loss must be a scalar, got shape {loss.shape}"
            )
        grads: dict[int, np.ndarray] = {loss.node_id: np.array(1.0)}
        for entry in reversed(self.entries):
            g_out = grads.get(entry.output.node_id)
            if g_out is None:
                continue
            for tensor, g_in in zip(entry.inputs, entry.backward(g_out)):
                if g_in is None or not tensor.requires_grad:
                    continue
                seen = grads.get(tensor.node_id)
                grads[tensor.node_id] = g_in if seen is None else seen + g_in
        out = []
        for p in wrt:
            g = grads.get(p.node_id)
            out.append(np.zeros_like(p.data) if g is None else np.asarray(g, dtype=np.float64))
        return out


def backward(tape: Tape, loss: Tensor, wrt: Sequence[Tensor]) -> list[np.ndarray]:
    """Replay `tape` backwards from a scalar `loss`. See Tape.gradients."""
    return tape.gradients(loss, wrt)


def _record(out: Tensor, inputs: tuple[Tensor, ...], backward_fn) -> Tensor:
    if _tape_stack and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        _tape_stack[-1].entries.append(TapeEntry(inputs, out, backward_fn))
    return out


def _require_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes differ, {a.shape} vs {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("add", a, b)
    out = Tensor(a.data + b.data)

    def bwd(g):
        return g, g

    return _record(out, (a, b), bwd)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("sub", a, b)
    out = Tensor(a.data - b.data)

    def bwd(g):
        return g, -g

    return _record(out, (a, b), bwd)


def neg(a: Tensor) -> Tensor:
    out = Tensor(-a.data)

    def bwd(g):
        return (-g,)

    return _record(out, (a,), bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product of same-shaped tensors."""
    _require_same_shape("mul", a, b)
    out = Tensor(a.data * b.data)

    def bwd(g):
        return g * b.data, g * a.data

    return _record(out, (a, b), bwd)


def scale(a: Tensor, c: float) -> Tensor:
    """Multiply by a plain (non-differentiated) scalar."""
    c = float(c)
    out = Tensor(a.data * c)

    def bwd(g):
        return (g * c,)

    return _record(out, (a,), bwd)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix/vector product with numpy dot rules for 1-D and 2-D operands."""
    if a.data.ndim not in (1, 2) or b.data.ndim not in (1, 2):
        raise ShapeError(f"matmul: only 1-D/2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data
    out = Tensor(np.dot(ad, bd))

    def bwd(g):
        if ad.ndim == 2 and bd.ndim == 2:
            return g @ bd.T, ad.T @ g
        if ad.ndim == 1 and bd.ndim == 2:
            return bd @ g, np.outer(ad, g)
        if ad.ndim == 2 and bd.ndim == 1:
            return np.outer(g, bd), ad.T @ g
        return g * bd, g * ad

    return _record(out, (a, b), bwd)


def add_rowvec(m: Tensor, v: Tensor) -> Tensor:
    """Add a vector to every row of a matrix."""
    if m.data.ndim != 2 or v.data.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ShapeError(f"add_rowvec: incompatible shapes {m.shape} and {v.shape}")
    out = Tensor(m.data + v.data)

    def bwd(g):
        return g, g.sum(axis=0)

    return _record(out, (m, v), bwd)


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    out = Tensor(y)

    def bwd(g):
        ga = g * (1.0 - y * y)
        if _backward_fault == "tanh":
            ga = ga * 1.01
        return (ga,)

    return _record(out, (a,), bwd)


def sigmoid_values(x) -> np.ndarray:
    """Plain-array logistic function, split on sign so exp never overflows."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


_sigmoid = sigmoid_values


def sigmoid(a: Tensor) -> Tensor:
    y = _sigmoid(a.data)
    out = Tensor(y)

    def bwd(g):
        return (g * y * (1.0 - y),)

    return _record(out, (a,), bwd)


def relu(a: Tensor) -> Tensor:
    out = Tensor(np.maximum(a.data, 0.0))

    def bwd(g):
        return (g * (a.data > 0.0),)

    return _record(out, (a,), bwd)


def softmax(scores: Tensor) -> Tensor:
    """Normalized exponentials of a vector, max-subtracted for overflow safety."""
    if scores.data.ndim != 1 or scores.size == 0:
        raise ShapeError(f"softmax: need a non-empty vector, got shape {scores.shape}")
    shifted = scores.data - scores.data.max()
    e = np.exp(shifted)
    y = e / e.sum()
    out = Tensor(y)

    def bwd(g):
        return (y * (g - np.dot(g, y)),)

    return _record(out, (scores,), bwd)


def sigmoid_xent(logits: Tensor, targets: Tensor) -> Tensor:
    """Mean binary cross-entropy of sigmoid(logits) against 0/1 targets.

    Uses the fused log-sum-exp form, so saturated logits stay finite.
    """
    _require_same_shape("sigmoid_xent", logits, targets)
    t = targets.data
    if not np.all((t == 0.0) | (t == 1.0)):
        raise ValueError("sigmoid_xent: targets must be 0 or 1")
    z = logits.data
    per_unit = np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))
    n = z.size
    out = Tensor(per_unit.sum() / n)

    def bwd(g):
        return g * (_sigmoid(z) - t) / n, None

    return _record(out, (logits, targets), bwd)


def sum(a: Tensor) -> Tensor:
    out = Tensor(a.data.sum())

    def bwd(g):
        return (np.full(a.shape, float(g)),)

    return _record(out, (a,), bwd)


def mean(a: Tensor) -> Tensor:
    out = Tensor(a.data.mean())

    def bwd(g):
        return (np.full(a.shape, float(g) / a.size),)

    return _record(out, (a,), bwd)


def concat(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate 1-D tensors."""
    parts = tuple(parts)
    if not parts or any(p.data.ndim != 1 for p in parts):
        raise ShapeError("concat: need at least one 1-D tensor")
    out = Tensor(np.concatenate([p.data for p in parts]))
    offsets = np.cumsum([0] + [p.size for p in parts])

    def bwd(g):
        return tuple(g[offsets[i]:offsets[i + 1]] for i in range(len(parts)))

    return _record(out, parts, bwd)


def stack(rows: Sequence[Tensor]) -> Tensor:
    """Stack equal-length 1-D tensors into a matrix, one per row."""
    rows = tuple(rows)
    if not rows or any(r.data.ndim != 1 for r in rows):
        raise ShapeError("stack: need at least one 1-D tensor")
    if len({r.shape for r in rows}) != 1:
        raise ShapeError(f"stack: rows differ in length: {[r.shape for r in rows]}")
    out = Tensor(np.stack([r.data for r in rows]))

    def bwd(g):
        return tuple(g[i] for i in range(len(rows)))

    return _record(out, rows, bwd)


def take_rows(m: Tensor, indices: Sequence[int]) -> Tensor:
    """Gather rows of a matrix; duplicate indices accumulate on backward."""
    if m.data.ndim != 2:
        raise ShapeError(f"take_rows: need a matrix, got shape {m.shape}")
    idx = np.asarray(list(indices), dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= m.shape[0]):
        raise IndexError(f"take_rows: index out of range for {m.shape[0]} rows")
    out = Tensor(m.data[idx])

    def bwd(g):
        gm = np.zeros_like(m.data)
        np.add.at(gm, idx, g)
        return (gm,)

    return _record(out, (m,), bwd)


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape))

    def bwd(g):
        return (g.reshape(a.shape),)

    return _record(out, (a,), bwd)


def dropout_mask(shape, rate: float, rng) -> Tensor:
    """Inverted-dropout mask: zeros with probability `rate`, else 1/(1-rate).

    `rng` is a numpy Generator or an integer seed; the same seed always
    yields the same mask. Masks are constants (never recorded on a tape).
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    if rate == 0.0:
        return Tensor(np.ones(shape))
    keep = rng.random(shape) >= rate
    return Tensor(np.where(keep, 1.0 / (1.0 - rate), 0.0))
