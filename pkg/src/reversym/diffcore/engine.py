"""Reverse-mode autodiff over dense float64 tensors.

Define-by-run: each forward op records a backward rule on the active tape,
and the tape is rebuilt every forward pass.  Dense tensors only; graph
sparsity goes through ``segment_sum`` over edge lists.  The only implicit
broadcast is scalar-times-tensor (``scalar_mul``); everything else demands
exact shape agreement and raises ``ShapeError`` otherwise.

Aggregations that must commute with relabeling of graph nodes use
``segment_sum(..., value_sorted=True)``, which sums each segment in
ascending value order per column.  Reordering rows within a segment then
cannot change the result bit for bit, which is what the exact
permutation-equivariance guarantee of the encoder rests on.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

_F64 = np.float64


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible for an op."""


class TensorNode:
    """A dense float64 tensor participating in taped computation.

    ``values`` exposes the flat storage; ``grad`` is populated (flat, same
    length) by :func:`backward` for nodes with ``requires_grad``.
    """

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str = ""):
        arr = np.ascontiguousarray(data, dtype=_F64)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def values(self) -> np.ndarray:
        return self.data.reshape(-1)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, shape is {self.shape}")
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        tag = self.name or "tensor"
        return f"TensorNode({tag}, shape={self.shape}, requires_grad={self.requires_grad})"


def parameter(data, name: str = "") -> TensorNode:
    return TensorNode(data, requires_grad=True, name=name)


def constant(data, name: str = "") -> TensorNode:
    return TensorNode(data, requires_grad=False, name=name)


class _Record:
    """One taped operation: output, differentiable inputs, backward rule."""

    __slots__ = ("output", "inputs", "push")

    def __init__(self, output: TensorNode, inputs: tuple[TensorNode, ...],
                 push: Callable[[np.ndarray, Callable], None]):
        self.output = output
        self.inputs = inputs
        self.push = push


class Tape:
    """Ordered record of operations; inputs always precede their outputs."""

    def __init__(self):
        self.records: list[_Record] = []

    def __len__(self) -> int:
        return len(self.records)

    def clear(self) -> None:
        self.records.clear()

    def __enter__(self) -> "Tape":
        _ACTIVE.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE.pop()


_ACTIVE: list[Tape] = []


def _active_tape() -> Tape | None:
    return _ACTIVE[-1] if _ACTIVE else None


def _record(out: TensorNode, inputs: Sequence[TensorNode], push) -> TensorNode:
    tape = _active_tape()
    if tape is not None and any(x.requires_grad for x in inputs):
        out.requires_grad = True
        tape.records.append(_Record(out, tuple(inputs), push))
    return out


def _need_same_shape(kind: str, a: TensorNode, b: TensorNode) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{kind}: operand shapes {a.shape} and {b.shape} differ")


# ---------------------------------------------------------------------------
# primitive ops
# ---------------------------------------------------------------------------

def add(a: TensorNode, b: TensorNode) -> TensorNode:
    _need_same_shape("add", a, b)
    out = TensorNode(a.data + b.data)

    def push(g, acc):
        acc(a, g)
        acc(b, g)

    return _record(out, (a, b), push)


def sub(a: TensorNode, b: TensorNode) -> TensorNode:
    _need_same_shape("sub", a, b)
    out = TensorNode(a.data - b.data)

    def push(g, acc):
        acc(a, g)
        acc(b, -g)

    return _record(out, (a, b), push)


def mul(a: TensorNode, b: TensorNode) -> TensorNode:
    """Elementwise product; shapes must match exactly (no broadcasting)."""
    _need_same_shape("mul", a, b)
    ad, bd = a.data, b.data
    out = TensorNode(ad * bd)

    def push(g, acc):
        acc(a, g * bd)
        acc(b, g * ad)

    return _record(out, (a, b), push)


def scalar_mul(c: float, a: TensorNode) -> TensorNode:
    """Python-scalar times tensor; the one permitted broadcast."""
    c = float(c)
    out = TensorNode(a.data * c)

    def push(g, acc):
        acc(a, g * c)

    return _record(out, (a,), push)


def matmul(a: TensorNode, b: TensorNode) -> TensorNode:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul: needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dims disagree, {a.shape} vs {b.shape}")
    ad, bd = a.data, b.data
    out = TensorNode(ad @ bd)

    def push(g, acc):
        acc(a, g @ bd.T)
        acc(b, ad.T @ g)

    return _record(out, (a, b), push)


def concat(parts: Sequence[TensorNode], axis: int = -1) -> TensorNode:
    parts = list(parts)
    if not parts:
        raise ShapeError("concat: needs at least one operand")
    nd = parts[0].data.ndim
    ax = axis % nd
    base = list(parts[0].shape)
    for p in parts[1:]:
        other = list(p.shape)
        if p.data.ndim != nd or other[:ax] + other[ax + 1:] != base[:ax] + base[ax + 1:]:
            raise ShapeError(
                f"concat: shapes {[q.shape for q in parts]} incompatible on axis {axis}")
    out = TensorNode(np.concatenate([p.data for p in parts], axis=ax))
    sizes = [p.shape[ax] for p in parts]
    bounds = np.cumsum([0] + sizes)

    def push(g, acc):
        for p, lo, hi in zip(parts, bounds[:-1], bounds[1:]):
            sl = [slice(None)] * nd
            sl[ax] = slice(lo, hi)
            acc(p, g[tuple(sl)])

    return _record(out, tuple(parts), push)


def _unary(a: TensorNode, fwd, dfwd) -> TensorNode:
    y = fwd(a.data)
    out = TensorNode(y)

    def push(g, acc):
        acc(a, g * dfwd(a.data, y))

    return _record(out, (a,), push)


def tanh(a: TensorNode) -> TensorNode:
    return _unary(a, np.tanh, lambda x, y: 1.0 - y * y)


def relu(a: TensorNode) -> TensorNode:
    return _unary(a, lambda x: np.maximum(x, 0.0), lambda x, y: (x > 0.0).astype(_F64))


def sigmoid(a: TensorNode) -> TensorNode:
    return _unary(a, lambda x: 1.0 / (1.0 + np.exp(-x)), lambda x, y: y * (1.0 - y))


def exp(a: TensorNode) -> TensorNode:
    return _unary(a, np.exp, lambda x, y: y)


def tensor_sum(a: TensorNode, axis: int | None = None, keepdims: bool = False) -> TensorNode:
    out = TensorNode(a.data.sum(axis=axis, keepdims=keepdims))
    shape = a.shape

    def push(g, acc):
        if axis is None:
            acc(a, np.full(shape, np.asarray(g).reshape(-1)[0]))
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            acc(a, np.broadcast_to(gg, shape).copy())

    return _record(out, (a,), push)


def mean(a: TensorNode, axis: int | None = None, keepdims: bool = False) -> TensorNode:
    n = a.size if axis is None else a.shape[axis]
    if n == 0:
        raise ShapeError("mean: empty reduction axis")
    return scalar_mul(1.0 / n, tensor_sum(a, axis=axis, keepdims=keepdims))


def softmax(a: TensorNode, axis: int = -1) -> TensorNode:
    x = a.data
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    out = TensorNode(y)

    def push(g, acc):
        dot = (g * y).sum(axis=axis, keepdims=True)
        acc(a, y * (g - dot))

    return _record(out, (a,), push)


def gather(a: TensorNode, index: np.ndarray) -> TensorNode:
    """Select rows of a 2-D tensor; dual of segment_sum."""
    if a.data.ndim != 2:
        raise ShapeError(f"gather: needs a 2-D tensor, got {a.shape}")
    idx = np.asarray(index, dtype=np.intp)
    out = TensorNode(a.data[idx])
    n_rows = a.shape[0]

    def push(g, acc):
        acc(a, _scatter_rows(g, idx, n_rows))

    return _record(out, (a,), push)


# scatter plans keyed by index-array identity; the stored reference keeps the
# array alive, so the id cannot be recycled while the entry exists
_SCATTER_PLANS: dict[int, tuple] = {}

# below this many rows, bucket sums run as a one-hot matmul (BLAS); above it,
# as a per-bucket reduction over sorted rows
_ONEHOT_LIMIT = 8192


def _scatter_plan(seg: np.ndarray, n: int):
    key = id(seg)
    plan = _SCATTER_PLANS.get(key)
    if plan is not None and plan[0] is seg and plan[1] == n:
        return plan
    if len(seg) <= _ONEHOT_LIMIT:
        onehot = np.zeros((n, len(seg)), dtype=_F64)
        onehot[seg, np.arange(len(seg))] = 1.0
        plan = (seg, n, "onehot", onehot)
    else:
        if np.all(np.diff(seg) >= 0):
            order = None
            seg_sorted = seg
        else:
            order = np.argsort(seg, kind="stable")
            seg_sorted = seg[order]
        uniq, first = np.unique(seg_sorted, return_index=True)
        plan = (seg, n, "reduceat", (order, uniq, first))
    if len(_SCATTER_PLANS) > 4096:
        _SCATTER_PLANS.clear()
    _SCATTER_PLANS[key] = plan
    return plan


def _scatter_rows(values: np.ndarray, seg: np.ndarray, n: int) -> np.ndarray:
    """Sum `values` rows into `n` buckets given (possibly unsorted) ids."""
    plan = _scatter_plan(seg, n)
    if plan[2] == "onehot":
        return plan[3] @ values
    order, uniq, first = plan[3]
    out = np.zeros((n, values.shape[1]), dtype=_F64)
    if len(uniq):
        src = values if order is None else values[order]
        out[uniq] = np.add.reduceat(src, first, axis=0)
    return out


def gather_add(a: TensorNode, index_a: np.ndarray, b: TensorNode,
               index_b: np.ndarray) -> TensorNode:
    """a[index_a] + b[index_b] in one pass (fused gather-gather-add)."""
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ShapeError(f"gather_add: needs 2-D tensors with equal width, "
                         f"got {a.shape} and {b.shape}")
    ia = np.asarray(index_a, dtype=np.intp)
    ib = np.asarray(index_b, dtype=np.intp)
    if ia.shape != ib.shape:
        raise ShapeError(f"gather_add: index shapes {ia.shape} != {ib.shape}")
    out = TensorNode(a.data[ia] + b.data[ib])
    na, nb = a.shape[0], b.shape[0]

    def push(g, acc):
        acc(a, _scatter_rows(g, ia, na))
        acc(b, _scatter_rows(g, ib, nb))

    return _record(out, (a, b), push)


def rowdot(a: TensorNode, b: TensorNode) -> TensorNode:
    """Row-wise dot product of two equal-shape 2-D tensors -> (n, 1)."""
    _need_same_shape("rowdot", a, b)
    if a.data.ndim != 2:
        raise ShapeError(f"rowdot: needs 2-D tensors, got {a.shape}")
    ad, bd = a.data, b.data
    out = TensorNode(np.einsum("ij,ij->i", ad, bd)[:, None])

    def push(g, acc):
        acc(a, g * bd)
        acc(b, g * ad)

    return _record(out, (a, b), push)


def scale_rows(x: TensorNode, col: TensorNode) -> TensorNode:
    """Multiply each row of x by the matching entry of the (n, 1) column."""
    if x.data.ndim != 2 or col.shape != (x.shape[0], 1):
        raise ShapeError(f"scale_rows: x {x.shape} needs a ({x.shape[0]}, 1) column, "
                         f"got {col.shape}")
    xd, cd = x.data, col.data
    out = TensorNode(xd * cd)

    def push(g, acc):
        acc(x, g * cd)
        acc(col, np.einsum("ij,ij->i", g, xd)[:, None])

    return _record(out, (x, col), push)


def segment_sum(a: TensorNode, segments: np.ndarray, num_segments: int,
                value_sorted: bool = False) -> TensorNode:
    """Sum rows of a 2-D tensor into ``num_segments`` buckets.

    ``segments`` must be non-decreasing.  With ``value_sorted=True`` each
    bucket is summed in ascending value order per column, making the result
    independent of the row order within a bucket (bit for bit).
    """
    if a.data.ndim != 2:
        raise ShapeError(f"segment_sum: needs a 2-D tensor, got {a.shape}")
    seg = np.asarray(segments, dtype=np.intp)
    if seg.shape != (a.shape[0],):
        raise ShapeError(
            f"segment_sum: segment ids shape {seg.shape} does not match {a.shape[0]} rows")
    if len(seg) and np.any(np.diff(seg) < 0):
        raise ShapeError("segment_sum: segment ids must be non-decreasing")
    if len(seg) and (seg[0] < 0 or seg[-1] >= num_segments):
        raise ShapeError(
            f"segment_sum: segment ids must lie in [0, {num_segments}), "
            f"got range [{seg[0]}, {seg[-1]}]")
    d = a.shape[1]
    if value_sorted:
        y = _value_sorted_segment_sum(a.data, seg, num_segments, d)
    elif len(seg):
        y = _scatter_rows(a.data, seg, num_segments)
    else:
        y = np.zeros((num_segments, d), dtype=_F64)
    out = TensorNode(y)

    def push(g, acc):
        acc(a, g[seg])

    return _record(out, (a,), push)


def _value_sorted_segment_sum(values: np.ndarray, seg: np.ndarray, n: int, d: int) -> np.ndarray:
    if len(seg) == 0:
        return np.zeros((n, d), dtype=_F64)
    counts = np.bincount(seg, minlength=n)
    maxd = int(counts.max())
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    pos = np.arange(len(seg)) - starts[seg]
    padded = np.zeros((n, maxd, d), dtype=_F64)
    padded[seg, pos] = values
    padded.sort(axis=1)
    return padded.sum(axis=1)


def affine(x: TensorNode, w: TensorNode, b: TensorNode) -> TensorNode:
    """x @ w + b with the bias row broadcast over rows of x.

    Fused linear layer: one taped op instead of matmul + bias expansion.
    """
    if x.data.ndim != 2 or w.data.ndim != 2:
        raise ShapeError(f"affine: needs 2-D x and w, got {x.shape} and {w.shape}")
    if x.shape[1] != w.shape[0] or b.shape != (w.shape[1],):
        raise ShapeError(f"affine: shapes {x.shape}, {w.shape}, {b.shape} incompatible")
    xd, wd = x.data, w.data
    out = TensorNode(xd @ wd + b.data)

    def push(g, acc):
        acc(x, g @ wd.T)
        acc(w, xd.T @ g)
        acc(b, g.sum(axis=0))

    return _record(out, (x, w, b), push)


def affine_pair(x1: TensorNode, w1: TensorNode, x2: TensorNode, w2: TensorNode,
                b: TensorNode) -> TensorNode:
    """x1 @ w1 + x2 @ w2 + b; equivalent to affine(concat([x1, x2]), ...) but
    skips the concatenation copy."""
    for x, w in ((x1, w1), (x2, w2)):
        if x.data.ndim != 2 or x.shape[1] != w.shape[0]:
            raise ShapeError(f"affine_pair: {x.shape} incompatible with {w.shape}")
    if x1.shape[0] != x2.shape[0] or w1.shape[1] != w2.shape[1] or b.shape != (w1.shape[1],):
        raise ShapeError(
            f"affine_pair: shapes {x1.shape}/{w1.shape} and {x2.shape}/{w2.shape} "
            f"with bias {b.shape} incompatible")
    x1d, w1d, x2d, w2d = x1.data, w1.data, x2.data, w2.data
    out = TensorNode(x1d @ w1d + x2d @ w2d + b.data)

    def push(g, acc):
        acc(x1, g @ w1d.T)
        acc(w1, x1d.T @ g)
        acc(x2, g @ w2d.T)
        acc(w2, x2d.T @ g)
        acc(b, g.sum(axis=0))

    return _record(out, (x1, w1, x2, w2, b), push)


# ---------------------------------------------------------------------------
# generic dispatch and backward pass
# ---------------------------------------------------------------------------

OP_KINDS = (
    "add", "sub", "mul", "scalar_mul", "matmul", "concat",
    "tanh", "relu", "sigmoid", "exp", "sum", "mean", "softmax",
    "segment_sum", "gather",
)

# fused conveniences; each is expressible in the kinds above
EXTRA_OP_KINDS = ("affine", "affine_pair", "gather_add", "rowdot", "scale_rows")

_DISPATCH: dict[str, Callable] = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "matmul": matmul,
    "tanh": tanh,
    "relu": relu,
    "sigmoid": sigmoid,
    "exp": exp,
    "affine": affine,
    "affine_pair": affine_pair,
    "rowdot": rowdot,
    "scale_rows": scale_rows,
}


def forward_op(kind: str, inputs: Sequence[TensorNode], **params) -> TensorNode:
    """Uniform entry point over the supported op kinds.

    ``params`` carries the non-tensor arguments: ``c`` for scalar_mul,
    ``axis`` for concat/sum/mean/softmax, ``segments``/``num_segments``/
    ``value_sorted`` for segment_sum, ``index`` for gather.
    """
    if kind in _DISPATCH:
        return _DISPATCH[kind](*inputs)
    if kind == "scalar_mul":
        (a,) = inputs
        return scalar_mul(params["c"], a)
    if kind == "concat":
        return concat(list(inputs), axis=params.get("axis", -1))
    if kind == "sum":
        (a,) = inputs
        return tensor_sum(a, axis=params.get("axis"), keepdims=params.get("keepdims", False))
    if kind == "mean":
        (a,) = inputs
        return mean(a, axis=params.get("axis"), keepdims=params.get("keepdims", False))
    if kind == "softmax":
        (a,) = inputs
        return softmax(a, axis=params.get("axis", -1))
    if kind == "segment_sum":
        (a,) = inputs
        return segment_sum(a, params["segments"], params["num_segments"],
                           value_sorted=params.get("value_sorted", False))
    if kind == "gather":
        (a,) = inputs
        return gather(a, params["index"])
    if kind == "gather_add":
        a, b = inputs
        return gather_add(a, params["index_a"], b, params["index_b"])
    raise ValueError(f"unknown op kind {kind!r}; supported: {OP_KINDS + EXTRA_OP_KINDS}")


def backward(tape: Tape, output: TensorNode,
             parameters: Iterable[TensorNode] = ()) -> dict[int, np.ndarray]:
    """Propagate d(output)/d(node) through the tape.

    ``output`` must be scalar.  Every reachable node with ``requires_grad``
    gets its ``grad`` populated; nodes listed in ``parameters`` that the
    output does not depend on receive exact zeros.  Returns a map from
    ``id(node)`` to the gradient array.  Replaying the same tape leaves the
    accumulation order fixed, so repeated calls are bitwise-identical.
    """
    if output.size != 1:
        raise ShapeError(f"backward: output must be scalar, got shape {output.shape}")
    # entry = [array, owned]; borrowed arrays may alias an upstream gradient
    # buffer and are only replaced, never mutated in place
    entries: dict[int, list] = {id(output): [np.ones_like(output.data), True]}

    def acc(node: TensorNode, g: np.ndarray) -> None:
        if not node.requires_grad:
            return
        key = id(node)
        entry = entries.get(key)
        g = np.asarray(g, dtype=_F64).reshape(node.shape)
        if entry is None:
            entries[key] = [g, False]
        elif entry[1]:
            entry[0] += g
        else:
            entries[key] = [entry[0] + g, True]

    for rec in reversed(tape.records):
        entry = entries.get(id(rec.output))
        if entry is None:
            continue
        rec.push(entry[0], acc)

    for node in parameters:
        if id(node) not in entries:
            entries[id(node)] = [np.zeros_like(node.data), True]

    grads = {key: entry[0] for key, entry in entries.items()}
    if output.requires_grad:
        output.grad = grads[id(output)].reshape(-1)
    for rec in tape.records:
        for node in rec.inputs + (rec.output,):
            if node.requires_grad and id(node) in grads:
                node.grad = grads[id(node)].reshape(-1)
    for node in parameters:
        node.grad = grads[id(node)].reshape(-1)
    return grads
