"""Finite-difference verification of taped gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .engine import Tape, TensorNode, backward


class GradCheckError(RuntimeError):
    """Non-finite value encountered while checking a gradient."""

    def __init__(self, message: str, tensor_index: int, coordinate: int):
        super().__init__(f"{message} (tensor {tensor_index}, coordinate {coordinate})")
        self.tensor_index = tensor_index
        self.coordinate = coordinate


def grad_check(fn: Callable[[Sequence[TensorNode]], TensorNode],
               point: Sequence[np.ndarray],
               fd_step: float = 1e-5) -> float:
    """Max relative error between taped and central-difference gradients.

    ``fn`` maps a list of TensorNodes to a scalar TensorNode and must be
    re-runnable (it is evaluated 1 + 2*n_coordinates times).  The error per
    coordinate is |analytic - central| / max(1, |central|); the max over all
    coordinates of all inputs is returned.  Non-finite values anywhere raise
    :class:`GradCheckError` naming the offending coordinate.
    """
    if fd_step <= 0:
        raise ValueError(f"fd_step must be positive, got {fd_step}")
    arrays = [np.array(p, dtype=np.float64) for p in point]

    nodes = [TensorNode(a, requires_grad=True) for a in arrays]
    with Tape() as tape:
        out = fn(nodes)
    if out.size != 1:
        raise ValueError(f"function under test must return a scalar, got shape {out.shape}")
    backward(tape, out, parameters=nodes)
    analytic = [np.array(n.grad, dtype=np.float64) for n in nodes]

    def evaluate(perturbed: list[np.ndarray]) -> float:
        probe = [TensorNode(a) for a in perturbed]
        with Tape():
            val = fn(probe)
        return val.item()

    worst = 0.0
    for ti, base in enumerate(arrays):
        flat = base.reshape(-1)
        for ci in range(flat.size):
            saved = flat[ci]
            flat[ci] = saved + fd_step
            f_plus = evaluate(arrays)
            flat[ci] = saved - fd_step
            f_minus = evaluate(arrays)
            flat[ci] = saved
            central = (f_plus - f_minus) / (2.0 * fd_step)
            a = analytic[ti][ci]
            if not (np.isfinite(central) and np.isfinite(a)):
                raise GradCheckError("non-finite gradient value", ti, ci)
            err = abs(a - central) / max(1.0, abs(central))
            if err > worst:
                worst = err
    return worst
