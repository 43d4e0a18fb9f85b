"""Prediction and reversal losses over frame-stacked decoded trajectories.

All losses are sums of squared L2 distances over agents and frames.  The
reversal variants differ in what the reverse trajectory is compared to:

    tango    forward vs backward-from-endpoint, time-reflected
    gt-rev   ground truth vs backward-from-endpoint, time-reflected
    rev2     forward vs backward-from-initial-state, time-reflected

Stacked tensors are frame-major (row j * n_slots + s); the reverse tensors
produced by the model are already time-reflected so rows align one-to-one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..diffcore import ShapeError, TensorNode, constant, mul, scalar_mul, sub, tensor_sum

VARIANTS = ("tango", "gt-rev", "rev2")


@dataclass
class LossConfig:
    alpha: float = 1.0
    variant: str = "tango"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


@dataclass
class LossReport:
    """Per-epoch loss decomposition; total = L_pred + alpha * L_reverse."""

    epoch: int
    l_pred: float
    l_reverse: float
    total: float
    batch_l_pred: list = field(default_factory=list)
    batch_l_reverse: list = field(default_factory=list)
    batch_total: list = field(default_factory=list)


def _check_rows(a, b, what: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{what}: sequence shapes {a.shape} and {b.shape} differ")


def _sq_sum(diff: TensorNode) -> TensorNode:
    return tensor_sum(mul(diff, diff))


def loss_pred(y_fwd: TensorNode, y_true: np.ndarray, mask: np.ndarray | None = None) -> TensorNode:
    """Sum of squared errors between predictions and ground truth; a 0/1
    mask selects the observed entries of the frame-stacked layout."""
    _check_rows(y_fwd.data, y_true, "loss_pred")
    diff = sub(y_fwd, constant(y_true))
    if mask is not None:
        _check_rows(y_fwd.data, mask, "loss_pred mask")
        diff = mul(diff, constant(mask))
    return _sq_sum(diff)


def loss_reverse(y_fwd: TensorNode, y_rev: TensorNode) -> TensorNode:
    """Forward frames vs time-reflected reverse frames; symmetric in its
    arguments and zero exactly when the trajectories coincide."""
    _check_rows(y_fwd.data, y_rev.data, "loss_reverse")
    return _sq_sum(sub(y_fwd, y_rev))


def loss_gt_rev(y_true: np.ndarray, mask: np.ndarray, y_rev: TensorNode) -> TensorNode:
    """Ground truth vs time-reflected reverse frames at observed entries."""
    _check_rows(y_rev.data, y_true, "loss_gt_rev")
    diff = mul(sub(constant(y_true), y_rev), constant(mask))
    return _sq_sum(diff)


def loss_rev2(y_fwd: TensorNode, y_rev2: TensorNode) -> TensorNode:
    """Forward frames vs the trajectory launched backward from the initial
    latent, compared frame-by-frame under time reflection."""
    _check_rows(y_fwd.data, y_rev2.data, "loss_rev2")
    return _sq_sum(sub(y_fwd, y_rev2))


def combine(l_pred: TensorNode, l_rev: TensorNode | None, alpha: float) -> TensorNode:
    if l_rev is None or alpha == 0.0:
        return l_pred
    from ..diffcore import add

    return add(l_pred, scalar_mul(alpha, l_rev))
