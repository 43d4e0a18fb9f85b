from .engine import (
    EXTRA_OP_KINDS,
    OP_KINDS,
    ShapeError,
    Tape,
    TensorNode,
    add,
    affine,
    affine_pair,
    backward,
    concat,
    constant,
    exp,
    forward_op,
    gather,
    gather_add,
    matmul,
    mean,
    mul,
    parameter,
    relu,
    rowdot,
    scalar_mul,
    scale_rows,
    segment_sum,
    sigmoid,
    softmax,
    sub,
    tensor_sum,
    tanh,
)
from .gradcheck import GradCheckError, grad_check

__all__ = [
    "EXTRA_OP_KINDS",
    "OP_KINDS",
    "ShapeError",
    "Tape",
    "TensorNode",
    "add",
    "affine",
    "affine_pair",
    "backward",
    "concat",
    "constant",
    "exp",
    "forward_op",
    "gather",
    "gather_add",
    "matmul",
    "mean",
    "mul",
    "parameter",
    "relu",
    "rowdot",
    "scalar_mul",
    "scale_rows",
    "segment_sum",
    "sigmoid",
    "softmax",
    "sub",
    "tensor_sum",
    "tanh",
    "GradCheckError",
    "grad_check",
]
