"""Self-contained numeric core: tensors, tape autodiff, Adam, grad checking."""
from .adam import AdamState, adam_step
from .autodiff import (
    ShapeError,
    Tape,
    Tensor,
    add,
    add_rowvec,
    backward,
    concat,
    dropout_mask,
    inject_backward_fault,
    matmul,
    mean,
    mul,
    neg,
    relu,
    reshape,
    scale,
    sigmoid,
    sigmoid_values,
    sigmoid_xent,
    softmax,
    stack,
    sub,
    sum,
    take_rows,
    tanh,
    zeros,
)
from .gradcheck import GradCheckReport, grad_check, relative_error

__all__ = [
    "AdamState",
    "GradCheckReport",
    "ShapeError",
    "Tape",
    "Tensor",
    "adam_step",
    "add",
    "add_rowvec",
    "backward",
    "concat",
    "dropout_mask",
    "grad_check",
    "inject_backward_fault",
    "matmul",
    "mean",
    "mul",
    "neg",
    "relative_error",
    "relu",
    "reshape",
    "scale",
    "sigmoid",
    "sigmoid_values",
    "sigmoid_xent",
    "softmax",
    "stack",
    "sub",
    "sum",
    "take_rows",
    "tanh",
    "zeros",
]
