from .tensor import (
    Tensor,
    ShapeMismatch,
    NonFiniteInput,
    NonScalarLoss,
    TargetOutOfRange,
    backward,
    add,
    mul,
    scale,
    matmul,
    transpose,
    concat,
    stack_rows,
    slice_cols,
    row,
    exp_clamped,
    embed_lookup,
    mean,
    mean_rows,
    sum_all,
    relu,
    tanh,
    softmax_rows,
    cross_entropy,
    linear,
    multi_head_attention,
    cross_entropy_rows,
    dropout,
    layer_norm_rows,
)
from .adam import AdamState, adam_step
from .checkpoint import CheckpointFormatError, load_params, save_params
from .gradcheck import grad_check

__all__ = [
    "Tensor", "ShapeMismatch", "NonFiniteInput", "NonScalarLoss",
    "TargetOutOfRange", "backward", "add", "mul", "scale", "matmul",
    "transpose", "concat", "stack_rows", "slice_cols", "row", "exp_clamped",
    "embed_lookup", "mean", "mean_rows",
    "sum_all", "relu", "tanh", "softmax_rows", "cross_entropy", "linear", "multi_head_attention",
    "cross_entropy_rows", "dropout", "layer_norm_rows",
    "AdamState", "adam_step", "grad_check",
    "CheckpointFormatError", "load_params", "save_params",
]
