# Tensor engine - Export the tensor type, graph and ops
from . import ops
from .gradcheck import GradCheckReport, GradientCheckFailed, finite_diff_check, relative_error
from .ops import EvenKernel
from .tensor import (
    DTYPE,
    DetachedTensor,
    Graph,
    NotScalar,
    ShapeMismatch,
    Tensor,
    TensorError,
    backward,
    no_graph,
)

__all__ = [
    "ops",
    "DTYPE",
    "Tensor",
    "Graph",
    "backward",
    "no_graph",
    "finite_diff_check",
    "relative_error",
    "GradCheckReport",
    "GradientCheckFailed",
    "TensorError",
    "ShapeMismatch",
    "EvenKernel",
    "NotScalar",
    "DetachedTensor",
]
