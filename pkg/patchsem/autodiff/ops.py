"""
Differentiable ops over `Tensor`, each with a hand-written backward rule.

Only the algebra the classifier graph needs is covered. There is no
broadcasting beyond adding a bias vector to every row of a matrix.
"""

import math
from collections.abc import Sequence

import torch
import torch.nn.functional as F

from .tensor import DTYPE, ShapeMismatch, Tensor, TensorError, emit


class EvenKernel(TensorError):
    """Same-padding convolution needs an odd kernel size."""

    pass


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ShapeMismatch(message)


# Lookup and slicing


def embedding(table: Tensor, ids: Sequence[int]) -> Tensor:
    """Gather rows of `table` [V x d] for `ids` -> [n x d]."""
    _require(len(table.shape) == 2, f"embedding table must be 2-D, got {table.shape}")
    index = torch.as_tensor(list(ids), dtype=torch.long)
    _require(index.dim() == 1 and index.numel() > 0, "embedding needs at least one id")
    _require(
        int(index.min()) >= 0 and int(index.max()) < table.shape[0],
        f"ids must lie in [0, {table.shape[0]})",
    )
    value = table.data.index_select(0, index)

    def backward(grad):
        return (torch.zeros_like(table.data).index_add_(0, index, grad),)

    return emit("embedding", (table,), value, backward)


def slice_rows(x: Tensor, start: int, stop: int) -> Tensor:
    """Rows start..stop-1 of a matrix, or entries start..stop-1 of a vector."""
    _require(len(x.shape) in (1, 2), f"slice_rows needs a vector or matrix, got {x.shape}")
    _require(0 <= start < stop <= x.shape[0], f"bad row range [{start}, {stop}) for {x.shape}")
    value = x.data[start:stop]

    def backward(grad):
        full = torch.zeros_like(x.data)
        full[start:stop] = grad
        return (full,)

    return emit("slice_rows", (x,), value, backward)


def take_row(x: Tensor, index: int) -> Tensor:
    """Row `index` of a matrix as a vector."""
    _require(len(x.shape) == 2, f"take_row needs a matrix, got {x.shape}")
    _require(0 <= index < x.shape[0], f"row {index} out of range for {x.shape}")
    value = x.data[index]

    def backward(grad):
        full = torch.zeros_like(x.data)
        full[index] = grad
        return (full,)

    return emit("take_row", (x,), value, backward)


def transpose(x: Tensor) -> Tensor:
    _require(len(x.shape) == 2, f"transpose needs a matrix, got {x.shape}")

    def backward(grad):
        return (grad.t().contiguous(),)

    return emit("transpose", (x,), x.data.t().contiguous(), backward)


# Convolution


def conv1d_same(x: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """
    Length-preserving 1-D convolution over the rows of `x`.

    Args:
        x: Input [n x d_in]
        kernel: Filters [k x d_in x d_out], k odd
        bias: [d_out]

    Returns:
        [n x d_out]; row j contracts zero-padded rows j-k//2 .. j+k//2 with the kernel

    Raises:
        EvenKernel: If k is even
        ShapeMismatch: On inconsistent shapes
    """
    _require(len(x.shape) == 2 and x.shape[0] >= 1, f"conv input must be [n x d_in], got {x.shape}")
    _require(len(kernel.shape) == 3, f"conv kernel must be [k x d_in x d_out], got {kernel.shape}")
    k, d_in, d_out = kernel.shape
    if k % 2 == 0:
        raise EvenKernel(f"kernel size {k} is even; same padding needs an odd size")
    _require(d_in == x.shape[1], f"kernel expects {d_in} input features, input has {x.shape[1]}")
    _require(bias.shape == (d_out,), f"bias must be [{d_out}], got {bias.shape}")

    n = x.shape[0]
    radius = k // 2
    padded = F.pad(x.data, (0, 0, radius, radius))
    # windows[j, i, t] = padded[j + t, i]
    windows = padded.unfold(0, k, 1)
    value = torch.einsum("nit,tio->no", windows, kernel.data) + bias.data

    def backward(grad):
        grad_kernel = torch.einsum("nit,no->tio", windows, grad)
        grad_bias = grad.sum(dim=0)
        grad_windows = torch.einsum("no,tio->nit", grad, kernel.data)
        grad_padded = torch.zeros_like(padded)
        for t in range(k):
            grad_padded[t : t + n] += grad_windows[:, :, t]
        return grad_padded[radius : radius + n], grad_kernel, grad_bias

    return emit("conv1d_same", (x, kernel, bias), value, backward)


# Elementwise


def tanh(x: Tensor) -> Tensor:
    value = torch.tanh(x.data)

    def backward(grad):
        return (grad * (1.0 - value * value),)

    return emit("tanh", (x,), value, backward)


def relu(x: Tensor) -> Tensor:
    """max(0, x); the derivative at exactly 0 is taken as 1/2."""
    value = torch.clamp_min(x.data, 0.0)

    def backward(grad):
        # Symmetric subgradient: matches a central difference across the kink
        slope = (x.data > 0).to(DTYPE) + 0.5 * (x.data == 0).to(DTYPE)
        return (grad * slope,)

    return emit("relu", (x,), value, backward)


def sigmoid(x: Tensor) -> Tensor:
    # Branch form: exp is only ever taken of a non-positive argument
    z = torch.exp(-torch.abs(x.data))
    value = torch.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z))

    def backward(grad):
        return (grad * value * (1.0 - value),)

    return emit("sigmoid", (x,), value, backward)


_ELEMENTWISE = {"tanh": tanh, "relu": relu, "sigmoid": sigmoid}


def elementwise(kind: str, x: Tensor) -> Tensor:
    """Apply tanh, relu or sigmoid per element."""
    try:
        fn = _ELEMENTWISE[kind]
    except KeyError:
        raise TensorError(f"unknown elementwise kind '{kind}'") from None
    return fn(x)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted softmax of a vector, or of each row of a matrix (axis=-1)."""
    _require(len(x.shape) in (1, 2), f"softmax needs a vector or matrix, got {x.shape}")
    shifted = x.data - x.data.amax(dim=axis, keepdim=True)
    exps = torch.exp(shifted)
    value = exps / exps.sum(dim=axis, keepdim=True)

    def backward(grad):
        inner = (grad * value).sum(dim=axis, keepdim=True)
        return (value * (grad - inner),)

    return emit("softmax", (x,), value, backward)


# Linear algebra and reductions


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product [p x q] @ [q x r] -> [p x r].

    A vector operand is read as a row (left) or column (right) and the
    promoted dimension is dropped from the result, as in numpy.
    """
    _require(len(a.shape) in (1, 2) and len(b.shape) in (1, 2), f"matmul of {a.shape} and {b.shape}")
    left = a.data.unsqueeze(0) if a.data.dim() == 1 else a.data
    right = b.data.unsqueeze(1) if b.data.dim() == 1 else b.data
    _require(left.shape[1] == right.shape[0], f"matmul inner dims differ: {a.shape} @ {b.shape}")
    product = left @ right
    value = product
    if a.data.dim() == 1:
        value = value.squeeze(0)
    if b.data.dim() == 1:
        value = value.squeeze(-1)

    def backward(grad):
        grad2d = grad.reshape(product.shape)
        grad_a = (grad2d @ right.t()).reshape(a.data.shape)
        grad_b = (left.t() @ grad2d).reshape(b.data.shape)
        return grad_a, grad_b

    return emit("matmul", (a, b), value, backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; `b` may also be a bias vector added to every row of `a`."""
    same = a.shape == b.shape
    bias = len(a.shape) == 2 and len(b.shape) == 1 and b.shape[0] == a.shape[1]
    _require(same or bias, f"cannot add {a.shape} and {b.shape}")

    def backward(grad):
        return grad, (grad if same else grad.sum(dim=0))

    return emit("add", (a, b), a.data + b.data, backward)


def scale(x: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def backward(grad):
        return (grad * factor,)

    return emit("scale", (x,), x.data * factor, backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Join tensors along `axis`, preserving operand order."""
    _require(len(tensors) > 0, "concat needs at least one tensor")
    rank = len(tensors[0].shape)
    _require(all(len(t.shape) == rank for t in tensors), "concat operands must share rank")
    _require(-rank <= axis < rank, f"axis {axis} out of range for rank {rank}")
    for t in tensors:
        other = [s for i, s in enumerate(t.shape) if i != axis % rank]
        first = [s for i, s in enumerate(tensors[0].shape) if i != axis % rank]
        _require(other == first, f"concat shapes {tensors[0].shape} and {t.shape} differ off-axis")
    sizes = [t.shape[axis] for t in tensors]

    def backward(grad):
        return tuple(torch.split(grad, sizes, dim=axis))

    return emit("concat", tuple(tensors), torch.cat([t.data for t in tensors], dim=axis), backward)


def stack(tensors: Sequence[Tensor]) -> Tensor:
    """Stack equally shaped tensors along a new leading axis."""
    _require(len(tensors) > 0, "stack needs at least one tensor")
    _require(all(t.shape == tensors[0].shape for t in tensors), "stack operands must share shape")

    def backward(grad):
        return tuple(torch.unbind(grad, dim=0))

    return emit("stack", tuple(tensors), torch.stack([t.data for t in tensors]), backward)


def mean(x: Tensor, axis: int = 0) -> Tensor:
    _require(len(x.shape) >= 1, "mean needs at least one axis")
    count = x.shape[axis]
    _require(count > 0, "mean over an empty axis")

    def backward(grad):
        return (grad.unsqueeze(axis).expand_as(x.data) / count,)

    return emit("mean", (x,), x.data.mean(dim=axis), backward)


def sum_all(x: Tensor) -> Tensor:
    """Sum of every element, as a scalar."""

    def backward(grad):
        return (torch.ones_like(x.data) * grad,)

    return emit("sum_all", (x,), x.data.sum(), backward)


# Loss


def binary_cross_entropy(prob: Tensor, label: int, eps: float = 1e-12) -> Tensor:
    """
    -y log p - (1 - y) log(1 - p) with p clamped to [eps, 1 - eps].

    The gradient is zero where the clamp is active.
    """
    _require(prob.data.dim() == 0, f"binary_cross_entropy needs a scalar probability, got {prob.shape}")
    y = float(label)
    p = torch.clamp(prob.data, eps, 1.0 - eps)
    value = -(y * torch.log(p) + (1.0 - y) * torch.log1p(-p))

    def backward(grad):
        inside = ((prob.data > eps) & (prob.data < 1.0 - eps)).to(DTYPE)
        local = -y / p + (1.0 - y) / (1.0 - p)
        return (grad * local * inside,)

    return emit("binary_cross_entropy", (prob,), value, backward)


def scaled_dot_scores(queries: Tensor, key: Tensor, width: int) -> Tensor:
    """q_j . k / sqrt(width) for every row q_j of `queries`."""
    return scale(matmul(queries, key), 1.0 / math.sqrt(width))
