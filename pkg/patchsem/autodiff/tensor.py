"""
Tensor - dense float64 array taking part in a recorded reverse-mode graph.

Values live in torch tensors; gradients are produced by the backward rules
registered in `patchsem.autodiff.ops`, not by torch.autograd. A `Graph`
records ops only while it is the active graph of the current context and
at least one input requires grad.
"""

from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass

import torch

from patchsem.core.exceptions import PatchSemError

DTYPE = torch.float64
MAX_RANK = 3

BackwardFn = Callable[[torch.Tensor], Sequence[torch.Tensor | None]]


class TensorError(PatchSemError):
    """Base exception for tensor engine errors."""

    pass


class ShapeMismatch(TensorError):
    """Operand shapes are incompatible with the op."""

    pass


class NotScalar(TensorError):
    """backward() was called on a tensor with more than one element."""

    pass


class DetachedTensor(TensorError):
    """backward() was called on a tensor that no graph produced."""

    pass


class Tensor:
    """
    A dense value with an optional gradient buffer.

    Attributes:
        data: torch float64 values, row-major
        requires_grad: Whether backward should produce `grad` for this tensor
        grad: Accumulated gradient (same shape as data), None until backward
        name: Optional label used in reports
        frozen_rows: Row indices that never receive gradient (embedding PAD row)
    """

    __slots__ = ("data", "requires_grad", "grad", "name", "frozen_rows", "graph")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: str | None = None,
        frozen_rows: tuple[int, ...] = (),
    ):
        value = torch.as_tensor(data, dtype=DTYPE)
        if value.dim() > MAX_RANK:
            raise ShapeMismatch(f"rank {value.dim()} exceeds the supported rank {MAX_RANK}")
        self.data = value
        self.requires_grad = requires_grad
        self.grad: torch.Tensor | None = None
        self.name = name
        self.frozen_rows = tuple(frozen_rows)
        self.graph: Graph | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def numel(self) -> int:
        return self.data.numel()

    def item(self) -> float:
        return float(self.data.item())

    def tolist(self):
        return self.data.tolist()

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate(self, grad: torch.Tensor) -> None:
        """Add `grad` into the buffer, skipping frozen rows."""
        if grad.shape != self.data.shape:
            raise ShapeMismatch(f"gradient shape {tuple(grad.shape)} != tensor shape {self.shape}")
        if self.frozen_rows:
            grad = grad.clone()
            grad[list(self.frozen_rows)] = 0.0
        self.grad = grad.clone() if self.grad is None else self.grad + grad

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


@dataclass(eq=False)
class Node:
    """One recorded op: its inputs, output and backward rule."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


_active_graph: ContextVar["Graph | None"] = ContextVar("patchsem_active_graph", default=None)


class Graph:
    """
    Ordered record of the ops of one forward pass.

    Usage:
        with Graph() as graph:
            loss = model_loss(...)
        graph.backward(loss)
    """

    def __init__(self):
        self.nodes: list[Node] = []
        self._tokens = []

    def __enter__(self) -> "Graph":
        self._tokens.append(_active_graph.set(self))
        return self

    def __exit__(self, *exc) -> None:
        _active_graph.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, op: str, inputs: tuple[Tensor, ...], output: Tensor, backward: BackwardFn) -> None:
        output.requires_grad = True
        output.graph = self
        self.nodes.append(Node(op=op, inputs=inputs, output=output, backward=backward))

    def backward(self, loss: Tensor) -> None:
        """
        Propagate d(loss)/d(x) to every requires_grad tensor on this graph.

        Nodes are visited in exact reverse recording order; gradients add up
        for tensors consumed more than once.

        Raises:
            NotScalar: If loss is not a 0-dim tensor
            DetachedTensor: If loss was not recorded on this graph
        """
        if loss.data.dim() != 0:
            raise NotScalar(f"backward needs a scalar loss, got shape {loss.shape}")
        if loss.graph is not self:
            raise DetachedTensor("loss was not recorded on this graph")

        loss.grad = torch.ones_like(loss.data)
        for node in reversed(self.nodes):
            out_grad = node.output.grad
            if out_grad is None:
                continue
            for tensor, grad in zip(node.inputs, node.backward(out_grad)):
                if grad is not None and tensor.requires_grad:
                    tensor.accumulate(grad)


def backward(loss: Tensor) -> None:
    """Run the backward pass of the graph that produced `loss`."""
    if loss.data.dim() != 0:
        raise NotScalar(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss.graph is None:
        raise DetachedTensor("loss is not attached to a recorded graph")
    loss.graph.backward(loss)


@contextmanager
def no_graph() -> Iterator[None]:
    """Evaluate without recording, even inside an active graph."""
    token = _active_graph.set(None)
    try:
        yield
    finally:
        _active_graph.reset(token)


def emit(op: str, inputs: tuple[Tensor, ...], value: torch.Tensor, backward_fn: BackwardFn) -> Tensor:
    """Wrap an op result, recording it when a graph is active and grads are needed."""
    out = Tensor(value)
    graph = _active_graph.get()
    if graph is not None and any(t.requires_grad for t in inputs):
        graph.record(op, inputs, out, backward_fn)
    return out
