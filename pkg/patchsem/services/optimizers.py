"""
Optimizers - In-place SGD and Adam updates over ModelParams.

Frozen rows (embedding PAD rows) are never updated.
"""

from dataclasses import dataclass, field

import torch

from patchsem.autodiff import ShapeMismatch, Tensor
from patchsem.models.params import ModelParams
from patchsem.schemas.config import TrainConfig


@dataclass
class AdamState:
    """First/second moment buffers per parameter name and the step counter."""

    step: int = 0
    m: dict[str, torch.Tensor] = field(default_factory=dict)
    v: dict[str, torch.Tensor] = field(default_factory=dict)


def _gradient(name: str, tensor: Tensor) -> torch.Tensor:
    if tensor.grad is None:
        return torch.zeros_like(tensor.data)
    if tensor.grad.shape != tensor.data.shape:
        raise ShapeMismatch(f"{name}: gradient shape {tuple(tensor.grad.shape)} != {tensor.shape}")
    return tensor.grad


def _apply(tensor: Tensor, delta: torch.Tensor) -> None:
    if tensor.frozen_rows:
        delta = delta.clone()
        delta[list(tensor.frozen_rows)] = 0.0
    tensor.data -= delta


def sgd_step(params: ModelParams, learning_rate: float) -> None:
    """theta <- theta - lr * grad."""
    for name, tensor in params.named():
        _apply(tensor, learning_rate * _gradient(name, tensor))


def adam_step(params: ModelParams, state: AdamState, config: TrainConfig) -> AdamState:
    """
    One bias-corrected Adam update:

        m <- b1 m + (1 - b1) g        v <- b2 v + (1 - b2) g^2
        theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
    """
    state.step += 1
    b1, b2 = config.beta1, config.beta2
    correction1 = 1.0 - b1**state.step
    correction2 = 1.0 - b2**state.step
    for name, tensor in params.named():
        grad = _gradient(name, tensor)
        m = state.m.get(name)
        v = state.v.get(name)
        m = (1.0 - b1) * grad if m is None else b1 * m + (1.0 - b1) * grad
        v = (1.0 - b2) * grad * grad if v is None else b2 * v + (1.0 - b2) * grad * grad
        state.m[name], state.v[name] = m, v
        m_hat = m / correction1
        v_hat = v / correction2
        _apply(tensor, config.learning_rate * m_hat / (torch.sqrt(v_hat) + config.eps))
    return state


def optimizer_step(params: ModelParams, state: AdamState | None, config: TrainConfig) -> AdamState | None:
    """
    Update `params` in place from their gradients.

    Returns:
        The (possibly new) optimizer state; None for SGD
    """
    if config.optimizer == "sgd":
        sgd_step(params, config.learning_rate)
        return None
    return adam_step(params, state if state is not None else AdamState(), config)
