"""
Finite-difference verification of recorded gradients.
"""

import logging
from collections.abc import Callable, Mapping, Sequence

from pydantic import BaseModel, Field

from patchsem.core.exceptions import VerificationError

from .tensor import Graph, Tensor, no_graph

logger = logging.getLogger(__name__)

DENOMINATOR_FLOOR = 1e-8


class GradCheckReport(BaseModel):
    """Worst relative errors between recorded and central-difference gradients."""

    max_error: float = Field(..., ge=0.0)
    worst_param: str | None = None
    worst_by_param: dict[str, float] = Field(default_factory=dict)
    checked_elements: int = 0
    eps: float

    def passed(self, tolerance: float) -> bool:
        return self.max_error < tolerance


def relative_error(analytic: float, numeric: float) -> float:
    """|a - n| / max(1e-8, |a| + |n|)."""
    return abs(analytic - numeric) / max(DENOMINATOR_FLOOR, abs(analytic) + abs(numeric))


def finite_diff_check(
    f: Callable[[], Tensor],
    params: Mapping[str, Tensor] | Sequence[Tensor],
    eps: float = 1e-5,
) -> GradCheckReport:
    """
    Compare backward() gradients of a scalar function against central differences.

    Args:
        f: Deterministic zero-argument function returning a scalar Tensor built
            from `params`
        params: Tensors to probe, by name or in order
        eps: Perturbation step (> 0)

    Returns:
        GradCheckReport with the worst relative error overall and per tensor.
        Frozen rows are skipped.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    named = dict(params) if isinstance(params, Mapping) else {
        (t.name or f"param_{i}"): t for i, t in enumerate(params)
    }

    for tensor in named.values():
        tensor.zero_grad()
    with Graph() as graph:
        loss = f()
    if loss.graph is graph:
        graph.backward(loss)

    worst_by_param: dict[str, float] = {}
    checked = 0
    with no_graph():
        for name, tensor in named.items():
            flat = tensor.data.view(-1)
            analytic = tensor.grad.reshape(-1) if tensor.grad is not None else None
            row_size = tensor.numel // tensor.shape[0] if tensor.shape and tensor.shape[0] else 1
            frozen = set(tensor.frozen_rows)
            worst = 0.0
            for i in range(flat.numel()):
                if frozen and i // row_size in frozen:
                    continue
                original = flat[i].item()
                flat[i] = original + eps
                upper = f().item()
                flat[i] = original - eps
                lower = f().item()
                flat[i] = original
                numeric = (upper - lower) / (2.0 * eps)
                exact = analytic[i].item() if analytic is not None else 0.0
                worst = max(worst, relative_error(exact, numeric))
                checked += 1
            worst_by_param[name] = worst
            logger.debug("gradcheck %s: worst relative error %.3e", name, worst)

    worst_param = max(worst_by_param, key=worst_by_param.get) if worst_by_param else None
    return GradCheckReport(
        max_error=worst_by_param[worst_param] if worst_param else 0.0,
        worst_param=worst_param,
        worst_by_param=worst_by_param,
        checked_elements=checked,
        eps=eps,
    )


class GradientCheckFailed(VerificationError):
    """Raised when a recorded gradient disagrees with central differences."""

    def __init__(self, report: GradCheckReport, tolerance: float):
        super().__init__(
            f"gradient check failed: max relative error {report.max_error:.3e} >= {tolerance:g} "
            f"in '{report.worst_param}'"
        )
        self.report = report
        self.tolerance = tolerance
