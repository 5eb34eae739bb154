"""
The full classifier graph: embeddings -> convolution stacks -> window
pooling -> refinement and fusion -> self-attention -> sigmoid head.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from patchsem.autodiff import Tensor, no_graph, ops
from patchsem.core.exceptions import PatchSemError
from patchsem.schemas.patch import EncodedPatch

from .layers import hybrid_attention, loss, mcc_forward, predict, refine_and_fuse, semantic_align
from .params import ModelParams

logger = logging.getLogger(__name__)


class ConfigMismatch(PatchSemError):
    """Raised when an encoded patch does not fit the model's sequence limits."""

    pass


@dataclass
class LevelActivations:
    """Intermediate results of one forward pass; disabled levels are None."""

    hw: Tensor | None
    hs: Tensor | None
    hd: Tensor | None
    pooled: Tensor | None
    fused: Tensor
    g: Tensor
    d_g: Tensor
    probability: Tensor

    @property
    def pooled_count(self) -> int:
        return 0 if self.pooled is None else self.pooled.shape[0]

    @property
    def fused_count(self) -> int:
        return self.fused.shape[0]


def _check_lengths(enc: EncodedPatch, params: ModelParams) -> None:
    config = params.config
    expected = {
        "token_ids": config.token_limit,
        "line_ids": config.line_limit,
        "desc_ids": config.description_limit,
    }
    for field, limit in expected.items():
        actual = len(getattr(enc, field))
        if actual != limit:
            raise ConfigMismatch(f"patch {enc.id!r}: {field} has length {actual}, model expects {limit}")


def _level(ids: tuple[int, ...], params: ModelParams, level: str) -> Tensor | None:
    if f"{level}.embedding" not in params:
        return None
    return mcc_forward(ops.embedding(params[f"{level}.embedding"], ids), params, level)


def run_graph(enc: EncodedPatch, params: ModelParams) -> LevelActivations:
    """
    Forward pass keeping every intermediate.

    Disabled levels contribute neither embeddings nor convolution stacks.

    Raises:
        ConfigMismatch: If the id sequences do not match the config limits
    """
    _check_lengths(enc, params)
    hw = _level(enc.token_ids, params, "token")
    hs = _level(enc.line_ids, params, "line")
    hd = _level(enc.desc_ids, params, "description")

    pooled = semantic_align(hw, hs, params) if (hw is not None or hs is not None) else None
    fused = refine_and_fuse(pooled, hd, params)
    g, d_g = hybrid_attention(fused, params)
    return LevelActivations(
        hw=hw, hs=hs, hd=hd, pooled=pooled, fused=fused, g=g, d_g=d_g, probability=predict(d_g, params)
    )


def forward(enc: EncodedPatch, params: ModelParams) -> Tensor:
    """Security probability of one encoded patch, as a scalar Tensor."""
    return run_graph(enc, params).probability


def batch_loss(batch: list[EncodedPatch], params: ModelParams) -> Tensor:
    """Mean cross-entropy over the batch."""
    if not batch:
        raise ValueError("batch_loss needs at least one patch")
    losses = [loss(forward(enc, params), enc.label) for enc in batch]
    return losses[0] if len(losses) == 1 else ops.mean(ops.stack(losses), axis=0)


def score_records(params: ModelParams, encoded: list[EncodedPatch], workers: int = 1) -> list[float]:
    """
    Probabilities for every patch, in input order, without recording.

    Shared by eval, predict and validation. With workers > 1 the patches are
    scored on a thread pool; parameters must not change meanwhile.
    """

    def score(enc: EncodedPatch) -> float:
        with no_graph():
            return forward(enc, params).item()

    if workers <= 1 or len(encoded) <= 1:
        return [score(enc) for enc in encoded]
    logger.debug("Scoring %d patches on %d threads", len(encoded), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(score, encoded))
