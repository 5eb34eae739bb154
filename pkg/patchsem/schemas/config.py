"""
Pydantic schemas for model, ingestion and training hyperparameters.

Every section forbids unknown keys so typos in config files fail loudly.
"""

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Section(BaseModel):
    """Base for config sections: strict keys, immutable after validation."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class LevelToggles(_Section):
    """Which input levels feed the graph (ablation switches)."""

    token: bool = Field(default=True, description="Token-level stream (off = TL- variant)")
    sentence: bool = Field(default=True, description="Line-level stream (off = SL- variant)")
    description: bool = Field(default=True, description="Commit-message stream (off = DL- variant)")

    @model_validator(mode="after")
    def _at_least_one(self) -> "LevelToggles":
        if not (self.token or self.sentence or self.description):
            raise ValueError("at least one input level must be enabled")
        return self

    @property
    def variant(self) -> str:
        """Short ablation label: full, TL-, SL-, DL- or a combination."""
        removed = [
            tag
            for tag, enabled in (("TL-", self.token), ("SL-", self.sentence), ("DL-", self.description))
            if not enabled
        ]
        return "+".join(removed) if removed else "full"


class IngestConfig(_Section):
    """Sequence budgets and vocabulary cut-off."""

    token_limit: int = Field(default=256, ge=1, description="nw: token ids per patch")
    line_limit: int = Field(default=64, ge=1, description="ns: line ids per patch")
    description_limit: int = Field(default=64, ge=1, description="nd: description ids per patch")
    min_freq: int = Field(default=2, ge=1, description="Minimum corpus frequency for a vocabulary entry")


class ArchitectureConfig(_Section):
    """Hyperparameters of the classifier graph that do not depend on data."""

    embed_dim: int = Field(default=32, ge=1, description="d: embedding width of every level")
    kernel_sizes: tuple[int, ...] = Field(default=(1, 3, 5), min_length=1, description="k_1..k_m, odd")
    conv_out: int = Field(default=32, ge=1, description="d^f: out-channels of each convolution filter")
    residual_blocks: int = Field(default=2, ge=0, description="p: residual blocks per filter")
    residual_out: int = Field(default=32, ge=1, description="d^p: out-channels of each residual block")
    pool_window: int = Field(default=3, ge=1, description="g: soft-pooling window length")
    refine_dim: int = Field(default=32, ge=1, description="Output width of the refinement layer")
    attn_dim: int = Field(default=32, ge=1, description="Shared query/key/value width")
    pool_score: Literal["dot", "linear"] = Field(
        default="dot", description="Window score: scaled dot-product or linear"
    )

    @model_validator(mode="after")
    def _check_shapes(self) -> "ArchitectureConfig":
        even = [k for k in self.kernel_sizes if k % 2 == 0 or k < 1]
        if even:
            raise ValueError(f"kernel sizes must be positive and odd, got {even}")
        if self.conv_out != self.residual_out:
            raise ValueError("conv_out and residual_out must be equal (constant-width residual blocks)")
        return self

    @property
    def channels(self) -> int:
        """m: number of convolution filters."""
        return len(self.kernel_sizes)

    @property
    def feature_width(self) -> int:
        """Width of Hw/Hs/Hd after concatenating the filter outputs."""
        return self.channels * self.residual_out


class ModelConfig(ArchitectureConfig):
    """
    Complete graph configuration: architecture plus the data-dependent sizes.

    Every parameter shape is derivable from this object alone.
    """

    token_limit: int = Field(default=256, ge=1)
    line_limit: int = Field(default=64, ge=1)
    description_limit: int = Field(default=64, ge=1)
    levels: LevelToggles = Field(default_factory=LevelToggles)
    token_vocab_size: int = Field(default=2, ge=2)
    line_vocab_size: int = Field(default=2, ge=2)
    desc_vocab_size: int = Field(default=2, ge=2)

    @classmethod
    def assemble(
        cls,
        architecture: ArchitectureConfig,
        ingest: IngestConfig,
        levels: LevelToggles,
        token_vocab_size: int,
        line_vocab_size: int,
        desc_vocab_size: int,
    ) -> "ModelConfig":
        """Combine the run-config sections with the vocabulary sizes."""
        return cls(
            **architecture.model_dump(),
            token_limit=ingest.token_limit,
            line_limit=ingest.line_limit,
            description_limit=ingest.description_limit,
            levels=levels,
            token_vocab_size=token_vocab_size,
            line_vocab_size=line_vocab_size,
            desc_vocab_size=desc_vocab_size,
        )

    @property
    def aligned_length(self) -> int:
        """nw + ns restricted to the enabled code levels."""
        return (self.token_limit if self.levels.token else 0) + (
            self.line_limit if self.levels.sentence else 0
        )

    @property
    def pooled_count(self) -> int:
        """P = ceil((nw + ns) / g)."""
        return math.ceil(self.aligned_length / self.pool_window)

    @property
    def fused_length(self) -> int:
        """n = P + nd with the description level, else P."""
        return self.pooled_count + (self.description_limit if self.levels.description else 0)


class TrainConfig(_Section):
    """Optimizer and loop settings."""

    optimizer: Literal["sgd", "adam"] = "adam"
    learning_rate: float = Field(default=1e-3, ge=0.0)
    beta1: float = Field(default=0.9, gt=0.0, lt=1.0)
    beta2: float = Field(default=0.999, gt=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    batch_size: int = Field(default=16, ge=1)
    max_epochs: int = Field(default=200, ge=0)
    early_stop_patience: int = Field(default=10, ge=1, description="Epochs without validation-F1 gain")
    seed: int = 0
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    valid_fraction: float = Field(
        default=0.0, ge=0.0, lt=1.0, description="Held-out share when no validation file is given"
    )
    workers: int = Field(default=1, ge=1, description="Threads for validation scoring")
