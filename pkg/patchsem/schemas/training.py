"""
Pydantic schemas for training history.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .metrics import MetricsReport


class EpochRecord(BaseModel):
    """One completed epoch."""

    model_config = ConfigDict(frozen=True)

    epoch: int = Field(..., ge=1)
    mean_loss: float = Field(..., ge=0.0)
    best_loss: float = Field(..., ge=0.0, description="Lowest mean loss so far")
    best_f1: float = Field(..., ge=0.0, le=1.0, description="Highest validation F1 so far")
    validation: MetricsReport
    seconds: float = Field(..., ge=0.0)


class TrainHistory(BaseModel):
    """Per-epoch records of a training run."""

    epochs: list[EpochRecord] = Field(default_factory=list)
    best_epoch: int | None = Field(None, description="Epoch whose parameters were returned")
    stopped_early: bool = False

    @model_validator(mode="after")
    def _monotone(self) -> "TrainHistory":
        indices = [record.epoch for record in self.epochs]
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError("epoch indices must be 1, 2, ... in order")
        return self

    @property
    def losses(self) -> list[float]:
        return [record.mean_loss for record in self.epochs]
