# Pydantic schemas - Export all schemas for easy imports
from .config import (
    ArchitectureConfig,
    IngestConfig,
    LevelToggles,
    ModelConfig,
    TrainConfig,
)
from .metrics import MetricsReport
from .patch import (
    PAD_ID,
    UNK_ID,
    DiffHunks,
    EncodedPatch,
    PatchRecord,
    Vocab,
    VocabSet,
)
from .training import EpochRecord, TrainHistory

__all__ = [
    # Config
    "ArchitectureConfig",
    "IngestConfig",
    "LevelToggles",
    "ModelConfig",
    "TrainConfig",
    # Patch
    "PAD_ID",
    "UNK_ID",
    "DiffHunks",
    "EncodedPatch",
    "PatchRecord",
    "Vocab",
    "VocabSet",
    # Metrics
    "MetricsReport",
    # Training
    "EpochRecord",
    "TrainHistory",
]
