# Business logic services
from .checkpoint import (
    CheckpointError,
    ChecksumMismatch,
    VersionUnsupported,
    load_checkpoint,
    save_checkpoint,
)
from .dataset import (
    DatasetIOError,
    SchemaError,
    label_counts,
    load_dataset,
    save_dataset,
    split_dataset,
)
from .diff_parser import MalformedDiff, extract_commit_message, parse_record_diff, parse_unified_diff
from .encoder import encode_patch, encode_records
from .metrics import SingleClass, auc, confusion, report
from .optimizers import AdamState, optimizer_step
from .synthetic import generate_synthetic_corpus
from .tokenizer import CodeTokenizer, default_tokenizer, tokenize_code, tokenize_lines
from .trainer import DegenerateDataset, DivergedLoss, train, write_history
from .vocab import build_vocab, fit_vocabs, normalize_line

__all__ = [
    # Ingestion
    "MalformedDiff",
    "parse_unified_diff",
    "parse_record_diff",
    "extract_commit_message",
    "CodeTokenizer",
    "default_tokenizer",
    "tokenize_code",
    "tokenize_lines",
    "build_vocab",
    "fit_vocabs",
    "normalize_line",
    "encode_patch",
    "encode_records",
    "DatasetIOError",
    "SchemaError",
    "load_dataset",
    "save_dataset",
    "split_dataset",
    "label_counts",
    "generate_synthetic_corpus",
    # Metrics
    "SingleClass",
    "auc",
    "confusion",
    "report",
    # Training
    "AdamState",
    "optimizer_step",
    "DegenerateDataset",
    "DivergedLoss",
    "train",
    "write_history",
    # Checkpoints
    "CheckpointError",
    "ChecksumMismatch",
    "VersionUnsupported",
    "save_checkpoint",
    "load_checkpoint",
]
