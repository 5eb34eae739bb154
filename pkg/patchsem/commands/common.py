"""
Shared command-line plumbing: config options and data preparation.
"""

import argparse
import logging
from pathlib import Path
from typing import Any

from patchsem.core.config import RunConfig, merge_overrides, parse_override
from patchsem.core.exceptions import PatchSemError
from patchsem.schemas.patch import EncodedPatch, PatchRecord, VocabSet
from patchsem.services import encode_records, fit_vocabs, load_dataset, split_dataset

logger = logging.getLogger(__name__)


class UsageError(PatchSemError):
    """Raised when a required input is given neither as a flag nor in the config."""

    pass


def require_path(value: Path | None, flag: str, key: str) -> Path:
    if value is None:
        raise UsageError(f"missing input: pass {flag} or set {key} in the config")
    return value


def add_config_options(parser: argparse.ArgumentParser) -> None:
    """--config and repeatable --set section.key=value."""
    parser.add_argument("--config", type=Path, default=None, help="TOML run configuration")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one config key (repeatable), e.g. --set model.pool_window=2",
    )


def _drop_none(values: dict[str, Any]) -> dict[str, Any]:
    cleaned: dict[str, Any] = {}
    for key, value in values.items():
        if isinstance(value, dict):
            value = _drop_none(value)
            if value:
                cleaned[key] = value
        elif value is not None:
            cleaned[key] = value
    return cleaned


def load_run_config(args: argparse.Namespace, flags: dict[str, Any] | None = None, toy: bool = False) -> RunConfig:
    """
    Effective config of a command.

    Dedicated flags (non-None entries of `flags`) win over --set, which wins
    over the environment and the config file. With `toy` and no --config the
    desk-scale preset is the base.
    """
    overrides: dict[str, Any] = {}
    for assignment in getattr(args, "overrides", []) or []:
        overrides = merge_overrides(overrides, parse_override(assignment))
    overrides = merge_overrides(overrides, _drop_none(flags or {}))
    config_file = getattr(args, "config", None)
    if toy and config_file is None:
        return RunConfig.toy(overrides)
    return RunConfig.load(config_file, overrides)


def trainable_records(records: list[PatchRecord]) -> list[PatchRecord]:
    """Records with a non-empty diff; the others are skipped with a warning."""
    kept = [record for record in records if record.diff_text.strip()]
    skipped = len(records) - len(kept)
    if skipped:
        logger.warning("Skipping %d record(s) with an empty diff", skipped)
    return kept


def prepare_training_data(
    run_config: RunConfig,
) -> tuple[VocabSet, list[EncodedPatch], list[EncodedPatch]]:
    """
    Load, split and encode the training (and validation) data.

    Vocabularies are built from the training part only.
    """
    records = trainable_records(load_dataset(require_path(run_config.paths.data, "--data", "paths.data")))
    if run_config.paths.valid is not None:
        train_records, valid_records = records, trainable_records(load_dataset(run_config.paths.valid))
    else:
        train_records, valid_records = split_dataset(
            records, run_config.train.valid_fraction, seed=run_config.train.seed
        )
    vocabs = fit_vocabs(train_records, run_config.ingest.min_freq)
    return (
        vocabs,
        encode_records(train_records, vocabs, run_config.ingest),
        encode_records(valid_records, vocabs, run_config.ingest),
    )
