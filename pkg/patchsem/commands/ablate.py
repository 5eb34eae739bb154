"""
Ablate Command - Train the full model and the TL-, SL- and DL- variants on the
same data and compare them.

Usage:
    patchsem ablate --data train.jsonl [--valid valid.jsonl] [--config run.toml]
"""

import argparse
import logging
from pathlib import Path

from patchsem.core.config import RunConfig
from patchsem.models import score_records
from patchsem.schemas.metrics import MetricsReport
from patchsem.schemas.patch import EncodedPatch, VocabSet
from patchsem.services import report, train

from .common import add_config_options, load_run_config, prepare_training_data

logger = logging.getLogger(__name__)

VARIANTS: dict[str, dict[str, bool]] = {
    "full": {"token": True, "sentence": True, "description": True},
    "TL-": {"token": False, "sentence": True, "description": True},
    "SL-": {"token": True, "sentence": False, "description": True},
    "DL-": {"token": True, "sentence": True, "description": False},
}


def run_variant(
    run_config: RunConfig,
    levels: dict[str, bool],
    vocabs: VocabSet,
    train_set: list[EncodedPatch],
    valid_set: list[EncodedPatch],
) -> tuple[int, MetricsReport]:
    """Train one variant; returns its parameter count and validation report."""
    variant_config = run_config.model_copy(update={"levels": run_config.levels.model_copy(update=levels)})
    model_config = variant_config.model_config_for(len(vocabs.token), len(vocabs.line), len(vocabs.description))
    params, _ = train(train_set, valid_set, model_config, variant_config.train)
    evaluation_set = valid_set or train_set
    scores = score_records(params, evaluation_set, workers=variant_config.train.workers)
    return params.parameter_count, report(
        scores, [enc.label for enc in evaluation_set], variant_config.train.threshold
    )


def format_row(name: str, count: int, metrics: MetricsReport) -> str:
    auc = "n/a" if metrics.auc is None else f"{metrics.auc * 100:.2f}"
    return (
        f"{name:<5} {count:>9} {auc:>7} {metrics.f1 * 100:>7.2f} {metrics.recall_pos * 100:>8.2f} "
        f"{metrics.recall_neg * 100:>8.2f} {metrics.tpr * 100:>7.2f}"
    )


def run(args: argparse.Namespace) -> int:
    run_config = load_run_config(
        args,
        {"paths": {"data": args.data, "valid": args.valid}, "train": {"seed": args.seed}},
    )
    vocabs, train_set, valid_set = prepare_training_data(run_config)

    rows = []
    for name, levels in VARIANTS.items():
        logger.info("Training the %s variant", name)
        count, metrics = run_variant(run_config, levels, vocabs, train_set, valid_set)
        rows.append(format_row(name, count, metrics))

    print(f"{'model':<5} {'params':>9} {'AUC':>7} {'F1':>7} {'Recall+':>8} {'Recall-':>8} {'TPR':>7}")
    for row in rows:
        print(row)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("ablate", help="Compare the full model with its single-level ablations")
    parser.add_argument("--data", type=Path, default=None, help="Training JSONL dataset")
    parser.add_argument("--valid", type=Path, default=None, help="Validation JSONL dataset")
    parser.add_argument("--seed", type=int, default=None, help="Initialization and shuffle seed")
    add_config_options(parser)
    parser.set_defaults(handler=run)
