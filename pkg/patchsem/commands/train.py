"""
Train Command - Fit a model on a JSONL dataset and write a checkpoint.

Usage:
    patchsem train --data train.jsonl [--valid valid.jsonl] --out model.psem
"""

import argparse
import logging
from pathlib import Path

from patchsem.models import score_records
from patchsem.services import report, save_checkpoint, train, write_history

from .common import add_config_options, load_run_config, prepare_training_data, require_path

logger = logging.getLogger(__name__)


def history_path_for(checkpoint: Path) -> Path:
    """model.psem -> model.history.jsonl"""
    return checkpoint.with_name(f"{checkpoint.stem}.history.jsonl")


def run(args: argparse.Namespace) -> int:
    run_config = load_run_config(
        args,
        {
            "paths": {"data": args.data, "valid": args.valid, "out": args.out},
            "train": {"seed": args.seed, "max_epochs": args.max_epochs},
        },
    )
    out = require_path(run_config.paths.out, "--out", "paths.out")
    vocabs, train_set, valid_set = prepare_training_data(run_config)
    model_config = run_config.model_config_for(len(vocabs.token), len(vocabs.line), len(vocabs.description))
    logger.info(
        "Training %s variant on %d patches (%d validation)",
        run_config.levels.variant,
        len(train_set),
        len(valid_set),
    )

    params, history = train(train_set, valid_set, model_config, run_config.train)
    save_checkpoint(out, params, run_config, vocabs)
    write_history(args.history or history_path_for(out), history, run_config.echo())

    evaluation_set = valid_set or train_set
    scores = score_records(params, evaluation_set, workers=run_config.train.workers)
    final = report(scores, [enc.label for enc in evaluation_set], run_config.train.threshold)
    print(f"Validation ({'held-out' if valid_set else 'training set'}), best epoch {history.best_epoch}:")
    print(final.format_table())
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train", help="Train a classifier and write a checkpoint")
    parser.add_argument("--data", type=Path, default=None, help="Training JSONL dataset")
    parser.add_argument("--valid", type=Path, default=None, help="Validation JSONL dataset")
    parser.add_argument("--out", type=Path, default=None, help="Checkpoint file to write")
    parser.add_argument("--history", type=Path, default=None, help="History JSONL (default: next to --out)")
    parser.add_argument("--seed", type=int, default=None, help="Initialization and shuffle seed")
    parser.add_argument("--max-epochs", type=int, default=None, help="Epoch budget (0 = save initial params)")
    add_config_options(parser)
    parser.set_defaults(handler=run)
