"""
Eval Command - Score a dataset with a frozen checkpoint.

Usage:
    patchsem eval --model model.psem --data test.jsonl [--report report.json] [--workers 4]
"""

import argparse
import json
import logging
from pathlib import Path

from patchsem.models import score_records
from patchsem.services import encode_records, load_checkpoint, load_dataset, report

logger = logging.getLogger(__name__)


def run(args: argparse.Namespace) -> int:
    params, run_config, vocabs = load_checkpoint(args.model)
    records = load_dataset(args.data)
    encoded = encode_records(records, vocabs, run_config.ingest)

    threshold = args.threshold if args.threshold is not None else run_config.train.threshold
    workers = args.workers if args.workers is not None else run_config.train.workers
    scores = score_records(params, encoded, workers=workers)
    metrics = report(scores, [record.label for record in records], threshold)

    print(f"{len(records)} patches scored with the {run_config.levels.variant} model")
    print(metrics.format_table())
    if args.report is not None:
        payload = {
            "config": json.loads(run_config.echo()),
            "metrics": metrics.to_record(),
            "scores": [{"id": record.id, "score": score} for record, score in zip(records, scores)],
        }
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info("Wrote metrics report to %s", args.report)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate a checkpoint on a labelled dataset")
    parser.add_argument("--model", type=Path, required=True, help="Checkpoint file")
    parser.add_argument("--data", type=Path, required=True, help="Labelled JSONL dataset")
    parser.add_argument("--report", type=Path, default=None, help="Also write the metrics as JSON")
    parser.add_argument("--threshold", type=float, default=None, help="Decision threshold (default: from checkpoint)")
    parser.add_argument("--workers", type=int, default=None, help="Scoring threads")
    parser.set_defaults(handler=run)
