"""
Predict Command - Score a single .diff/.patch file.

Usage:
    patchsem predict --model model.psem --patch fix.patch [--message fix.msg]
    patchsem predict --model model.psem --patch 0001-fix.patch --message-from-header
"""

import argparse
import logging
from pathlib import Path

from patchsem.models import score_records
from patchsem.schemas.patch import PatchRecord
from patchsem.services import (
    DatasetIOError,
    encode_patch,
    extract_commit_message,
    load_checkpoint,
    parse_unified_diff,
)

logger = logging.getLogger(__name__)

SECURITY = "SECURITY"
NON_SECURITY = "NON-SECURITY"


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8", errors="replace")
    except OSError as e:
        raise DatasetIOError(f"Cannot read {path}: {e}") from e


def verdict(score: float, threshold: float) -> str:
    return SECURITY if score >= threshold else NON_SECURITY


def run(args: argparse.Namespace) -> int:
    params, run_config, vocabs = load_checkpoint(args.model)
    patch_text = _read_text(args.patch)
    hunks = parse_unified_diff(patch_text)

    if args.message is not None:
        message = _read_text(args.message)
    elif args.message_from_header:
        message = extract_commit_message(patch_text)
    else:
        message = ""
    if not message:
        logger.info("No commit message given; the description stream is all padding")

    record = PatchRecord(id=args.patch.stem, diff=patch_text, message=message, label=0)
    encoded = encode_patch(record, hunks, vocabs.token, vocabs.line, vocabs.description, run_config.ingest)
    (score,) = score_records(params, [encoded])

    threshold = args.threshold if args.threshold is not None else run_config.train.threshold
    print(f"{score:.6f} {verdict(score, threshold)}")
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("predict", help="Score one patch file")
    parser.add_argument("--model", type=Path, required=True, help="Checkpoint file")
    parser.add_argument("--patch", type=Path, required=True, help="Unified diff (.diff / .patch)")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--message", type=Path, default=None, help="Commit message file (.msg)")
    source.add_argument(
        "--message-from-header",
        action="store_true",
        help="Read the commit message from git format-patch / git show headers",
    )
    parser.add_argument("--threshold", type=float, default=None, help="Decision threshold (default: from checkpoint)")
    parser.set_defaults(handler=run)
