"""
Synth Command - Write a synthetic labelled corpus.

Usage:
    patchsem synth --out data/synthetic.jsonl --count 32 --seed 0
"""

import argparse
from pathlib import Path

from patchsem.services import generate_synthetic_corpus, label_counts, save_dataset


def run(args: argparse.Namespace) -> int:
    records = generate_synthetic_corpus(args.count, seed=args.seed)
    save_dataset(records, args.out)
    counts = label_counts(records)
    print(f"Wrote {len(records)} patches ({counts[1]} security, {counts[0]} other) to {args.out}")
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("synth", help="Generate a synthetic patch corpus")
    parser.add_argument("--out", type=Path, required=True, help="JSONL file to write")
    parser.add_argument("--count", type=int, default=32, help="Number of patches")
    parser.add_argument("--seed", type=int, default=0, help="Generator seed")
    parser.set_defaults(handler=run)
