"""
PatchSEM - Command-line entry point.

Subcommands: train, eval, predict, gradcheck, ablate, synth.
Exit codes: 0 ok, 1 input/data/config error, 2 verification failure.

Run with: uv run patchsem --help
"""

import argparse
import logging
import sys

from pydantic import ValidationError

from patchsem import __version__
from patchsem.commands import (
    register_ablate,
    register_eval,
    register_gradcheck,
    register_predict,
    register_synth,
    register_train,
)
from patchsem.core.exceptions import PatchSemError
from patchsem.core.logging import configure_logging

logger = logging.getLogger("patchsem")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchsem",
        description="Multilevel semantic embedding classifier for security patch detection",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    # Model lifecycle
    register_train(subparsers)
    register_eval(subparsers)
    register_predict(subparsers)

    # Verification and experiments
    register_gradcheck(subparsers)
    register_ablate(subparsers)
    register_synth(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        return args.handler(args)
    except ValidationError as e:
        logger.error("Invalid configuration or input:\n%s", e)
        return 1
    except PatchSemError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
