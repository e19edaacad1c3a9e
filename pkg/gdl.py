#!/usr/bin/env python3
"""
gdl - Gabor Duality Lab command line
====================================

    gdl <command> --in problem.json [--out result.json] [--seed N] [--tolerance X]

Results are JSON on standard output (or in --out); log messages go to
standard error.

Exit codes:
    0  computed (also when a verification verdict is "fail")
    2  invalid input (malformed JSON, bad orders, shapes, weights, ...)
    3  numeric failure (e.g. a non-frame passed to dual)
"""

import argparse
import logging
import pathlib
import sys

import config

# BLAS reads its thread variables when numpy is first imported
config.apply_thread_limit()

from lattice.errors import GdlError, InvalidInputError  # noqa: E402
from interface.cli_io import TASKS, dumps, load_problem, run  # noqa: E402

logger = logging.getLogger("gdl")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='gdl',
        description='Gabor analysis and Heisenberg module duality over finite abelian groups')
    parser.add_argument('command', choices=TASKS,
                        help='Task to run')
    parser.add_argument('--in', dest='input', required=True,
                        help='Problem document (JSON); "-" reads standard input')
    parser.add_argument('--out', dest='output',
                        help='Write the result document here instead of standard output')
    parser.add_argument('--seed', type=int, default=None,
                        help='Seed for generated windows and signals')
    parser.add_argument('--tolerance', type=float, default=None,
                        help='Relative tolerance for frame / Riesz verdicts')
    parser.add_argument('--verbose', action='store_true',
                        help='Debug logging on standard error')
    parser.add_argument('--png', action='store_true',
                        help='Also render spectrograms as PNG')
    return parser


def _read_input(source: str) -> str:
    if source == '-':
        return sys.stdin.read()
    try:
        return pathlib.Path(source).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {source}: {exc}") from exc


def main(argv=None) -> int:
    """Main execution."""
    args = build_parser().parse_args(argv)
    config.setup_logging(logging.DEBUG if args.verbose else None)

    try:
        problem = load_problem(_read_input(args.input))
        result = run(args.command, problem, seed=args.seed, tolerance=args.tolerance, png=args.png)
        text = dumps(result.to_dict())
        if args.output:
            try:
                pathlib.Path(args.output).write_text(text + '\n')
            except OSError as exc:
                raise InvalidInputError(f"cannot write {args.output}: {exc}") from exc
            logger.info(f"result written to {args.output}")
        else:
            sys.stdout.write(text + '\n')
            sys.stdout.flush()
    except GdlError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    except Exception as exc:
        logger.error(f"internal failure: {type(exc).__name__}: {exc}")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
