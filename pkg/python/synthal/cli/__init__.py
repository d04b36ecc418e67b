"""synthal command-line tools.

Exit codes: 0 success, 1 usage error, 2 data or runtime error.
"""

import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from ..config import RunConfig, load_config, preset
from ..errors import SynthALError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    """Bad command-line usage detected after parsing"""


class SynthALArgumentParser(argparse.ArgumentParser):
    """Usage errors print the full help and exit with status 1 (not argparse's 2)"""

    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def add_config_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", "-c", type=str, default=None,
                        help="YAML run configuration")
    parser.add_argument("--preset", choices=["live", "cadaver", "endovis"], default=None,
                        help="Start from a dataset preset (file keys override it)")
    parser.add_argument("--seed", type=int, default=None,
                        help="Master seed (overrides SYNTHAL_SEED and run.seed)")
    parser.add_argument("--workers", type=int, default=None,
                        help="Worker threads for per-image steps")


def load_run_config(args) -> RunConfig:
    """Config from --config / --preset, with --dataset and --workers applied"""
    if args.config:
        config = load_config(args.config, args.preset)
    elif args.preset:
        config = preset(args.preset)
    else:
        config = RunConfig()
    if getattr(args, "dataset", None):
        config = replace(config, dataset=replace(config.dataset, root=args.dataset))
    if getattr(args, "workers", None):
        config = replace(config, run=replace(config.run, workers=args.workers))
    return config


def setup_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    from . import inpaint, loop, metrics, mock_train, query, synth, validate

    parser = SynthALArgumentParser(
        prog="synthal",
        description="Synthetic instrument images for active learning in surgical segmentation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Check a dataset layout
  synthal validate --dataset ./data/live

  # Full mock-mode run at a 10% budget
  synthal loop --preset live --dataset ./data/live --budget 0.10 --seed 7

  # Evaluate predicted masks
  synthal metrics --pred ./pred --gt ./data/live/masks --band 20
        """,
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", metavar="command",
                                       parser_class=SynthALArgumentParser)
    subparsers.required = True
    for module in (synth, inpaint, query, metrics, loop, mock_train, validate):
        module.add_parser(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.handler(args)
    except UsageError as e:
        getattr(args, "command_parser", parser).print_help(sys.stderr)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except SynthALError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_DATA


__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_USAGE", "EXIT_DATA"]
