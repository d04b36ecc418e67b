"""
synthal loop - full active-learning run driven by a RunConfig
"""

import argparse
from dataclasses import replace
from pathlib import Path

from ..config import resolve_seed
from ..dataset import load_dataset
from ..orchestrator import ActiveLoop
from . import EXIT_OK, UsageError, add_config_arguments, load_run_config


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "loop",
        help="Run the active-learning loop end to end",
        description="Train, query, reveal and synthesize until the labeling budget is spent",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Live preset, 10% budget, mock trainer
  synthal loop --preset live --dataset ./data/live --budget 0.10 --seed 7

  # Everything from a config file
  synthal loop --config runs/live.yaml --run-dir runs/live_10
        """,
    )
    add_config_arguments(parser)
    parser.add_argument("--dataset", "-d", type=str, default=None,
                        help="Dataset root (overrides dataset.root)")
    parser.add_argument("--budget", type=float, default=None,
                        help="Fraction of training images to label, in (0, 1]")
    parser.add_argument("--run-dir", "-o", type=str, default=None,
                        help="Output directory (overrides run.run_dir)")
    parser.set_defaults(handler=run, command_parser=parser)


def run(args) -> int:
    config = load_run_config(args)
    if args.budget is not None:
        config = replace(config, budget=replace(config.budget, fraction=args.budget))
    if not config.dataset.root:
        raise UsageError("no dataset: pass --dataset or set dataset.root in the config")
    seed = resolve_seed(args.seed, config)
    run_dir = Path(args.run_dir or config.run.run_dir)

    layout = load_dataset(config.dataset.root)
    active = ActiveLoop(config, layout, run_dir, seed)
    schedule = active.schedule
    print(f"📦 {len(layout.ids('train'))} training images, budget {schedule.total_budget} "
          f"({schedule.initial_random} random + {list(schedule.per_iteration)} queried), seed {seed}")

    for report in active.run():
        print(f"   iteration {report.iteration}: {report.labeled} labeled, "
              f"{report.synthetic_generated} synthetic (+{report.backgrounds_added} backgrounds)"
              + (f", {len(report.failures)} skipped" if report.failures else ""))
    print(f"✅ Run written to {run_dir}")
    return EXIT_OK
