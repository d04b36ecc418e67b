"""
synthal synth - batch Type-1 / Type-2 generation over a labeled dataset
"""

import argparse
from dataclasses import replace
from pathlib import Path

from ..config import BudgetSection, resolve_seed
from ..dataset import load_dataset
from ..orchestrator import ActiveLoop
from . import EXIT_OK, UsageError, add_config_arguments, load_run_config


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "synth",
        help="Generate synthetic images from every labeled training image",
        description="One synthesis pass over the whole training split (no querying)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Two Type-1 samples per image on the dataset's backgrounds
  synthal synth --preset live --dataset ./data/live --out ./synth_live

  # EndoVis style: inpainted backgrounds, Type-2 with multi-blending
  synthal synth --preset endovis --dataset ./data/endovis --out ./synth_endovis --seed 3

Output:
  <out>/synthetic/images, <out>/synthetic/masks, <out>/synthetic/manifest.jsonl
        """,
    )
    add_config_arguments(parser)
    parser.add_argument("--dataset", "-d", type=str, default=None, help="Dataset root")
    parser.add_argument("--out", "-o", type=str, required=True, help="Output directory")
    parser.set_defaults(handler=run, command_parser=parser)


def run(args) -> int:
    config = load_run_config(args)
    if not config.dataset.root:
        raise UsageError("no dataset: pass --dataset or set dataset.root in the config")
    config = replace(config, budget=BudgetSection(fraction=1.0, al_iterations=0))
    seed = resolve_seed(args.seed, config)
    out = Path(args.out)

    layout = load_dataset(config.dataset.root)
    print(f"📦 Synthesizing from {len(layout.ids('train'))} images (seed {seed})")
    report = ActiveLoop(config, layout, out, seed).bootstrap()
    print(f"✅ {report.synthetic_generated} samples written to {out / 'synthetic'}"
          + (f" ({len(report.failures)} skipped)" if report.failures else ""))
    return EXIT_OK
