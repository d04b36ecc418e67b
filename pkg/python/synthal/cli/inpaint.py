"""
synthal inpaint - build a background pool from labeled images
"""

import argparse
import logging
from pathlib import Path

from ..config import resolve_seed
from ..dataset import load_dataset
from ..errors import NoBackgroundAvailable
from ..inpaint import BackgroundPool, acquire_background
from ..rng import derive_seed
from . import EXIT_OK, UsageError, add_config_arguments, load_run_config

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "inpaint",
        help="Remove instruments from labeled images to build a background pool",
        description="Self-inpaint (flip/rotate) each training image, falling back to external inpainting",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  synthal inpaint --preset endovis --dataset ./data/endovis --out ./backgrounds

Output:
  <out>/<id>.png for every inpainted frame and <out>/manifest.jsonl
        """,
    )
    add_config_arguments(parser)
    parser.add_argument("--dataset", "-d", type=str, default=None, help="Dataset root")
    parser.add_argument("--out", "-o", type=str, required=True, help="Background pool directory")
    parser.set_defaults(handler=run, command_parser=parser)


def run(args) -> int:
    config = load_run_config(args)
    if not config.dataset.root:
        raise UsageError("no dataset: pass --dataset or set dataset.root in the config")
    seed = resolve_seed(args.seed, config)
    cfg = config.synthesis
    layout = load_dataset(config.dataset.root)

    pool = BackgroundPool()
    if cfg.external_backgrounds:
        for path in layout.backgrounds:
            pool.add_external(path)
    externals = len(pool)

    skipped = 0
    for image_id in layout.ids("train"):
        try:
            acquire_background(layout.load(image_id), pool, cfg,
                               derive_seed(seed, "inpaint", image_id))
        except NoBackgroundAvailable as e:
            logger.warning("%s", e)
            skipped += 1

    pool.save(Path(args.out))
    print(f"✅ {len(pool) - externals} inpainted backgrounds written to {args.out}"
          + (f" ({skipped} images had no usable background)" if skipped else ""))
    return EXIT_OK
