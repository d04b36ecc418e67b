"""
synthal validate - dataset lint
"""

import argparse

from ..dataset import load_dataset
from ..errors import DatasetError
from . import EXIT_DATA, EXIT_OK


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "validate",
        help="Check a dataset layout",
        description="Validate manifest, image/mask pairs and backgrounds of a dataset root",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  synthal validate --dataset ./data/endovis

Checks Performed:
  ✓ manifest.jsonl present, ids unique
  ✓ referenced images and masks exist
  ✓ masks contain only 0 and 255
  ✓ image and mask sizes agree, one frame size per dataset
        """,
    )
    parser.add_argument("--dataset", "-d", type=str, required=True, help="Dataset root")
    parser.set_defaults(handler=run, command_parser=parser)


def run(args) -> int:
    print(f"🔍 Validating: {args.dataset}")
    try:
        layout = load_dataset(args.dataset)
    except DatasetError as e:
        print(f"❌ Dataset is invalid ({len(e.violations)} problems)")
        for violation in e.violations:
            print(f"   - {violation}")
        if not e.violations:
            print(f"   - {e}")
        return EXIT_DATA

    height, width = layout.frame
    print(f"✅ {len(layout.ids('train'))} train / {len(layout.ids('test'))} test images, "
          f"{len(layout.backgrounds)} backgrounds, frame {width}x{height}")
    return EXIT_OK
