"""
synthal metrics - DSC, IoU and near-boundary IoU of predicted masks
"""

import argparse

from ..dataset import write_json
from ..metrics import DEFAULT_BAND_WIDTH, evaluate_dirs
from . import EXIT_OK


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "metrics",
        help="Evaluate predicted masks against ground truth",
        description="Match <id>.png masks in two directories and report mDSC, mIoU and mIoU_NB",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  synthal metrics --pred ./pred --gt ./data/live/masks --band 20 --report live_metrics.json
        """,
    )
    parser.add_argument("--pred", "-p", type=str, required=True, help="Predicted mask directory")
    parser.add_argument("--gt", "-g", type=str, required=True, help="Ground-truth mask directory")
    parser.add_argument("--band", type=int, default=DEFAULT_BAND_WIDTH,
                        help="Boundary band width in pixels (even)")
    parser.add_argument("--report", "-o", type=str, default="metrics.json",
                        help="JSON report path")
    parser.add_argument("--workers", type=int, default=1, help="Worker threads")
    parser.set_defaults(handler=run, command_parser=parser)


def run(args) -> int:
    result = evaluate_dirs(args.pred, args.gt, args.band, args.workers)
    print(f"mDSC     {result.mean_dsc:.4f}")
    print(f"mIoU     {result.mean_iou:.4f}")
    print(f"mIoU_NB  {result.mean_iou_nb:.4f}")
    write_json(args.report, result.to_dict())
    print(f"✅ {len(result.per_image)} images, report written to {args.report}")
    return EXIT_OK
