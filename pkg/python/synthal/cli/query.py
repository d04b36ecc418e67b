"""
synthal query - score probability stacks and emit the top-n list
"""

import argparse
from pathlib import Path

from ..config import resolve_seed
from ..dataset import write_json
from ..query import AGGREGATORS, STRATEGIES, score_stacks, select_query_batch, select_random
from ..rng import derive_rng
from ..stackfile import SUFFIX
from . import EXIT_OK, UsageError


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "query",
        help="Select the most informative images from committee stacks",
        description="Score <id>.pmap stacks and print the selected ids by descending score",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  synthal query --stacks runs/live/stacks/iter_01 --n 66 --strategy bald
  synthal query --stacks ./stacks --n 10 --strategy entropy --aggregator top_fraction --top-fraction 0.05
        """,
    )
    parser.add_argument("--stacks", "-s", type=str, required=True, help="Directory of .pmap files")
    parser.add_argument("--n", type=int, required=True, help="Number of images to select")
    parser.add_argument("--strategy", choices=STRATEGIES, default="bald")
    parser.add_argument("--aggregator", choices=AGGREGATORS, default="mean")
    parser.add_argument("--top-fraction", type=float, default=0.1,
                        help="Pixel fraction for the top_fraction aggregator")
    parser.add_argument("--seed", type=int, default=None, help="Seed for the random strategy")
    parser.add_argument("--workers", type=int, default=1, help="Worker threads")
    parser.add_argument("--out", "-o", type=str, default=None, help="Write the query list as JSON")
    parser.set_defaults(handler=run, command_parser=parser)


def run(args) -> int:
    directory = Path(args.stacks)
    if not directory.is_dir():
        raise UsageError(f"stack directory not found: {directory}")
    stacks = {p.name[:-len(SUFFIX)]: p for p in sorted(directory.glob(f"*{SUFFIX}"))}

    if args.strategy == "random":
        rng = derive_rng(resolve_seed(args.seed), "query")
        rows = [(i, None) for i in select_random(stacks, args.n, rng)]
    else:
        scores = score_stacks(stacks, args.strategy, args.aggregator, args.top_fraction,
                              args.workers)
        by_id = {s.image_id: s.score for s in scores}
        rows = [(i, by_id[i]) for i in select_query_batch(scores, args.n)]

    for image_id, score in rows:
        print(image_id if score is None else f"{image_id}\t{score:.6f}")
    if args.out:
        write_json(args.out, {
            "strategy": args.strategy,
            "aggregator": args.aggregator,
            "n": args.n,
            "selected": [{"id": i, "score": s} for i, s in rows],
        })
    return EXIT_OK
