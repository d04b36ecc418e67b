"""
synthal mock-train - trainer-adapter compatible mock predictor

Usable as the external trainer command::

    synthal mock-train --manifest {manifest_path} --output-dir {output_dir} --seed {seed} --T {T}
"""

import argparse

from ..trainers import MockTrainer, read_training_manifest
from . import EXIT_OK


def add_parser(subparsers):
    parser = subparsers.add_parser(
        "mock-train",
        help="Write mock committee stacks for a training manifest",
        description="Ignore the training set and write one .pmap per predict entry",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--manifest", "-m", type=str, required=True, help="Training manifest JSON")
    parser.add_argument("--output-dir", "-o", type=str, required=True, help="Stack output directory")
    parser.add_argument("--seed", type=int, default=0, help="Seed for member noise")
    parser.add_argument("--T", dest="committee_size", type=int, default=4,
                        help="Committee size")
    parser.add_argument("--gain", type=float, default=6.0, help="Logit gain of the heuristic")
    parser.add_argument("--noise", type=float, default=0.5, help="Per-member logit noise")
    parser.add_argument("--workers", type=int, default=1, help="Worker threads")
    parser.set_defaults(handler=run, command_parser=parser)


def run(args) -> int:
    trainer = MockTrainer(committee_size=args.committee_size, gain=args.gain,
                          noise=args.noise, workers=args.workers)
    trainer.train_and_predict(args.manifest, args.output_dir, args.seed)
    count = len(read_training_manifest(args.manifest)["predict"])
    print(f"✅ {count} stacks (T={args.committee_size}) written to {args.output_dir}")
    return EXIT_OK
