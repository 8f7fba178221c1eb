"""Entry point: `adapter --model <name> --classes C [--fit FILE] ...`."""

from __future__ import annotations

import argparse
import sys

from .models import NearestCentroidModel, TrainedModelStub, UniformModel
from .server import AdapterSession, serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adapter",
        description="Serve a time-series classifier over stdio line-delimited JSON",
    )
    parser.add_argument(
        "--model",
        required=True,
        choices=["uniform", "nearest-centroid", "stub"],
    )
    parser.add_argument("--classes", type=int, help="class count (uniform/stub)")
    parser.add_argument("--fit", help="UCR-style training file (nearest-centroid)")
    parser.add_argument("--temperature", type=float, default=1.0)
    parser.add_argument(
        "--corrupt-request",
        type=int,
        help="test hook: emit a non-stochastic row in the Nth predict response",
    )
    return parser


def make_session(args: argparse.Namespace) -> AdapterSession:
    if args.model == "uniform":
        if not args.classes:
            raise SystemExit("--classes is required for the uniform model")
        model = UniformModel(args.classes)
    elif args.model == "nearest-centroid":
        if not args.fit:
            raise SystemExit("--fit is required for the nearest-centroid model")
        model = NearestCentroidModel.fit(args.fit, args.temperature)
        if args.classes and args.classes != model.class_count:
            raise SystemExit(
                f"--classes {args.classes} does not match the {model.class_count} "
                "classes found in the training file"
            )
    else:
        if not args.classes:
            raise SystemExit("--classes is required for the stub model")
        model = TrainedModelStub(args.classes)
    return AdapterSession(
        model=model,
        class_count=model.class_count,
        corrupt_request=args.corrupt_request,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    serve(make_session(args))
    return 0


if __name__ == "__main__":
    sys.exit(main())
