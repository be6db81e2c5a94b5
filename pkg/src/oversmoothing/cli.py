"""Command line: ``run``, ``plot`` and ``verify``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import OverSmoothingError, ParseError, UnknownMethodError
from .harness import ExperimentConfig, format_summary, run_experiment, verify
from .plot import METRICS, emit_plot

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oversmoothing")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="depth sweep over methods and seeds")
    run.add_argument("--methods", default="all", help="comma-separated tokens or 'all'")
    run.add_argument("--depth", type=_positive, default=96)
    run.add_argument("--seeds", type=_positive, default=50)
    run.add_argument("--dim", type=_positive, default=32)
    run.add_argument("--dataset", default="karate", help="'karate' or an edge-list path")
    run.add_argument("--renormalize", action="store_true")
    run.add_argument("--jobs", type=_positive, default=1)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--summary", type=Path, help="also write the summary as JSON")

    plot = sub.add_parser("plot", help="SVG of seed-mean metric against depth")
    plot.add_argument("file", type=Path)
    plot.add_argument("--metric", choices=METRICS, default="rod")
    plot.add_argument("--methods", help="comma-separated subset")
    plot.add_argument("--out", type=Path, required=True)

    ver = sub.add_parser("verify", help="run the verification suite")
    ver.add_argument("--out", type=Path, default=Path("verify_report.json"))
    ver.add_argument("--sabotage", choices=["kron"])
    return parser


def _cmd_run(args) -> int:
    config = ExperimentConfig(args.methods, args.depth, args.seeds, args.dim, args.dataset,
                              args.renormalize, args.out, args.jobs)
    result = run_experiment(config)
    print(format_summary(result.summaries))
    if args.summary:
        payload = {m: s.to_dict() for m, s in result.summaries.items()}
        args.summary.write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _cmd_plot(args) -> int:
    methods = args.methods.split(",") if args.methods else None
    print(emit_plot(args.file, args.metric, args.out, methods))
    return EXIT_OK


def _cmd_verify(args) -> int:
    passed, payload = verify(args.out, args.sabotage)
    for check in payload["checks"]:
        print(f"{'PASS' if check['passed'] else 'FAIL'} {check['name']}")
    return EXIT_OK if passed else EXIT_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "plot": _cmd_plot, "verify": _cmd_verify}[args.command]
    try:
        return handler(args)
    except (UnknownMethodError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, OverSmoothingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
