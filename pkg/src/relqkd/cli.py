"""Command-line entry point: analyze | simulate | distill | verify."""

from __future__ import annotations

import argparse
import sys

from . import harness
from .errors import RelqkdError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relqkd",
        description="Relativistic QKD tradeoff analysis, simulation, and distillation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("analyze", "tabulate the closed-form delay tradeoff over a sweep"),
        ("simulate", "Monte Carlo the tradeoff against the closed forms"),
        ("distill", "run one key-distillation session"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("config", help="campaign file (key = value sections)")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", default=None, help="override the output path")
    v = sub.add_parser("verify", help="run the built-in self-check suite")
    v.add_argument("--out", default=None, help="also write the summary to this path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            summary = harness.cmd_verify(out=args.out)
            sys.stdout.write(summary.to_text())
            return 0 if summary.all_passed else 1
        spec = harness.load_campaign(args.config, seed_override=args.seed,
                                     out_override=args.out)
        if spec.mode != args.command:
            raise RelqkdError(
                f"campaign file declares mode {spec.mode!r}, invoked as {args.command!r}"
            )
        if args.command == "analyze":
            rows = harness.cmd_analyze(spec)
            if not spec.out:
                sys.stdout.write(harness.rows_to_csv(rows))
        elif args.command == "simulate":
            rows = harness.cmd_simulate(spec)
            if not spec.out:
                sys.stdout.write(harness.rows_to_csv(rows))
        else:
            transcript, report = harness.cmd_distill(spec)
            if not spec.out:
                sys.stdout.write(transcript.to_text())
                sys.stdout.write(report.to_text())
            else:
                sys.stdout.write(report.to_text())
        return 0
    except RelqkdError as exc:
        print(f"relqkd: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"relqkd: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
