"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 a check or gate failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import KINDS, MIN_SAMPLES, ConfigError, default_config, load_config
from .experiments import run_experiment
from .report import to_csv, to_json

EXIT_OK, EXIT_CONFIG, EXIT_GATE = 0, 1, 2

HELP = {
    "al-integrate": "integral of f over a word map (SU2 commutator by default)",
    "restrict": "restricted integral along a shrinking schedule, extrapolated to zero",
    "hausdorff": "tube-volume ratios and their extrapolated Hausdorff limit",
    "tube": "tube volumes of a Euclidean set along a delta schedule",
    "shape-demo": "ball versus cube thickening of two joined segments",
    "support-tail": "cylinder-measure bounds for chains of independent loops",
    "consistency": "compare two word-map presentations of the same loops",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for failed checks here
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _samples(text: str) -> int:
    n = int(text)
    if n < MIN_SAMPLES:
        raise argparse.ArgumentTypeError(f"need at least {MIN_SAMPLES} samples")
    return n


def _seed(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return n


def _add_common(p: argparse.ArgumentParser, config_required: bool) -> None:
    p.add_argument("--config", required=config_required, help="experiment configuration file")
    p.add_argument("--seed", type=_seed, help="override the configured seed")
    p.add_argument("--samples", type=_samples, help="override the configured sample count")
    p.add_argument("--out", help="report file (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), help="report format (default csv)")
    p.add_argument("--summary", help="also write the JSON summary to this file")
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alrestrict", description="Haar-measure loop experiments and thickening limits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_common(sub.add_parser("run", help="run the experiment named in a config file"), True)
    for kind in KINDS:
        _add_common(sub.add_parser(kind, help=HELP[kind]), False)
    return parser


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG

    kind = None if args.command == "run" else args.command
    try:
        cfg = load_config(args.config, kind) if args.config else default_config(kind)
        cfg = cfg.with_overrides(seed=args.seed, samples=args.samples, out=args.out,
                                 format=args.format, summary=args.summary)
        outcome = run_experiment(cfg, timing=args.timing)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    json_text = to_json(outcome.rows, outcome.summary, outcome.checks)
    try:
        _write(cfg.out, to_csv(outcome.rows) if cfg.format == "csv" else json_text)
        if cfg.summary:
            _write(cfg.summary, json_text)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    failed = [name for name, ok in outcome.checks.items() if not ok]
    for name, ok in outcome.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return EXIT_GATE if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
