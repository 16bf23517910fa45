"""Command-line entry point.

    equires <command> (--scenario FILE | --catalogue NAME)
            [--max-degree D] [--window A,B] [--format json|csv|text] [--out PATH]

Exit codes: 0 ok, 1 computation mismatch, 2 validation failure, 3 input error.
EQUIRES_OUT_DIR, if set, is the default directory for --out paths.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .catalogue import CATALOGUE_NAMES, generate_catalogue
from .chain_engine import ChainError
from .group_data import GroupDataError
from .scenarios import COMMANDS, ScenarioError, format_report, parse_scenario, run
from .strat_model import ResolutionError


def _parse_window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise ScenarioError("--window", "expected two integers A,B") from None
    return lo, hi


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="equires",
        description="Exact equivariant cohomology, K-theory and Chern character "
                    "over resolved group-action quotients.",
    )
    parser.add_argument("command", choices=COMMANDS)
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", metavar="FILE", help="scenario file to run")
    src.add_argument("--catalogue", metavar="NAME", choices=CATALOGUE_NAMES,
                     help="built-in scenario: " + ", ".join(CATALOGUE_NAMES))
    parser.add_argument("--max-degree", type=int, default=None,
                        help="override the truncation degree")
    parser.add_argument("--window", type=str, default=None,
                        help="character window A,B (use --window=-2,2 for negatives)")
    parser.add_argument("--format", choices=("json", "csv", "text"), default="text")
    parser.add_argument("--out", metavar="PATH", default=None,
                        help="write the report here instead of stdout")
    args = parser.parse_args(argv)

    try:
        if args.scenario:
            try:
                text = Path(args.scenario).read_text()
            except OSError as exc:
                print(f"equires: cannot read scenario: {exc}", file=sys.stderr)
                return 3
            scenario = parse_scenario(text)
        else:
            scenario = generate_catalogue(args.catalogue)
        window = _parse_window(args.window) if args.window else None
        report = run(scenario, args.command, max_degree=args.max_degree, window=window)
    except (ScenarioError, ResolutionError, ChainError, GroupDataError) as exc:
        print(f"equires: {exc}", file=sys.stderr)
        return 3

    rendered = format_report(report, args.format)
    if args.out:
        out = Path(args.out)
        if not out.is_absolute() and os.environ.get("EQUIRES_OUT_DIR"):
            out = Path(os.environ["EQUIRES_OUT_DIR"]) / out
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(rendered)
    else:
        sys.stdout.write(rendered)
    if report.elapsed and os.environ.get("EQUIRES_VERBOSE"):
        print(f"elapsed: {report.elapsed:.3f}s", file=sys.stderr)
    return report.status


if __name__ == "__main__":
    sys.exit(main())
