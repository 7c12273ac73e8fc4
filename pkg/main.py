# main.py
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from Services import settings
from cli.commands import ALL_CONTROLLERS, cmd_build_rulebase, cmd_compare, cmd_run
from controllers.strategies import CONTROLLER_ORDER
from ingest.build_rulebase import DEFAULT_OUT, DEFAULT_REPETITIONS
from scenario_io.report import SUMMARY_FORMATS


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, help="Scenario file or bundled scenario name.")
    p.add_argument("--rulebase", default=None, help="Rule-base CSV (needed by fuzzy and fuzzyreal).")
    p.add_argument("--seed", type=int, default=None, help="Override the scenario's master seed.")
    p.add_argument("--output-dir", default=None, help=f"Report directory (default ${settings.OUTPUT_DIR_ENV} or 'results').")
    p.add_argument("--segment-len", type=int, default=4, help="Periods per segment for the segmental controller.")
    p.add_argument("--format", choices=SUMMARY_FORMATS, default="json", help="Summary file format.")
    p.add_argument("--workers", type=int, default=settings.WORKERS, help="Controllers run in parallel.")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signal-bench",
        description="Single-intersection signal-timing benchmark: six controllers on one simulated day.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    # -------------------------
    # run
    # -------------------------
    run = sub.add_parser("run", help="Run one controller (or all) over a scenario.")
    _add_run_options(run)
    run.add_argument(
        "--controller",
        default="fixed",
        choices=[c.value for c in CONTROLLER_ORDER] + [ALL_CONTROLLERS],
    )
    run.set_defaults(handler=cmd_run)

    # -------------------------
    # compare
    # -------------------------
    compare = sub.add_parser("compare", help="Run all six controllers and print the comparison table.")
    _add_run_options(compare)
    compare.set_defaults(handler=cmd_compare)

    # -------------------------
    # build-rulebase
    # -------------------------
    build = sub.add_parser("build-rulebase", help="Brute-force the 625-rule fuzzy rule base.")
    build.add_argument("--reps", type=int, default=DEFAULT_REPETITIONS, help="Seeded repetitions per state.")
    build.add_argument("--seed", type=int, default=0, help="Base seed; state i uses seed + i.")
    build.add_argument("--out", default=DEFAULT_OUT, help="Output CSV path.")
    build.add_argument("--states", default=None, help="First N states, or a comma list of state indices.")
    build.add_argument("--left-pct", type=float, default=20.0, help="Left-turn share on every street.")
    build.add_argument("--right-pct", type=float, default=20.0, help="Right-turn share on every street.")
    build.add_argument("--workers", type=int, default=settings.WORKERS, help="States built in parallel.")
    build.set_defaults(handler=cmd_build_rulebase)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
