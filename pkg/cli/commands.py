# ---------------------------------------------------
# cli/commands.py
# ---------------------------------------------------
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import wraps
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

from Services import settings
from Services.benchmark_pipeline import build_day_stream, run_controller
from Services.errors import ConfigurationError, RuleBaseError, SignalBenchError
from Services.logger_config import logger
from controllers.strategies import CONTROLLER_ORDER, RULEBASE_CONTROLLERS, ControllerName, parse_controller
from fuzzy.rulebase import RuleBase, load_rulebase, save_rulebase
from ingest.build_rulebase import build_rulebase, save_spread
from scenario_io.report import RunReport, comparison_table, export_report
from scenario_io.scenario import Scenario
from scenario_io.scenario_parser import load_scenario
from simcore.arrivals import ArrivalStream, TurnFractions
from simcore.intersection import IntersectionConfig

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2

ALL_CONTROLLERS = "all"

Handler = Callable[[argparse.Namespace], int]


# ---------------------------------------------------
# Exit-code discipline
# ---------------------------------------------------
def guarded(fn: Handler) -> Handler:
    @wraps(fn)
    def wrapper(args: argparse.Namespace) -> int:
        try:
            return fn(args)
        except SignalBenchError as e:
            logger.error(f"{fn.__name__} failed: {e}", exc_info=True)
            return EXIT_VALIDATION
        except OSError as e:
            logger.error(f"{fn.__name__} could not read or write a file: {e}", exc_info=True)
            return EXIT_RUNTIME
        except Exception as e:
            logger.error(f"{fn.__name__} crashed: {e}", exc_info=True)
            return EXIT_RUNTIME

    return wrapper


# ---------------------------------------------------
# Shared helpers
# ---------------------------------------------------
def selected_controllers(selector: str) -> List[ControllerName]:
    if selector.strip().lower() == ALL_CONTROLLERS:
        return list(CONTROLLER_ORDER)
    return [parse_controller(selector)]


def _rulebase_for(
    controllers: Sequence[ControllerName], path: Optional[str], config: IntersectionConfig
) -> Optional[RuleBase]:
    needs = [c.value for c in controllers if c in RULEBASE_CONTROLLERS]
    if not needs:
        return None
    path = path or settings.DEFAULT_RULEBASE
    if not path:
        raise RuleBaseError(
            f"Controller(s) {', '.join(needs)} need a rule base: pass --rulebase PATH "
            "(build one with the build-rulebase command)."
        )
    return load_rulebase(path, config=config)


def _run_job(
    job: Tuple[Scenario, str, IntersectionConfig, Optional[RuleBase], int, int, ArrivalStream]
) -> RunReport:
    scenario, name, config, rulebase, seed, segment_len, stream = job
    return run_controller(
        scenario, name, config=config, rulebase=rulebase, seed=seed, segment_len=segment_len, stream=stream
    )


def run_all(
    scenario: Scenario,
    controllers: Sequence[ControllerName],
    rulebase: Optional[RuleBase] = None,
    seed: Optional[int] = None,
    segment_len: int = 4,
    workers: int = 1,
    config: Optional[IntersectionConfig] = None,
) -> List[RunReport]:
    """Every controller replays the same day stream; reports come back in controller order."""
    config = config or IntersectionConfig(period_s=scenario.period_s)
    seed = scenario.master_seed if seed is None else seed
    stream = build_day_stream(scenario, config, seed)
    jobs = [(scenario, c.value, config, rulebase, seed, segment_len, stream) for c in controllers]

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(job) for job in jobs]


def _execute(args: argparse.Namespace, selector: str) -> List[RunReport]:
    if args.segment_len < 1:
        raise ConfigurationError(f"--segment-len must be >= 1, got {args.segment_len}.")
    scenario = load_scenario(args.scenario)
    config = IntersectionConfig(period_s=scenario.period_s)
    controllers = selected_controllers(selector)
    rulebase = _rulebase_for(controllers, args.rulebase, config)

    reports = run_all(
        scenario,
        controllers,
        rulebase=rulebase,
        seed=args.seed,
        segment_len=args.segment_len,
        workers=args.workers,
        config=config,
    )
    out_dir = Path(args.output_dir or settings.OUTPUT_DIR)
    written = export_report(reports, out_dir, fmt=args.format)
    logger.info(f"Summary: {written['summary']}; series: {written['series']}")
    return reports


# ---------------------------------------------------
# Commands
# ---------------------------------------------------
@guarded
def cmd_run(args: argparse.Namespace) -> int:
    _execute(args, args.controller)
    return EXIT_OK


@guarded
def cmd_compare(args: argparse.Namespace) -> int:
    reports = _execute(args, ALL_CONTROLLERS)
    sys.stdout.write(comparison_table(reports) + "\n")
    return EXIT_OK


def parse_states(raw: Optional[str]) -> Union[None, int, List[int]]:
    if raw is None:
        return None
    raw = raw.strip()
    if "," in raw:
        return [int(s) for s in raw.split(",") if s.strip()]
    return int(raw)


@guarded
def cmd_build_rulebase(args: argparse.Namespace) -> int:
    try:
        states = parse_states(args.states)
        turns = TurnFractions(left_pct=args.left_pct, right_pct=args.right_pct)
        result = build_rulebase(
            IntersectionConfig(),
            repetitions=args.reps,
            base_seed=args.seed,
            states=states,
            workers=args.workers,
            turns=turns,
        )
    except ValueError as e:
        raise ConfigurationError(str(e)) from None

    out = save_rulebase(result.rulebase, args.out)
    spread = save_spread(result, out)

    worst = min(result.outcomes, key=lambda o: o.within_tolerance_pct)
    logger.info(
        f"Wrote {len(result.rulebase.entries)} rules to {out} (spread: {spread}); "
        f"overall {result.spread_ok_pct:.1f}% within +/-2 s of the modal green, "
        f"worst state {worst.key} at {worst.within_tolerance_pct:.1f}%"
    )
    return EXIT_OK
