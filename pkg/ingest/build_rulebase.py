# build_rulebase.py
from __future__ import annotations

import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

# Runnable as a script from the repository root.
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from Services.logger_config import logger  # noqa: E402
from controllers.optimizer import predicted_stream, score_plans  # noqa: E402
from fuzzy.rulebase import (  # noqa: E402
    BUILDER_VERSION,
    FULL_SIZE,
    LevelKey,
    RuleBase,
    all_level_keys,
    key_values,
    round_half_up,
)
from simcore.arrivals import ArrivalStream, TurnFractions, rng_seed  # noqa: E402
from simcore.intersection import IntersectionConfig  # noqa: E402


DEFAULT_REPETITIONS = int(os.getenv("SIGNAL_BENCH_RULEBASE_REPS", 100))
DEFAULT_OUT = os.getenv("SIGNAL_BENCH_RULEBASE_OUT", "rulebases/rulebase.csv")
DEFAULT_TURNS = TurnFractions(left_pct=20.0, right_pct=20.0)
SPREAD_TOLERANCE_S = 2

SPREAD_HEADER = ("d1", "d2", "d3", "d4", "green", "mode", "within_2s_pct", "min", "max")

StateSelection = Union[None, int, Sequence[int]]

_KEYS: Tuple[LevelKey, ...] = tuple(all_level_keys())


@dataclass(frozen=True)
class StateOutcome:
    """Per-repetition optima of one level tuple and the green stored for it."""

    index: int
    key: LevelKey
    green: int
    optima: Tuple[int, ...]

    @property
    def mode(self) -> int:
        counts = Counter(self.optima)
        top = max(counts.values())
        return min(g for g, c in counts.items() if c == top)

    @property
    def within_tolerance_pct(self) -> float:
        m = self.mode
        near = sum(1 for g in self.optima if abs(g - m) <= SPREAD_TOLERANCE_S)
        return 100.0 * near / len(self.optima)


@dataclass(frozen=True)
class BuildResult:
    rulebase: RuleBase
    outcomes: Tuple[StateOutcome, ...]

    @property
    def spread_ok_pct(self) -> float:
        """Share of all repetitions that landed within +/-2 s of their state's mode."""
        total = sum(len(o.optima) for o in self.outcomes)
        near = sum(o.within_tolerance_pct * len(o.optima) / 100.0 for o in self.outcomes)
        return 100.0 * near / total if total else 0.0


# -----------------------------
# SRP helpers
# -----------------------------
def state_demand(key: LevelKey, config: IntersectionConfig) -> List[int]:
    """Vehicles per period that put each street at its level (density = 3 * FIR / CR with no queue)."""
    return [round_half_up(v / config.lanes_per_street * config.street_capacity_per_period) for v in key_values(key)]


def state_key(index: int) -> LevelKey:
    return _KEYS[index]


def select_states(states: StateSelection) -> List[int]:
    if states is None:
        return list(range(FULL_SIZE))
    if isinstance(states, int):
        if not 1 <= states <= FULL_SIZE:
            raise ValueError(f"--states must be between 1 and {FULL_SIZE}, got {states}.")
        return list(range(states))
    picked = sorted(set(int(s) for s in states))
    if not picked or picked[0] < 0 or picked[-1] >= FULL_SIZE:
        raise ValueError(f"State indices must lie in [0, {FULL_SIZE}).")
    return picked


def optimal_greens(
    config: IntersectionConfig,
    key: LevelKey,
    repetitions: int,
    seed: int,
    turns: TurnFractions = DEFAULT_TURNS,
) -> np.ndarray:
    """
    The real-time optimizer's green1 for every seeded realisation of one state.

    Each repetition is an empty intersection facing the state's demand at a
    uniform rate with its own intent and lane draws; all repetitions are scored
    in one batch with the optimizer's objective.
    """
    demand = state_demand(key, config)
    empty = [0] * config.num_streets
    streams = [
        predicted_stream(config, demand, empty, rng_seed(seed, rep), 0, [turns] * config.num_streets)
        for rep in range(repetitions)
    ]
    delays = score_plans(config, ArrivalStream.stack(streams), config.candidate_greens, start_tick=0)
    greens = np.asarray(config.candidate_greens, dtype=np.int64)
    # argmin keeps the smallest green among equal delays.
    return greens[np.argmin(delays, axis=1)]


def build_state(
    config: IntersectionConfig,
    index: int,
    repetitions: int,
    base_seed: int,
    turns: TurnFractions = DEFAULT_TURNS,
) -> StateOutcome:
    key = state_key(index)
    optima = optimal_greens(config, key, repetitions, base_seed + index, turns)
    # Frequency-weighted mean of the distinct optima is their plain mean.
    green = round_half_up(float(optima.mean()))
    green = min(max(green, config.min_green_s), config.max_green_s)
    return StateOutcome(index=index, key=key, green=green, optima=tuple(int(g) for g in optima))


def _build_state_job(args: Tuple[IntersectionConfig, int, int, int, TurnFractions]) -> StateOutcome:
    return build_state(*args)


# -----------------------------
# Public API
# -----------------------------
def build_rulebase(
    config: Optional[IntersectionConfig] = None,
    repetitions: int = DEFAULT_REPETITIONS,
    base_seed: int = 0,
    states: StateSelection = None,
    workers: int = 1,
    turns: TurnFractions = DEFAULT_TURNS,
) -> BuildResult:
    """
    Brute-force rule base: per level tuple, `repetitions` seeded realisations
    are searched exhaustively with the real-time objective and the mean optimal
    green is stored.

    State i always uses seed base_seed + i, so the output does not depend on
    the worker count or on which other states are built.
    """
    config = config or IntersectionConfig()
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}.")
    indices = select_states(states)
    jobs = [(config, i, repetitions, base_seed, turns) for i in indices]

    logger.info(
        f"Building rule base: {len(indices)} state(s) x {repetitions} repetition(s), "
        f"base_seed={base_seed}, workers={workers}"
    )

    outcomes: List[StateOutcome] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for outcome in pool.map(_build_state_job, jobs, chunksize=max(1, len(jobs) // (workers * 4))):
                outcomes.append(outcome)
                _log_progress(len(outcomes), len(jobs))
    else:
        for job in jobs:
            outcomes.append(_build_state_job(job))
            _log_progress(len(outcomes), len(jobs))

    metadata: Dict[str, str] = {
        "base_seed": str(base_seed),
        "repetitions": str(repetitions),
        "builder_version": BUILDER_VERSION,
        "states": str(len(indices)),
        "left_pct": str(turns.left_pct),
        "right_pct": str(turns.right_pct),
    }
    rulebase = RuleBase(entries={o.key: o.green for o in outcomes}, metadata=metadata)
    result = BuildResult(rulebase=rulebase, outcomes=tuple(outcomes))
    logger.info(
        f"Rule base built: {len(outcomes)} rules, {result.spread_ok_pct:.1f}% of repetitions within "
        f"+/-{SPREAD_TOLERANCE_S}s of their state's modal green"
    )
    return result


def _log_progress(done: int, total: int) -> None:
    step = max(1, total // 20)
    if done == total or done % step == 0:
        logger.info(f"Rule base progress: {done}/{total} states")


def save_spread(result: BuildResult, rulebase_path: Union[str, Path]) -> Path:
    p = Path(rulebase_path)
    spread_path = p.with_name(p.name.removesuffix(".csv") + ".spread.csv")
    spread_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(SPREAD_HEADER)]
    for o in sorted(result.outcomes, key=lambda o: o.key):
        values = ",".join(f"{v:.1f}" for v in key_values(o.key))
        lines.append(f"{values},{o.green},{o.mode},{o.within_tolerance_pct:.1f},{min(o.optima)},{max(o.optima)}")
    spread_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return spread_path


if __name__ == "__main__":
    from main import main

    sys.exit(main(["build-rulebase", *sys.argv[1:]]))
