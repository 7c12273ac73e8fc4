# optimizer.py
from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from Services.errors import ConfigurationError, RuleBaseError
from Services.logger_config import logger
from controllers.sensors import SensorFrame
from controllers.timing_plans import ControllerDecision, decision_for
from fuzzy.rulebase import RuleBase, infer_green
from simcore.arrivals import (
    INTENT_STREAM_KEY,
    ArrivalStream,
    SeedLike,
    TurnFractions,
    VehicleRecord,
    assign_intents,
    rng_seed,
    uniform_arrivals,
)
from simcore.density import compute_density
from simcore.engine import drain_delay, evaluate_plans
from simcore.intersection import IntersectionConfig, PhasePlan, PlanSchedule


FUZZY_WINDOW_S = 5
# Sub-stream of the run seed reserved for demand prediction.
PREDICTION_STREAM_KEY = 7

DEFAULT_TURNS: Tuple[TurnFractions, ...] = (TurnFractions(),) * 4


# -----------------------------
# Demand prediction
# -----------------------------
def predicted_stream(
    config: IntersectionConfig,
    fir: Sequence[int],
    qr0: Sequence[int],
    seed: SeedLike,
    start_tick: int = 0,
    turn_fractions: Optional[Sequence[TurnFractions]] = None,
) -> ArrivalStream:
    """
    The coming period as the optimizers see it.

    `qr0` vehicles per street are already waiting at `start_tick`; the last
    period's FIR is replayed at a uniform rate. Intents come from a fixed
    sub-stream of `seed`, so every candidate faces the same vehicles.
    """
    turns = tuple(turn_fractions) if turn_fractions is not None else DEFAULT_TURNS
    stubs = []
    next_id = 0
    for street_idx, (waiting, entering) in enumerate(zip(qr0, fir)):
        ticks = np.concatenate(
            [
                np.full(int(waiting), start_tick, dtype=np.int64),
                uniform_arrivals(int(entering), start_tick, config.period_s),
            ]
        )
        for t in ticks:
            stubs.append(VehicleRecord(id=next_id, street=street_idx + 1, lane=0, entry_tick=int(t)))
            next_id += 1

    records = assign_intents(
        stubs, turns, rng_seed(seed, PREDICTION_STREAM_KEY, INTENT_STREAM_KEY), config.lane_bias
    )
    return ArrivalStream.from_records(records, config)


def candidate_schedules(
    config: IntersectionConfig, greens: Sequence[int], start_tick: int, horizon: int
) -> Tuple[PlanSchedule, ...]:
    cycles = config.cycles_touching(start_tick, horizon)
    return tuple(
        PlanSchedule.repeat(PhasePlan.from_green1(config, g), cycles.start, len(cycles)) for g in greens
    )


def scoring_window(config: IntersectionConfig, period_start: int, horizon: int) -> Tuple[int, int]:
    """(first tick, length): whole cycles covering `horizon` from the first cycle boundary at or after `period_start`."""
    L = config.cycle_length_s
    first = -(-period_start // L) * L
    return first, max(1, -(-horizon // L)) * L


def score_plans(
    config: IntersectionConfig,
    stream: ArrivalStream,
    greens: Sequence[int],
    start_tick: int = 0,
    horizon: Optional[int] = None,
) -> np.ndarray:
    """
    (B, C) predicted delay of every candidate green1 against every stream row.

    A plan only governs cycles that start inside its period, so scoring begins
    at the first cycle boundary at or after `start_tick` (earlier arrivals are
    already queued there) and runs whole cycles. Vehicles still queued at the
    end add the time they need to drain under the same plan.
    """
    greens = list(greens)
    first, length = scoring_window(config, start_tick, horizon or config.period_s)
    schedules = candidate_schedules(config, greens, first, length)
    outcome = evaluate_plans(config, stream, schedules, length, start_tick=first)
    residual = drain_delay(config, outcome.residual_queue, greens).sum(axis=-1)
    return outcome.total_delay + residual


def score_greens(
    config: IntersectionConfig,
    stream: ArrivalStream,
    greens: Sequence[int],
    start_tick: int = 0,
    horizon: Optional[int] = None,
) -> np.ndarray:
    """Predicted total delay of every candidate green1 for a single stream."""
    return score_plans(config, stream, greens, start_tick, horizon)[0]


def _search(
    config: IntersectionConfig,
    stream: ArrivalStream,
    greens: Sequence[int],
    start_tick: int,
    period_index: int,
) -> ControllerDecision:
    greens = list(greens)
    delays = score_greens(config, stream, greens, start_tick)
    # argmin keeps the first minimum, greens are ascending.
    best = int(np.argmin(delays))
    return decision_for(
        config,
        greens[best],
        period_index,
        predicted_delay=int(delays[best]),
        candidates_evaluated=len(greens),
    )


def _check_bounds(config: IntersectionConfig) -> None:
    if config.min_green_s > config.max_green_s:
        raise ConfigurationError(
            f"Infeasible green bounds: min_green_s={config.min_green_s} > max_green_s={config.max_green_s}."
        )


# -----------------------------
# Responsive controllers
# -----------------------------
def realtime_optimize(
    config: IntersectionConfig,
    frame: SensorFrame,
    qr0: Sequence[int],
    seed: SeedLike,
    turn_fractions: Optional[Sequence[TurnFractions]] = None,
    period_index: Optional[int] = None,
) -> ControllerDecision:
    """Exhaustive search over every green1 in [min_green_s, max_green_s]."""
    _check_bounds(config)
    period_index = frame.period_index + 1 if period_index is None else period_index
    start = period_index * config.period_s
    stream = predicted_stream(config, frame.fir, qr0, seed, start, turn_fractions)
    decision = _search(config, stream, config.candidate_greens, start, period_index)
    logger.info(
        f"Real-time period {period_index}: green1={decision.green1_s}s, "
        f"predicted delay {decision.predicted_delay} over {decision.candidates_evaluated} candidates."
    )
    return decision


def fuzzy_green(
    config: IntersectionConfig,
    frame: SensorFrame,
    qr0: Sequence[int],
    rulebase: Optional[RuleBase],
) -> int:
    if rulebase is None:
        raise RuleBaseError("No rule base loaded; build one with the build-rulebase command and pass --rulebase.")
    densities = compute_density(qr0, frame.fir, config)
    return infer_green(densities, rulebase, config)


def fuzzy_decision(
    config: IntersectionConfig,
    frame: SensorFrame,
    qr0: Sequence[int],
    rulebase: Optional[RuleBase],
    period_index: Optional[int] = None,
) -> ControllerDecision:
    period_index = frame.period_index + 1 if period_index is None else period_index
    return decision_for(config, fuzzy_green(config, frame, qr0, rulebase), period_index)


def fuzzy_window(config: IntersectionConfig, g0: int, width: int = FUZZY_WINDOW_S) -> range:
    return range(max(config.min_green_s, g0 - width), min(config.max_green_s, g0 + width) + 1)


def fuzzyreal_optimize(
    config: IntersectionConfig,
    frame: SensorFrame,
    qr0: Sequence[int],
    rulebase: Optional[RuleBase],
    seed: SeedLike,
    turn_fractions: Optional[Sequence[TurnFractions]] = None,
    period_index: Optional[int] = None,
) -> ControllerDecision:
    """Fuzzy estimate g0, then the exhaustive search restricted to g0 +/- 5 s."""
    _check_bounds(config)
    g0 = fuzzy_green(config, frame, qr0, rulebase)
    period_index = frame.period_index + 1 if period_index is None else period_index
    start = period_index * config.period_s
    stream = predicted_stream(config, frame.fir, qr0, seed, start, turn_fractions)
    decision = _search(config, stream, fuzzy_window(config, g0), start, period_index)
    logger.info(
        f"Fuzzy-real period {period_index}: g0={g0}s -> green1={decision.green1_s}s "
        f"({decision.candidates_evaluated} candidates)."
    )
    return decision
