# engine.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from Services.errors import PlanScheduleError
from simcore.arrivals import NO_VEHICLE, ArrivalStream
from simcore.intersection import PHASE_OF_STREET, Intent, IntersectionConfig, PlanSchedule


STRAIGHT = int(Intent.STRAIGHT)
LEFT = int(Intent.LEFT)
RIGHT = int(Intent.RIGHT)


@dataclass
class IntersectionState:
    """
    Mutable engine state for B arrival realisations x C plan schedules.

    Array shapes: `arrived` (B, 1, S, N); `departed`, `next_release` (B, C, S, N);
    `delay_accum`, `in_count`, `out_count` (B, C, S). Index [0, 0] is a single run.
    """

    tick: int
    arrived: np.ndarray
    departed: np.ndarray
    next_release: np.ndarray
    delay_accum: np.ndarray
    in_count: np.ndarray
    out_count: np.ndarray
    exit_ticks: Optional[np.ndarray] = None

    @classmethod
    def empty(
        cls,
        config: IntersectionConfig,
        stream: ArrivalStream,
        candidates: int = 1,
        start_tick: int = 0,
        track_exits: bool = False,
    ) -> "IntersectionState":
        B, C = stream.batch, candidates
        S, N = config.num_streets, config.lanes_per_street
        exit_ticks = None
        if track_exits:
            n_vehicles = max(1, len(stream.records))
            exit_ticks = np.full((B, C, n_vehicles), -1, dtype=np.int64)
        return cls(
            tick=start_tick,
            arrived=np.zeros((B, 1, S, N), dtype=np.int64),
            departed=np.zeros((B, C, S, N), dtype=np.int64),
            next_release=np.full((B, C, S, N), start_tick, dtype=np.int64),
            delay_accum=np.zeros((B, C, S), dtype=np.int64),
            in_count=np.zeros((B, C, S), dtype=np.int64),
            out_count=np.zeros((B, C, S), dtype=np.int64),
            exit_ticks=exit_ticks,
        )

    @property
    def lane_queue(self) -> np.ndarray:
        return self.arrived - self.departed

    @property
    def queue_len(self) -> np.ndarray:
        return self.lane_queue.sum(axis=-1)

    def critical(self, config: IntersectionConfig) -> np.ndarray:
        return self.queue_len > config.critical_queue

    def reset_period_counts(self) -> None:
        self.in_count[...] = 0
        self.out_count[...] = 0


@dataclass(frozen=True)
class SimResult:
    start_tick: int
    queue_series: np.ndarray
    sqs_series: np.ndarray
    delay_per_street: np.ndarray
    total_delay: int
    max_sqs: int
    vehicles_processed: int
    critical_ticks: np.ndarray
    entered_series: np.ndarray
    departed_series: np.ndarray

    @property
    def horizon(self) -> int:
        return int(self.sqs_series.shape[0])


@dataclass(frozen=True)
class BatchOutcome:
    """Scores of B x C runs: total delay, max total queue, per-street delay and the lane queues left at the end."""

    total_delay: np.ndarray
    max_sqs: np.ndarray
    delay_per_street: np.ndarray
    residual_queue: np.ndarray


# -----------------------------
# Signal tables
# -----------------------------
def _green_tables(
    schedules: Sequence[PlanSchedule], config: IntersectionConfig, start_tick: int, horizon: int
) -> Tuple[int, np.ndarray, np.ndarray]:
    if not schedules:
        raise PlanScheduleError("At least one plan schedule is required.")
    first = schedules[0].first_cycle
    length = len(schedules[0].plans)
    for sched in schedules:
        if sched.first_cycle != first or len(sched.plans) != length:
            raise PlanScheduleError("Batched plan schedules must share their cycle range.")
        if not sched.covers(start_tick, horizon, config):
            touched = config.cycles_touching(start_tick, horizon)
            raise PlanScheduleError(
                f"Plan schedule covers cycles [{sched.first_cycle}, {sched.first_cycle + len(sched.plans)}) "
                f"but the horizon needs [{touched.start}, {touched.stop})."
            )
    g1 = np.array([[p.green1_s for p in s.plans] for s in schedules], dtype=np.int64)
    g2 = np.array([[p.green2_s for p in s.plans] for s in schedules], dtype=np.int64)
    return first, g1, g2


def green_mask(
    tick: int, config: IntersectionConfig, first_cycle: int, g1: np.ndarray, g2: np.ndarray
) -> np.ndarray:
    """(C, S) boolean: which streets may discharge at `tick` under each schedule."""
    c = tick // config.cycle_length_s - first_cycle
    pos = tick % config.cycle_length_s
    g1c, g2c = g1[:, c], g2[:, c]
    phase1 = pos < g1c
    start2 = g1c + config.yellow_s
    phase2 = (pos >= start2) & (pos < start2 + g2c)
    by_phase = (phase1, phase2)
    return np.stack([by_phase[PHASE_OF_STREET[s]] for s in range(config.num_streets)], axis=1)


def _cumulative_arrivals(stream: ArrivalStream, start_tick: int, horizon: int) -> np.ndarray:
    """(B, T, S, N): vehicles that have joined each lane by the end of every tick."""
    B, S, N, _ = stream.lane_entry.shape
    entry = stream.lane_entry
    in_range = entry < start_tick + horizon
    offset = np.clip(entry - start_tick, 0, None)
    lane_idx = np.broadcast_to(np.arange(B * S * N).reshape(B, S, N, 1), entry.shape)
    flat = lane_idx[in_range] * horizon + offset[in_range]
    counts = np.bincount(flat, minlength=B * S * N * horizon).reshape(B, S, N, horizon)
    return np.cumsum(counts, axis=-1).transpose(0, 3, 1, 2)


# -----------------------------
# One tick
# -----------------------------
def step(
    state: IntersectionState,
    stream: ArrivalStream,
    green: np.ndarray,
    tick: int,
    config: IntersectionConfig,
    arrived_now: Optional[np.ndarray] = None,
) -> IntersectionState:
    """
    Advance every run by one tick.

    Arrivals join their lanes first; then each lane on green releases at most one
    vehicle per saturation headway from its head, subject to the turn rules:
    straight always goes, a right-turner yields when the head of the lane on its
    left also turns right, a left-turner goes only when that head is absent or
    also turning left. A blocked head still uses up its discharge slot.
    """
    if arrived_now is None:
        arrived_now = _advance_arrivals(state.arrived[:, 0], stream, tick)
    arrived_now = arrived_now[:, None] if arrived_now.ndim == 3 else arrived_now

    state.in_count += (arrived_now - state.arrived).sum(axis=-1)
    state.arrived = arrived_now

    B, C, S, N = state.departed.shape
    width = stream.width
    queue = state.arrived - state.departed
    has_head = queue > 0

    head_pos = np.minimum(state.departed, width - 1)
    b_idx = np.arange(B).reshape(B, 1, 1, 1)
    s_idx = np.arange(S).reshape(1, 1, S, 1)
    n_idx = np.arange(N).reshape(1, 1, 1, N)
    head = np.where(has_head, stream.lane_intent[b_idx, s_idx, n_idx, head_pos], NO_VEHICLE)

    left_head = np.full_like(head, NO_VEHICLE)
    left_head[..., 1:] = head[..., :-1]

    allowed = (
        (head == STRAIGHT)
        | ((head == RIGHT) & (left_head != RIGHT))
        | ((head == LEFT) & ((left_head == NO_VEHICLE) | (left_head == LEFT)))
    )
    ready = has_head & green[None, :, :, None] & (state.next_release <= tick)
    depart = ready & allowed

    state.next_release = np.where(ready, tick + config.saturation_headway_ticks, state.next_release)

    if state.exit_ticks is not None and depart.any():
        b, c, s, n = np.nonzero(depart)
        vid = stream.lane_vid[b, s, n, head_pos[b, c, s, n]]
        state.exit_ticks[b, c, vid] = tick

    state.departed = state.departed + depart
    state.out_count += depart.sum(axis=-1)
    state.delay_accum += (state.arrived - state.departed).sum(axis=-1) * config.tick_s
    state.tick = tick + 1
    return state


def _advance_arrivals(arrived: np.ndarray, stream: ArrivalStream, tick: int) -> np.ndarray:
    arrived = arrived.copy()
    B, S, N = arrived.shape
    b_idx = np.arange(B).reshape(B, 1, 1)
    s_idx = np.arange(S).reshape(1, S, 1)
    n_idx = np.arange(N).reshape(1, 1, N)
    while True:
        pos = np.minimum(arrived, stream.width - 1)
        joins = (arrived < stream.lane_count) & (stream.lane_entry[b_idx, s_idx, n_idx, pos] <= tick)
        if not joins.any():
            return arrived
        arrived += joins


# -----------------------------
# Horizons
# -----------------------------
def _simulate(
    config: IntersectionConfig,
    state: IntersectionState,
    stream: ArrivalStream,
    schedules: Sequence[PlanSchedule],
    horizon: int,
    record_series: bool,
):
    if horizon <= 0:
        raise PlanScheduleError(f"Horizon must be a positive number of ticks, got {horizon}.")
    start = state.tick
    first_cycle, g1, g2 = _green_tables(schedules, config, start, horizon)
    cum = _cumulative_arrivals(stream, start, horizon)

    B, C, S = state.delay_accum.shape
    street_queue_max = np.zeros((B, C), dtype=np.int64)
    delay_start = state.delay_accum.copy()
    series = None
    if record_series:
        series = {
            "queue": np.zeros((S, horizon), dtype=np.int64),
            "entered": np.zeros((S, horizon), dtype=np.int64),
            "departed": np.zeros((S, horizon), dtype=np.int64),
            "critical": np.zeros(S, dtype=np.int64),
        }
    departed_before = int(state.departed.sum()) if record_series else 0

    for tau in range(horizon):
        tick = start + tau
        green = green_mask(tick, config, first_cycle, g1, g2)
        step(state, stream, green, tick, config, arrived_now=cum[:, tau])
        street_queue = state.queue_len
        np.maximum(street_queue_max, street_queue.sum(axis=-1), out=street_queue_max)
        if series is not None:
            q = street_queue[0, 0]
            series["queue"][:, tau] = q
            series["entered"][:, tau] = state.arrived[0, 0].sum(axis=-1)
            series["departed"][:, tau] = state.departed[0, 0].sum(axis=-1)
            series["critical"] += q > config.critical_queue

    delay = state.delay_accum - delay_start
    return delay, street_queue_max, series, departed_before


def run_horizon(
    config: IntersectionConfig,
    state: IntersectionState,
    stream: ArrivalStream,
    schedule: PlanSchedule,
    horizon: int,
) -> SimResult:
    """
    Simulate one run for `horizon` ticks from `state.tick` (state is advanced in place).

    Delay is the area under the queue curve, so it equals the summed waiting time
    of the vehicles over the horizon.
    """
    if stream.batch != 1 or state.departed.shape[1] != 1:
        raise PlanScheduleError("run_horizon drives a single run; use evaluate_plans for batches.")
    start = state.tick
    delay, _, series, departed_before = _simulate(config, state, stream, [schedule], horizon, True)

    queue_series = series["queue"]
    sqs = queue_series.sum(axis=0)
    per_street = delay[0, 0].copy()
    return SimResult(
        start_tick=start,
        queue_series=queue_series,
        sqs_series=sqs,
        delay_per_street=per_street,
        total_delay=int(per_street.sum()),
        max_sqs=int(sqs.max()) if sqs.size else 0,
        vehicles_processed=int(state.departed.sum()) - departed_before,
        critical_ticks=series["critical"],
        entered_series=series["entered"],
        departed_series=series["departed"],
    )


def evaluate_plans(
    config: IntersectionConfig,
    stream: ArrivalStream,
    schedules: Sequence[PlanSchedule],
    horizon: int,
    start_tick: int = 0,
) -> BatchOutcome:
    """Score every schedule against every realisation in `stream` from an empty intersection."""
    state = IntersectionState.empty(config, stream, candidates=len(schedules), start_tick=start_tick)
    delay, max_sqs, _, _ = _simulate(config, state, stream, schedules, horizon, False)
    return BatchOutcome(
        total_delay=delay.sum(axis=-1),
        max_sqs=max_sqs,
        delay_per_street=delay,
        residual_queue=state.lane_queue,
    )


def drain_delay(config: IntersectionConfig, lane_queue: np.ndarray, greens: Sequence[int]) -> np.ndarray:
    """
    Waiting time still owed by vehicles queued at a cycle boundary, per street.

    `lane_queue` is (B, C, S, N) with one phase-1 green per candidate in `greens`.
    The candidate plan keeps repeating and nothing else arrives: a lane releases
    ceil(green / headway) vehicles per cycle from the start of its phase. Turn
    conflicts are ignored; a phase without green is costed as one release per cycle.
    """
    h = config.saturation_headway_ticks
    L = config.cycle_length_s
    g1 = np.asarray(greens, dtype=np.int64)
    g2 = config.green_total_s - g1
    phase_green = np.stack([g1, g2], axis=-1)
    phase_offset = np.stack([np.zeros_like(g1), g1 + config.yellow_s], axis=-1)

    phases = np.asarray(PHASE_OF_STREET, dtype=np.int64)
    release = np.maximum(-(-phase_green[:, phases] // h), 1)[None, :, :, None]
    offset = phase_offset[:, phases][None, :, :, None]

    q = np.asarray(lane_queue, dtype=np.int64)
    full, rem = np.divmod(q, release)
    whole_cycles = release * full * (full - 1) // 2 + rem * full
    slots = full * release * (release - 1) // 2 + rem * (rem - 1) // 2
    waits = L * whole_cycles + q * offset + h * slots
    return waits.sum(axis=-1) * config.tick_s


def vehicle_waiting_times(stream: ArrivalStream, state: IntersectionState, end_tick: int) -> np.ndarray:
    """Per-vehicle waiting ticks up to `end_tick`; vehicles still queued count until then."""
    if state.exit_ticks is None:
        raise ValueError("Exit ticks were not tracked for this run.")
    entry = np.array([r.entry_tick for r in stream.records], dtype=np.int64)
    exits = state.exit_ticks[0, 0, : len(entry)]
    finish = np.where(exits >= 0, exits, end_tick)
    return np.clip(finish - entry, 0, None)
