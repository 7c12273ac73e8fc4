# tests/test_engine.py
from __future__ import annotations

import numpy as np
import pytest

from Services.errors import PlanScheduleError
from simcore.arrivals import ArrivalStream, TurnFractions, period_records
from simcore.engine import (
    IntersectionState,
    drain_delay,
    evaluate_plans,
    run_horizon,
    step,
    vehicle_waiting_times,
)
from simcore.intersection import Intent, IntersectionConfig, PhasePlan, PlanSchedule, Signal, signal_states


def _schedule(config: IntersectionConfig, green1: int, cycles: int = 8) -> PlanSchedule:
    return PlanSchedule.repeat(PhasePlan.from_green1(config, green1), 0, cycles)


def _run(config, records, green1, horizon, track_exits=False):
    stream = ArrivalStream.from_records(records, config)
    state = IntersectionState.empty(config, stream, track_exits=track_exits)
    result = run_horizon(config, state, stream, _schedule(config, green1), horizon)
    return stream, state, result


def _seeded_period(config, seed=5):
    turns = [TurnFractions(20, 20)] * 4
    return period_records([260, 120, 230, 100], turns, 0, config.period_s, seed=seed, period_key=0)


def test_red_street_keeps_its_queue(config, make_records):
    # green1 = 112 leaves street 2 without green.
    records = make_records([(2, 1, 0), (2, 2, 0), (2, 3, 0), (2, 1, 0), (2, 2, 0)])
    _, state, result = _run(config, records, 112, 10)

    assert result.queue_series[1].tolist() == [5] * 10
    assert result.delay_per_street[1] == 50
    assert result.vehicles_processed == 0
    assert state.out_count[0, 0, 1] == 0


def test_single_red_tick_adds_queue_to_delay(config, make_records):
    stream = ArrivalStream.from_records(make_records([(1, n, 0) for n in (1, 2, 3, 1, 2)]), config)
    state = IntersectionState.empty(config, stream)
    red = np.zeros((1, 4), dtype=bool)
    step(state, stream, red, 0, config)
    assert state.queue_len[0, 0, 0] == 5
    assert state.delay_accum[0, 0, 0] == 5
    assert state.tick == 1


def test_three_straight_lanes_release_fifteen_in_ten_seconds(config, make_records):
    records = make_records([(1, lane, 0) for lane in (1, 2, 3) for _ in range(10)])
    _, state, result = _run(config, records, 56, 10)

    assert result.vehicles_processed == 15
    assert int(state.queue_len[0, 0, 0]) == 15


def test_empty_intersection_has_no_delay(config):
    _, _, result = _run(config, [], 56, 120)
    assert result.total_delay == 0
    assert result.max_sqs == 0
    assert not result.sqs_series.any()
    assert result.vehicles_processed == 0


def test_conservation_every_tick(config):
    _, _, result = _run(config, _seeded_period(config), 60, config.period_s)

    assert np.array_equal(result.entered_series, result.departed_series + result.queue_series)
    assert np.array_equal(result.sqs_series, result.queue_series.sum(axis=0))
    assert result.total_delay == int(result.delay_per_street.sum())
    assert np.array_equal(result.delay_per_street, result.queue_series.sum(axis=1))


@pytest.mark.parametrize("green1", [20, 56, 95])
def test_delay_equals_summed_waiting_time(config, green1):
    stream, state, result = _run(config, _seeded_period(config), green1, config.period_s, track_exits=True)
    waits = vehicle_waiting_times(stream, state, state.tick)
    assert int(waits.sum()) == result.total_delay


def test_left_turner_follows_a_left_turner(config, make_records):
    records = make_records([(1, 1, 0, Intent.LEFT), (1, 2, 0, Intent.LEFT)])
    _, state, _ = _run(config, records, 56, 4, track_exits=True)
    assert state.exit_ticks[0, 0].tolist() == [0, 0]


def test_left_turner_waits_behind_straight_head(config, make_records):
    records = make_records([(1, 1, 0, Intent.STRAIGHT), (1, 2, 0, Intent.LEFT)])
    _, state, _ = _run(config, records, 56, 4, track_exits=True)
    # blocked at tick 0, next slot opens at tick 2
    assert state.exit_ticks[0, 0].tolist() == [0, 2]


def test_right_turner_yields_to_right_turner_on_its_left(config, make_records):
    records = make_records([(1, 2, 0, Intent.RIGHT), (1, 3, 0, Intent.RIGHT)])
    _, state, _ = _run(config, records, 56, 4, track_exits=True)
    assert state.exit_ticks[0, 0].tolist() == [0, 2]


def test_right_turner_goes_beside_left_turner(config, make_records):
    records = make_records([(1, 1, 0, Intent.LEFT), (1, 2, 0, Intent.RIGHT)])
    _, state, _ = _run(config, records, 56, 4, track_exits=True)
    assert state.exit_ticks[0, 0].tolist() == [0, 0]


@pytest.mark.parametrize("queued, critical", [(75, 0), (76, 30)])
def test_critical_ticks_above_spill_back_threshold(config, make_records, queued, critical):
    records = make_records([(2, 1 + i % 3, 0) for i in range(queued)])
    _, _, result = _run(config, records, 112, 30)
    assert config.critical_queue == 75
    assert int(result.critical_ticks[1]) == critical


def test_batched_scores_match_single_runs(config):
    records = _seeded_period(config, seed=21)
    stream = ArrivalStream.from_records(records, config)
    greens = [20, 56, 95]
    outcome = evaluate_plans(config, stream, [_schedule(config, g) for g in greens], config.period_s)

    for i, g in enumerate(greens):
        _, _, single = _run(config, records, g, config.period_s)
        assert int(outcome.total_delay[0, i]) == single.total_delay
        assert int(outcome.max_sqs[0, i]) == single.max_sqs


def test_runs_are_deterministic(config):
    _, _, a = _run(config, _seeded_period(config, seed=3), 48, config.period_s)
    _, _, b = _run(config, _seeded_period(config, seed=3), 48, config.period_s)
    assert a.sqs_series.tobytes() == b.sqs_series.tobytes()
    assert a.total_delay == b.total_delay


def test_short_schedule_is_rejected(config, make_records):
    stream = ArrivalStream.from_records(make_records([(1, 1, 0)]), config)
    state = IntersectionState.empty(config, stream)
    with pytest.raises(PlanScheduleError):
        run_horizon(config, state, stream, _schedule(config, 56, cycles=1), config.period_s)


def test_signal_states_follow_the_cycle(config):
    sched = _schedule(config, 50, cycles=2)
    G, Y, R = Signal.GREEN, Signal.YELLOW, Signal.RED
    assert signal_states(sched, 0, config) == (G, R, G, R)
    assert signal_states(sched, 50, config) == (Y, R, Y, R)
    assert signal_states(sched, 54, config) == (R, G, R, G)
    assert signal_states(sched, 116, config) == (R, Y, R, Y)
    assert signal_states(sched, 120, config) == (G, R, G, R)


@pytest.mark.parametrize("green1", [5, 56, 100])
def test_drain_delay_matches_simulated_clearance(config, make_records, green1):
    counts = {(1, 1): 12, (1, 2): 7, (1, 3): 3, (2, 1): 9, (2, 2): 4}
    records = make_records([(s, n, 0) for (s, n), k in counts.items() for _ in range(k)])
    stream, state, result = _run(config, records, green1, 960)

    assert int(state.queue_len.sum()) == 0
    owed = drain_delay(config, stream.lane_count[:, None], [green1])
    assert owed[0, 0].tolist() == result.delay_per_street.tolist()


def test_drain_delay_counts_whole_cycles(config):
    queue = np.zeros((1, 1, 4, 3), dtype=np.int64)
    queue[0, 0, 0, 0] = 30
    queue[0, 0, 1, 0] = 2
    # phase 1: 28 releases at 0..54, then 120 and 122; phase 2 starts at 60
    assert drain_delay(config, queue, [56])[0, 0].tolist() == [998, 122, 0, 0]
