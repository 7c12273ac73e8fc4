# tests/test_sensors.py
from __future__ import annotations

import numpy as np
import pytest

from Services.errors import SensorDataError
from controllers.sensors import SensorFrame, estimate_queue, histories


def test_queue_is_entries_minus_exits():
    est = estimate_queue([[30, 40]], [[25, 35]])
    assert est.qr == (10,)
    assert est.inconsistent == (False,)


def test_empty_history_means_empty_street():
    assert estimate_queue([[], []], [[], []]).qr == (0, 0)


def test_negative_balance_is_clamped_and_flagged():
    est = estimate_queue([[10]], [[12]])
    assert est.qr == (0,)
    assert est.inconsistent == (True,)
    assert est.any_inconsistent


def test_mismatched_histories_are_rejected():
    with pytest.raises(SensorDataError):
        estimate_queue([[1, 2]], [[1]])
    with pytest.raises(SensorDataError):
        estimate_queue([[1], [2]], [[1]])


def test_balanced_period_leaves_queue_unchanged():
    before = estimate_queue([[30, 40], [5]], [[25, 35], [1]])
    after = estimate_queue([[30, 40, 17], [5, 0]], [[25, 35, 17], [1, 0]])
    assert before.qr == after.qr


def test_frames_reject_negative_counts():
    with pytest.raises(SensorDataError):
        SensorFrame(period_index=0, fir=(1, -1), for_=(0, 0))


def test_histories_are_per_street_series():
    frames = [SensorFrame(0, (3, 4), (1, 2)), SensorFrame(1, (5, 6), (7, 8))]
    fir, out = histories(frames, num_streets=2)
    assert fir == [[3, 5], [4, 6]]
    assert out == [[1, 7], [2, 8]]


def test_randomized_histories_match_running_balance():
    rng = np.random.default_rng(2024)
    clamped = 0
    for _ in range(1000):
        streets = int(rng.integers(1, 5))
        periods = int(rng.integers(0, 12))
        fir = rng.integers(0, 400, size=(streets, periods))
        # exits can overshoot entries to exercise the clamp
        out = rng.integers(0, 440, size=(streets, periods))

        est = estimate_queue(fir.tolist(), out.tolist())

        balance = fir.sum(axis=1) - out.sum(axis=1)
        assert est.qr == tuple(int(max(b, 0)) for b in balance)
        assert est.inconsistent == tuple(bool(b < 0) for b in balance)
        clamped += int((balance < 0).sum())
    assert clamped > 0
