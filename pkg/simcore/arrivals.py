# arrivals.py
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from Services.errors import ScenarioError
from simcore.intersection import Intent, IntersectionConfig


SeedLike = Union[int, np.random.SeedSequence]

PAD_TICK = np.iinfo(np.int64).max
NO_VEHICLE = -1

# Sub-stream keys so arrivals and intents never share random draws.
ARRIVAL_STREAM_KEY = 0
INTENT_STREAM_KEY = 1


@dataclass(frozen=True)
class TurnFractions:
    left_pct: float = 0.0
    right_pct: float = 0.0

    def __post_init__(self) -> None:
        if self.left_pct < 0 or self.right_pct < 0:
            raise ScenarioError(f"Turn fractions cannot be negative: left={self.left_pct}%, right={self.right_pct}%.")
        if self.left_pct + self.right_pct > 100.0:
            raise ScenarioError(
                f"Turn fractions sum above 100%: left={self.left_pct}% + right={self.right_pct}%."
            )

    @property
    def straight_pct(self) -> float:
        return 100.0 - self.left_pct - self.right_pct


@dataclass(frozen=True)
class VehicleRecord:
    id: int
    street: int
    lane: int
    entry_tick: int
    intent: Intent = Intent.STRAIGHT
    exit_tick: Optional[int] = None


def rng_seed(seed: SeedLike, *keys: int) -> np.random.SeedSequence:
    """Child seed for an independent sub-stream of `seed` (one per period, street, purpose)."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(int(k) for k in keys))
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))


def rng_for(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(seed)


# -----------------------------
# Arrival times
# -----------------------------
def generate_arrivals(flow_count: int, period_start: int, period_len: int, seed: SeedLike) -> np.ndarray:
    """
    Entry ticks for `flow_count` vehicles inside [period_start, period_start + period_len).

    Ticks are drawn from N(midpoint, period_len / 6), clipped to the period and sorted.
    """
    if flow_count < 0:
        raise ScenarioError(f"Negative flow count {flow_count} is not a valid scenario.")
    if period_len <= 0:
        raise ScenarioError(f"Period length must be positive, got {period_len}.")
    if flow_count == 0:
        return np.empty(0, dtype=np.int64)

    rng = rng_for(seed)
    midpoint = period_start + period_len / 2.0
    draws = rng.normal(loc=midpoint, scale=period_len / 6.0, size=int(flow_count))
    ticks = np.clip(np.floor(draws), period_start, period_start + period_len - 1).astype(np.int64)
    ticks.sort()
    return ticks


def uniform_arrivals(flow_count: int, period_start: int, period_len: int) -> np.ndarray:
    """Evenly spaced entry ticks at the rate flow_count / period_len (the demand predictor)."""
    if flow_count < 0:
        raise ScenarioError(f"Negative flow count {flow_count} is not a valid scenario.")
    n = int(flow_count)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    i = np.arange(n, dtype=np.int64)
    return period_start + ((2 * i + 1) * period_len) // (2 * n)


# -----------------------------
# Intents and lanes
# -----------------------------
def assign_intents(
    arrivals: Sequence[VehicleRecord],
    turn_fractions: Sequence[TurnFractions],
    seed: SeedLike,
    lane_bias: float = 0.75,
) -> List[VehicleRecord]:
    """
    Draw each vehicle's intent from its street's turn fractions and fix its lane.

    Left-turners take lane 1 with probability `lane_bias` (else lane 2), right-turners
    lane 3 with probability `lane_bias` (else lane 2), straight vehicles any lane.
    """
    if not arrivals:
        return []

    streets = np.fromiter((r.street for r in arrivals), dtype=np.int64, count=len(arrivals)) - 1
    if streets.min() < 0 or streets.max() >= len(turn_fractions):
        raise ScenarioError("Vehicle street index outside the turn-fraction table.")

    left = np.array([tf.left_pct for tf in turn_fractions], dtype=float)[streets] / 100.0
    right = np.array([tf.right_pct for tf in turn_fractions], dtype=float)[streets] / 100.0

    rng = rng_for(seed)
    u_intent = rng.random(len(arrivals))
    u_lane = rng.random(len(arrivals))

    intents = np.full(len(arrivals), int(Intent.STRAIGHT), dtype=np.int64)
    intents[u_intent < left + right] = int(Intent.RIGHT)
    intents[u_intent < left] = int(Intent.LEFT)

    biased = u_lane < lane_bias
    lanes = np.minimum((u_lane * 3).astype(np.int64), 2) + 1
    lanes = np.where(intents == int(Intent.LEFT), np.where(biased, 1, 2), lanes)
    lanes = np.where(intents == int(Intent.RIGHT), np.where(biased, 3, 2), lanes)

    return [
        replace(r, intent=Intent(int(intent)), lane=int(lane))
        for r, intent, lane in zip(arrivals, intents, lanes)
    ]


def period_records(
    flows: Sequence[int],
    turn_fractions: Sequence[TurnFractions],
    period_start: int,
    period_len: int,
    seed: SeedLike,
    period_key: int,
    first_id: int = 0,
    lane_bias: float = 0.75,
    uniform: bool = False,
) -> List[VehicleRecord]:
    """All vehicles of one period, every street drawn from its own sub-stream."""
    stubs: List[VehicleRecord] = []
    next_id = first_id
    for street_idx, flow in enumerate(flows):
        if uniform:
            ticks = uniform_arrivals(int(flow), period_start, period_len)
        else:
            ticks = generate_arrivals(
                int(flow), period_start, period_len, rng_seed(seed, period_key, ARRIVAL_STREAM_KEY, street_idx)
            )
        for t in ticks:
            stubs.append(VehicleRecord(id=next_id, street=street_idx + 1, lane=0, entry_tick=int(t)))
            next_id += 1
    return assign_intents(stubs, turn_fractions, rng_seed(seed, period_key, INTENT_STREAM_KEY), lane_bias)


# -----------------------------
# Packed lane arrays
# -----------------------------
@dataclass(frozen=True)
class ArrivalStream:
    """
    Vehicles packed per lane in entry order, shape (batch, streets, lanes, width).

    Lane contents do not depend on the signal timing, so one stream can be
    replayed against any number of plan schedules.
    """

    records: Tuple[VehicleRecord, ...]
    lane_entry: np.ndarray
    lane_intent: np.ndarray
    lane_vid: np.ndarray
    lane_count: np.ndarray

    @property
    def batch(self) -> int:
        return int(self.lane_entry.shape[0])

    @property
    def width(self) -> int:
        return int(self.lane_entry.shape[-1])

    @property
    def total_vehicles(self) -> np.ndarray:
        return self.lane_count.sum(axis=(1, 2))

    @classmethod
    def from_records(cls, records: Iterable[VehicleRecord], config: IntersectionConfig) -> "ArrivalStream":
        recs = tuple(sorted(records, key=lambda r: (r.entry_tick, r.id)))
        S, N = config.num_streets, config.lanes_per_street

        buckets: List[List[List[int]]] = [[[] for _ in range(N)] for _ in range(S)]
        for pos, rec in enumerate(recs):
            if not (1 <= rec.street <= S and 1 <= rec.lane <= N):
                raise ScenarioError(f"Vehicle {rec.id} has no valid street/lane ({rec.street}, {rec.lane}).")
            buckets[rec.street - 1][rec.lane - 1].append(pos)

        width = max((len(b) for lanes in buckets for b in lanes), default=0) + 1
        lane_entry = np.full((1, S, N, width), PAD_TICK, dtype=np.int64)
        lane_intent = np.full((1, S, N, width), NO_VEHICLE, dtype=np.int8)
        lane_vid = np.full((1, S, N, width), -1, dtype=np.int64)
        lane_count = np.zeros((1, S, N), dtype=np.int64)

        for s in range(S):
            for n in range(N):
                ids = buckets[s][n]
                if not ids:
                    continue
                k = len(ids)
                lane_entry[0, s, n, :k] = [recs[i].entry_tick for i in ids]
                lane_intent[0, s, n, :k] = [int(recs[i].intent) for i in ids]
                lane_vid[0, s, n, :k] = ids
                lane_count[0, s, n] = k

        return cls(recs, lane_entry, lane_intent, lane_vid, lane_count)

    @classmethod
    def stack(cls, streams: Sequence["ArrivalStream"]) -> "ArrivalStream":
        """Batch several single streams (vehicle ids stay local to each row)."""
        if not streams:
            raise ValueError("Cannot stack an empty list of streams.")
        width = max(s.width for s in streams)

        def _pad(arr: np.ndarray, fill: int) -> np.ndarray:
            extra = width - arr.shape[-1]
            if extra == 0:
                return arr
            return np.concatenate([arr, np.full(arr.shape[:-1] + (extra,), fill, dtype=arr.dtype)], axis=-1)

        return cls(
            records=(),
            lane_entry=np.concatenate([_pad(s.lane_entry, PAD_TICK) for s in streams]),
            lane_intent=np.concatenate([_pad(s.lane_intent, NO_VEHICLE) for s in streams]),
            lane_vid=np.concatenate([_pad(s.lane_vid, -1) for s in streams]),
            lane_count=np.concatenate([s.lane_count for s in streams]),
        )
