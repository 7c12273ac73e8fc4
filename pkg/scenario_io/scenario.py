# scenario.py
from __future__ import annotations

import re
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from simcore.arrivals import TurnFractions
from simcore.intersection import NUM_STREETS


_CLOCK_RE = re.compile(r"^(?P<h>\d{1,2}):(?P<m>\d{2})$")


def clock_to_seconds(value: str) -> int:
    m = _CLOCK_RE.match(value.strip())
    if not m:
        raise ValueError(f"'{value}' is not a HH:MM clock time")
    hours, minutes = int(m.group("h")), int(m.group("m"))
    if hours > 24 or minutes > 59 or (hours == 24 and minutes):
        raise ValueError(f"'{value}' is not a valid clock time")
    return hours * 3600 + minutes * 60


class TurnShare(BaseModel):
    model_config = ConfigDict(frozen=True)

    left_pct: float = Field(0.0, ge=0, le=100)
    right_pct: float = Field(0.0, ge=0, le=100)

    @model_validator(mode="after")
    def _check_sum(self) -> "TurnShare":
        if self.left_pct + self.right_pct > 100.0:
            raise ValueError(f"left {self.left_pct}% + right {self.right_pct}% exceeds 100%")
        return self

    def as_fractions(self) -> TurnFractions:
        return TurnFractions(left_pct=self.left_pct, right_pct=self.right_pct)


class Scenario(BaseModel):
    """
    One simulated day at the intersection.

    `flows[s][k]` is the number of vehicles street s+1 receives in period k.
    Optional `left_profile` / `right_profile` override the street's static
    turn shares period by period.
    """

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    start_time: str = "06:00"
    end_time: str = "22:00"
    period_s: int = Field(900, gt=0)
    flows: List[List[int]]
    turns: List[TurnShare] = Field(default_factory=lambda: [TurnShare() for _ in range(NUM_STREETS)])
    left_profile: Dict[int, List[float]] = Field(default_factory=dict)
    right_profile: Dict[int, List[float]] = Field(default_factory=dict)
    master_seed: int = 0

    @field_validator("start_time", "end_time")
    @classmethod
    def _check_clock(cls, v: str) -> str:
        clock_to_seconds(v)
        return v.strip()

    @field_validator("flows")
    @classmethod
    def _check_flows(cls, v: List[List[int]]) -> List[List[int]]:
        if len(v) != NUM_STREETS:
            raise ValueError(f"expected {NUM_STREETS} flow rows, got {len(v)}")
        for street, row in enumerate(v, start=1):
            if any(x < 0 for x in row):
                raise ValueError(f"street {street} has a negative flow")
        return v

    @model_validator(mode="after")
    def _check_shape(self) -> "Scenario":
        span = clock_to_seconds(self.end_time) - clock_to_seconds(self.start_time)
        if span <= 0:
            raise ValueError(f"end_time {self.end_time} is not after start_time {self.start_time}")
        if span % self.period_s:
            raise ValueError(f"day span of {span}s is not a whole number of {self.period_s}s periods")
        periods = span // self.period_s

        for street, row in enumerate(self.flows, start=1):
            if len(row) != periods:
                raise ValueError(f"street {street} has {len(row)} flow periods, expected {periods}")
        if len(self.turns) != NUM_STREETS:
            raise ValueError(f"expected {NUM_STREETS} turn shares, got {len(self.turns)}")

        for label, profile in (("left", self.left_profile), ("right", self.right_profile)):
            for street, row in profile.items():
                if not 1 <= street <= NUM_STREETS:
                    raise ValueError(f"{label} profile names unknown street {street}")
                if len(row) != periods:
                    raise ValueError(f"street {street} {label} profile has {len(row)} periods, expected {periods}")
                if any(x < 0 or x > 100 for x in row):
                    raise ValueError(f"street {street} {label} profile leaves [0, 100]")

        for k in range(periods):
            for share in self._shares_at(k):
                if share[0] + share[1] > 100.0:
                    raise ValueError(f"turn shares in period {k} exceed 100% ({share[0]}% + {share[1]}%)")
        return self

    # -----------------------------
    # Derived views
    # -----------------------------
    @property
    def num_periods(self) -> int:
        return len(self.flows[0])

    @property
    def horizon_s(self) -> int:
        return self.num_periods * self.period_s

    def flow_matrix(self) -> np.ndarray:
        """(periods, streets) integer array."""
        return np.asarray(self.flows, dtype=np.int64).T.copy()

    def daily_average_flows(self) -> np.ndarray:
        return self.flow_matrix().mean(axis=0)

    def _shares_at(self, period_index: int) -> List[Tuple[float, float]]:
        shares = []
        for s in range(NUM_STREETS):
            left = self.left_profile.get(s + 1, None)
            right = self.right_profile.get(s + 1, None)
            shares.append(
                (
                    left[period_index] if left is not None else self.turns[s].left_pct,
                    right[period_index] if right is not None else self.turns[s].right_pct,
                )
            )
        return shares

    def turn_fractions_at(self, period_index: int) -> Tuple[TurnFractions, ...]:
        return tuple(TurnFractions(left_pct=left, right_pct=right) for left, right in self._shares_at(period_index))
