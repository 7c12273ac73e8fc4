# intersection.py
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Tuple

from Services.errors import ConfigurationError, PlanScheduleError


NUM_STREETS = 4
LANES_PER_STREET = 3
NUM_PHASES = 2

# Phase 1 serves streets 1 & 3, phase 2 serves streets 2 & 4 (0-based here).
PHASE_OF_STREET: Tuple[int, ...] = (0, 1, 0, 1)


class Signal(str, Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


class Intent(IntEnum):
    # Values are the codes stored in the packed lane arrays.
    STRAIGHT = 0
    LEFT = 1
    RIGHT = 2


@dataclass(frozen=True)
class IntersectionConfig:
    num_streets: int = NUM_STREETS
    lanes_per_street: int = LANES_PER_STREET
    num_phases: int = NUM_PHASES
    cycle_length_s: int = 120
    yellow_s: int = 4
    sensor_gap_m: float = 150.0
    vehicle_space_m: float = 6.0
    saturation_headway_ticks: int = 2
    street_capacity_per_period: int = 1350
    period_s: int = 900
    tick_s: int = 1
    free_flow_ticks: int = 0
    min_green_s: int = 5
    max_green_s: int = 112
    lane_bias: float = 0.75

    def __post_init__(self) -> None:
        if (self.num_streets, self.lanes_per_street, self.num_phases) != (NUM_STREETS, LANES_PER_STREET, NUM_PHASES):
            raise ConfigurationError("Only a four-approach, three-lane, two-phase intersection is supported.")
        if self.cycle_length_s <= 2 * self.yellow_s:
            raise ConfigurationError(
                f"cycle_length_s={self.cycle_length_s} leaves no green after two yellows of {self.yellow_s}s."
            )
        if self.tick_s != 1:
            raise ConfigurationError("Tick length is fixed at 1 s.")
        if self.saturation_headway_ticks < 1:
            raise ConfigurationError("saturation_headway_ticks must be >= 1.")
        if self.vehicle_space_m <= 0 or self.sensor_gap_m <= 0:
            raise ConfigurationError("sensor_gap_m and vehicle_space_m must be positive.")
        if self.period_s <= 0:
            raise ConfigurationError("period_s must be positive.")
        if self.street_capacity_per_period < 0:
            raise ConfigurationError("street_capacity_per_period cannot be negative.")
        if not 0.0 <= self.lane_bias <= 1.0:
            raise ConfigurationError("lane_bias must lie in [0, 1].")
        if self.min_green_s < 1:
            raise ConfigurationError("min_green_s must be >= 1.")
        if self.min_green_s > self.max_green_s:
            raise ConfigurationError(
                f"Infeasible green bounds: min_green_s={self.min_green_s} > max_green_s={self.max_green_s}."
            )
        if self.max_green_s > self.green_total_s:
            raise ConfigurationError(
                f"max_green_s={self.max_green_s} exceeds the effective green of the cycle ({self.green_total_s}s)."
            )

    # -----------------------------
    # Derived constants
    # -----------------------------
    @property
    def green_total_s(self) -> int:
        return self.cycle_length_s - 2 * self.yellow_s

    @property
    def cycles_per_period(self) -> float:
        return self.period_s / self.cycle_length_s

    @property
    def critical_queue_per_lane(self) -> float:
        return self.sensor_gap_m / self.vehicle_space_m

    @property
    def critical_queue(self) -> float:
        return self.lanes_per_street * self.critical_queue_per_lane

    @property
    def candidate_greens(self) -> range:
        return range(self.min_green_s, self.max_green_s + 1)

    def cycles_starting_in(self, start_tick: int, length: int) -> range:
        """Indices of the cycles whose first tick lies in [start_tick, start_tick + length)."""
        c = self.cycle_length_s
        first = -(-start_tick // c)
        last = -(-(start_tick + length) // c)
        return range(first, last)

    def cycles_touching(self, start_tick: int, length: int) -> range:
        c = self.cycle_length_s
        return range(start_tick // c, (start_tick + length - 1) // c + 1)


@dataclass(frozen=True)
class PhasePlan:
    green1_s: int
    green2_s: int
    yellow_s: int

    @classmethod
    def from_green1(cls, config: IntersectionConfig, green1_s: int) -> "PhasePlan":
        plan = cls(green1_s=int(green1_s), green2_s=config.green_total_s - int(green1_s), yellow_s=config.yellow_s)
        plan.validate(config)
        return plan

    @property
    def cycle_length_s(self) -> int:
        return self.green1_s + self.green2_s + 2 * self.yellow_s

    def validate(self, config: IntersectionConfig) -> None:
        if self.cycle_length_s != config.cycle_length_s or self.yellow_s != config.yellow_s:
            raise ConfigurationError(
                f"Plan {self} does not fill the {config.cycle_length_s}s cycle with {config.yellow_s}s yellows."
            )
        if not config.min_green_s <= self.green1_s <= config.max_green_s:
            raise ConfigurationError(
                f"green1_s={self.green1_s} outside [{config.min_green_s}, {config.max_green_s}]."
            )
        if self.green2_s < 0:
            raise ConfigurationError(f"green2_s={self.green2_s} is negative.")

    def phase_signal(self, position_s: int) -> Tuple[Signal, Signal]:
        """Signals of (phase 1, phase 2) at a position inside the cycle."""
        g1, y, g2 = self.green1_s, self.yellow_s, self.green2_s
        if position_s < g1:
            return Signal.GREEN, Signal.RED
        if position_s < g1 + y:
            return Signal.YELLOW, Signal.RED
        if position_s < g1 + y + g2:
            return Signal.RED, Signal.GREEN
        return Signal.RED, Signal.YELLOW


@dataclass(frozen=True)
class PlanSchedule:
    """PhasePlans for consecutive cycles, the first one being cycle `first_cycle`."""

    first_cycle: int
    plans: Tuple[PhasePlan, ...] = field(default_factory=tuple)

    def plan_for_tick(self, tick: int, config: IntersectionConfig) -> PhasePlan:
        idx = tick // config.cycle_length_s - self.first_cycle
        if idx < 0 or idx >= len(self.plans):
            raise PlanScheduleError(f"No plan scheduled for tick {tick} (cycle {tick // config.cycle_length_s}).")
        return self.plans[idx]

    def covers(self, start_tick: int, horizon: int, config: IntersectionConfig) -> bool:
        cycles = config.cycles_touching(start_tick, horizon)
        return cycles.start >= self.first_cycle and cycles.stop <= self.first_cycle + len(self.plans)

    @classmethod
    def repeat(cls, plan: PhasePlan, first_cycle: int, count: int) -> "PlanSchedule":
        return cls(first_cycle=first_cycle, plans=tuple([plan] * count))


def signal_states(schedule: PlanSchedule, tick: int, config: IntersectionConfig) -> Tuple[Signal, ...]:
    plan = schedule.plan_for_tick(tick, config)
    by_phase = plan.phase_signal(tick % config.cycle_length_s)
    return tuple(by_phase[PHASE_OF_STREET[s]] for s in range(config.num_streets))


