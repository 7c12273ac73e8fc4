# timing_plans.py
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from Services.logger_config import logger
from fuzzy.rulebase import round_half_up
from simcore.intersection import IntersectionConfig, PhasePlan, PlanSchedule


@dataclass(frozen=True)
class ControllerDecision:
    plans: Tuple[PhasePlan, ...]
    predicted_delay: Optional[int]
    candidates_evaluated: int

    def __post_init__(self) -> None:
        if self.candidates_evaluated < 1:
            raise ValueError("A decision evaluates at least one candidate.")
        if not self.plans:
            raise ValueError("A decision carries at least one cycle plan.")

    @property
    def green1_s(self) -> int:
        return self.plans[0].green1_s

    def schedule(self, first_cycle: int) -> PlanSchedule:
        return PlanSchedule(first_cycle=first_cycle, plans=self.plans)


def period_cycles(config: IntersectionConfig, period_index: int) -> range:
    """Cycles that start inside the period (8 or 7 with the defaults)."""
    return config.cycles_starting_in(period_index * config.period_s, config.period_s)


def decision_for(
    config: IntersectionConfig,
    green1_s: int,
    period_index: int = 0,
    predicted_delay: Optional[int] = None,
    candidates_evaluated: int = 1,
) -> ControllerDecision:
    plan = PhasePlan.from_green1(config, green1_s)
    n_cycles = max(1, len(period_cycles(config, period_index)))
    return ControllerDecision(
        plans=(plan,) * n_cycles,
        predicted_delay=predicted_delay,
        candidates_evaluated=candidates_evaluated,
    )


# -----------------------------
# Static strategies
# -----------------------------
def fixed_green(config: IntersectionConfig) -> int:
    return config.green_total_s // 2


def fixed_time(config: IntersectionConfig, period_index: int = 0) -> ControllerDecision:
    return decision_for(config, fixed_green(config), period_index)


def proportional_green(config: IntersectionConfig, flows: Sequence[float]) -> Optional[int]:
    """Phase-1 share of the effective green in proportion to (F1 + F3) / (F1 + F2 + F3 + F4)."""
    f = np.asarray(flows, dtype=float)
    total = float(f.sum())
    if total <= 0.0:
        return None
    share = float(f[0] + f[2]) / total
    green = round_half_up(share * config.green_total_s)
    return min(max(green, config.min_green_s), config.max_green_s)


def pretimed(
    config: IntersectionConfig,
    daily_average_flows: Sequence[float],
    period_index: int = 0,
) -> ControllerDecision:
    green = proportional_green(config, daily_average_flows)
    if green is None:
        logger.warning("Pre-timed split has no demand to work from; using the fixed-time split.")
        return fixed_time(config, period_index)
    return decision_for(config, green, period_index)


def segmental_pretimed(
    config: IntersectionConfig,
    per_period_flows: Sequence[Sequence[float]],
    segment_len: int = 4,
) -> List[ControllerDecision]:
    """One pre-timed decision per segment of `segment_len` periods, from that segment's averages."""
    if segment_len < 1:
        raise ValueError(f"segment_len must be >= 1, got {segment_len}.")
    flows = np.asarray(per_period_flows, dtype=float)
    decisions: List[ControllerDecision] = []
    for seg_start in range(0, len(flows), segment_len):
        averages = flows[seg_start : seg_start + segment_len].mean(axis=0)
        decisions.append(pretimed(config, averages, period_index=seg_start))
    return decisions
