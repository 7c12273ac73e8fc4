# strategies.py
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Type

import numpy as np

from Services.errors import ConfigurationError, RuleBaseError
from Services.logger_config import logger
from controllers.optimizer import fuzzy_decision, fuzzyreal_optimize, realtime_optimize
from controllers.sensors import QueueEstimate, SensorFrame
from controllers.timing_plans import ControllerDecision, decision_for, fixed_time, pretimed, segmental_pretimed
from fuzzy.rulebase import RuleBase
from simcore.arrivals import SeedLike, TurnFractions
from simcore.intersection import IntersectionConfig


class ControllerName(str, Enum):
    FIXED = "fixed"
    PRETIMED = "pretimed"
    SEGMENTAL = "segmental"
    FUZZY = "fuzzy"
    REALTIME = "realtime"
    FUZZYREAL = "fuzzyreal"


# Order used by compare and in every report.
CONTROLLER_ORDER = tuple(ControllerName)
RULEBASE_CONTROLLERS = frozenset({ControllerName.FUZZY, ControllerName.FUZZYREAL})


@dataclass(frozen=True)
class ControlContext:
    """What a controller may look at when timing period `period_index`."""

    period_index: int
    frame: Optional[SensorFrame]
    queue: Optional[QueueEstimate]
    turn_fractions: Sequence[TurnFractions]
    seed: SeedLike


class Controller:
    name: ControllerName

    def __init__(self, config: IntersectionConfig) -> None:
        self.config = config

    def decide(self, ctx: ControlContext) -> ControllerDecision:
        raise NotImplementedError


class FixedTimeController(Controller):
    name = ControllerName.FIXED

    def decide(self, ctx: ControlContext) -> ControllerDecision:
        return fixed_time(self.config, ctx.period_index)


class PretimedController(Controller):
    name = ControllerName.PRETIMED

    def __init__(self, config: IntersectionConfig, per_period_flows: Sequence[Sequence[float]]) -> None:
        super().__init__(config)
        daily = np.asarray(per_period_flows, dtype=float).mean(axis=0)
        self._green1 = pretimed(config, daily).green1_s

    def decide(self, ctx: ControlContext) -> ControllerDecision:
        return decision_for(self.config, self._green1, ctx.period_index)


class SegmentalPretimedController(Controller):
    name = ControllerName.SEGMENTAL

    def __init__(
        self, config: IntersectionConfig, per_period_flows: Sequence[Sequence[float]], segment_len: int = 4
    ) -> None:
        super().__init__(config)
        self.segment_len = segment_len
        self._greens: List[int] = [d.green1_s for d in segmental_pretimed(config, per_period_flows, segment_len)]

    def decide(self, ctx: ControlContext) -> ControllerDecision:
        segment = min(ctx.period_index // self.segment_len, len(self._greens) - 1)
        return decision_for(self.config, self._greens[segment], ctx.period_index)


class _ResponsiveController(Controller):
    """Times a period from the previous period's sensor frame; the first period runs the fixed split."""

    def decide(self, ctx: ControlContext) -> ControllerDecision:
        if ctx.frame is None or ctx.queue is None:
            return fixed_time(self.config, ctx.period_index)
        return self._respond(ctx)

    def _respond(self, ctx: ControlContext) -> ControllerDecision:
        raise NotImplementedError


class FuzzyController(_ResponsiveController):
    name = ControllerName.FUZZY

    def __init__(self, config: IntersectionConfig, rulebase: RuleBase) -> None:
        super().__init__(config)
        self.rulebase = rulebase

    def _respond(self, ctx: ControlContext) -> ControllerDecision:
        return fuzzy_decision(self.config, ctx.frame, ctx.queue.qr, self.rulebase, ctx.period_index)


class RealTimeController(_ResponsiveController):
    name = ControllerName.REALTIME

    def _respond(self, ctx: ControlContext) -> ControllerDecision:
        return realtime_optimize(
            self.config, ctx.frame, ctx.queue.qr, ctx.seed, ctx.turn_fractions, ctx.period_index
        )


class FuzzyRealController(_ResponsiveController):
    name = ControllerName.FUZZYREAL

    def __init__(self, config: IntersectionConfig, rulebase: RuleBase) -> None:
        super().__init__(config)
        self.rulebase = rulebase

    def _respond(self, ctx: ControlContext) -> ControllerDecision:
        return fuzzyreal_optimize(
            self.config, ctx.frame, ctx.queue.qr, self.rulebase, ctx.seed, ctx.turn_fractions, ctx.period_index
        )


CONTROLLERS: Dict[ControllerName, Type[Controller]] = {
    ControllerName.FIXED: FixedTimeController,
    ControllerName.PRETIMED: PretimedController,
    ControllerName.SEGMENTAL: SegmentalPretimedController,
    ControllerName.FUZZY: FuzzyController,
    ControllerName.REALTIME: RealTimeController,
    ControllerName.FUZZYREAL: FuzzyRealController,
}


def parse_controller(name: str) -> ControllerName:
    try:
        return ControllerName(name.strip().lower())
    except ValueError:
        valid = ", ".join(c.value for c in CONTROLLER_ORDER)
        raise ConfigurationError(f"Unknown controller '{name}'; choose one of: {valid}.") from None


def build_controller(
    name: str,
    config: IntersectionConfig,
    per_period_flows: Sequence[Sequence[float]],
    rulebase: Optional[RuleBase] = None,
    segment_len: int = 4,
) -> Controller:
    key = parse_controller(name)
    if key in RULEBASE_CONTROLLERS and rulebase is None:
        raise RuleBaseError(
            f"Controller '{key.value}' needs a rule base: pass --rulebase (build one with build-rulebase)."
        )

    if key is ControllerName.PRETIMED:
        controller: Controller = PretimedController(config, per_period_flows)
    elif key is ControllerName.SEGMENTAL:
        controller = SegmentalPretimedController(config, per_period_flows, segment_len)
    elif key in RULEBASE_CONTROLLERS:
        controller = CONTROLLERS[key](config, rulebase)
    else:
        controller = CONTROLLERS[key](config)

    logger.info(f"Controller ready: {key.value}")
    return controller
