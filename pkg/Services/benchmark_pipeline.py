# benchmark_pipeline.py
from __future__ import annotations

import time
from typing import Dict, List, Optional

import numpy as np

from Services.errors import ConfigurationError, PlanScheduleError
from Services.logger_config import logger
from controllers.sensors import QueueEstimate, SensorFrame, estimate_queue, histories
from controllers.strategies import ControlContext, Controller, build_controller
from controllers.timing_plans import ControllerDecision, period_cycles
from fuzzy.rulebase import RuleBase
from scenario_io.report import PeriodRecord, RunReport
from scenario_io.scenario import Scenario
from simcore.arrivals import ArrivalStream, VehicleRecord, period_records, rng_seed
from simcore.engine import IntersectionState, SimResult, run_horizon, vehicle_waiting_times
from simcore.intersection import IntersectionConfig, PhasePlan, PlanSchedule


def day_records(scenario: Scenario, config: IntersectionConfig, seed: Optional[int] = None) -> List[VehicleRecord]:
    """Every vehicle of the day; period k and street s draw from their own sub-streams of the seed."""
    seed = scenario.master_seed if seed is None else seed
    flows = scenario.flow_matrix()
    records: List[VehicleRecord] = []
    for k in range(scenario.num_periods):
        records.extend(
            period_records(
                flows[k],
                scenario.turn_fractions_at(k),
                period_start=k * scenario.period_s,
                period_len=scenario.period_s,
                seed=seed,
                period_key=k,
                first_id=len(records),
                lane_bias=config.lane_bias,
            )
        )
    return records


def build_day_stream(scenario: Scenario, config: IntersectionConfig, seed: Optional[int] = None) -> ArrivalStream:
    return ArrivalStream.from_records(day_records(scenario, config, seed), config)


class SignalBenchmarkPipeline:
    """
    Drives one controller over a scenario, period by period.

    Per period:
    - Build the control context from the previous period's sensor frame
    - Ask the controller for a decision
    - Install its plan on every cycle that starts inside the period
    - Simulate the period on the shared arrival stream
    - Read the sensors (FIR/FOR) for the next decision
    """

    def __init__(
        self,
        scenario: Scenario,
        controller: str,
        config: Optional[IntersectionConfig] = None,
        rulebase: Optional[RuleBase] = None,
        seed: Optional[int] = None,
        segment_len: int = 4,
        stream: Optional[ArrivalStream] = None,
    ) -> None:
        self.scenario = scenario
        self.config = config or IntersectionConfig(period_s=scenario.period_s)
        if self.config.period_s != scenario.period_s:
            raise ConfigurationError(
                f"Scenario periods are {scenario.period_s}s but the intersection is configured for {self.config.period_s}s."
            )
        self.seed = scenario.master_seed if seed is None else int(seed)

        self.controller: Controller = build_controller(
            controller,
            self.config,
            scenario.flow_matrix(),
            rulebase=rulebase,
            segment_len=segment_len,
        )
        self.stream = stream if stream is not None else build_day_stream(scenario, self.config, self.seed)

        self.state = IntersectionState.empty(self.config, self.stream, track_exits=True)
        self.timeline: Dict[int, PhasePlan] = {}
        self.frames: List[SensorFrame] = []
        self.results: List[SimResult] = []
        self.periods: List[PeriodRecord] = []

        logger.info(
            f"SignalBenchmarkPipeline initialized: controller={self.controller.name.value}, "
            f"scenario={scenario.name}, seed={self.seed}, vehicles={len(self.stream.records)}"
        )

    # -----------------------------
    # Public API
    # -----------------------------
    def run(self) -> RunReport:
        started = time.perf_counter()
        for k in range(self.scenario.num_periods):
            self.run_period(k)
        elapsed = time.perf_counter() - started

        report = self._report(elapsed)
        logger.info(
            f"{self.controller.name.value}: total delay {report.total_delay} veh-s, max SQS {report.max_sqs}, "
            f"{report.candidates_evaluated} candidates in {elapsed:.2f}s"
        )
        return report

    def run_period(self, period_index: int) -> SimResult:
        if period_index != len(self.results):
            raise PlanScheduleError(f"Periods run in order; expected {len(self.results)}, got {period_index}.")

        ctx = self._context(period_index)
        decision = self.controller.decide(ctx)
        self._install(period_index, decision)

        start = period_index * self.config.period_s
        self.state.reset_period_counts()
        result = run_horizon(self.config, self.state, self.stream, self._schedule(start), self.config.period_s)

        frame = SensorFrame(
            period_index=period_index,
            fir=tuple(int(v) for v in self.state.in_count[0, 0]),
            for_=tuple(int(v) for v in self.state.out_count[0, 0]),
        )
        self.frames.append(frame)
        self.results.append(result)
        self.periods.append(
            PeriodRecord(
                period_index=period_index,
                green1_s=decision.green1_s,
                candidates_evaluated=decision.candidates_evaluated,
                predicted_delay=decision.predicted_delay,
                delay=result.total_delay,
                max_sqs=result.max_sqs,
                queue_inconsistent=bool(ctx.queue.any_inconsistent) if ctx.queue else False,
            )
        )
        return result

    def waiting_times(self) -> np.ndarray:
        return vehicle_waiting_times(self.stream, self.state, self.state.tick)

    # -----------------------------
    # SRP helpers
    # -----------------------------
    def _context(self, period_index: int) -> ControlContext:
        frame: Optional[SensorFrame] = self.frames[-1] if self.frames else None
        queue: Optional[QueueEstimate] = None
        if self.frames:
            fir, out = histories(self.frames, self.config.num_streets)
            queue = estimate_queue(fir, out)
        return ControlContext(
            period_index=period_index,
            frame=frame,
            queue=queue,
            turn_fractions=self.scenario.turn_fractions_at(period_index),
            seed=rng_seed(self.seed, period_index),
        )

    def _install(self, period_index: int, decision: ControllerDecision) -> None:
        cycles = period_cycles(self.config, period_index)
        if len(decision.plans) < len(cycles):
            raise PlanScheduleError(
                f"Decision for period {period_index} has {len(decision.plans)} plans for {len(cycles)} cycles."
            )
        for cycle, plan in zip(cycles, decision.plans):
            self.timeline[cycle] = plan

    def _schedule(self, start_tick: int) -> PlanSchedule:
        cycles = self.config.cycles_touching(start_tick, self.config.period_s)
        missing = [c for c in cycles if c not in self.timeline]
        if missing:
            raise PlanScheduleError(f"No plan installed for cycles {missing}.")
        return PlanSchedule(first_cycle=cycles.start, plans=tuple(self.timeline[c] for c in cycles))

    def _report(self, elapsed: float) -> RunReport:
        sqs = np.concatenate([r.sqs_series for r in self.results]) if self.results else np.zeros(0, dtype=np.int64)
        delay_per_street = np.sum([r.delay_per_street for r in self.results], axis=0)
        critical = np.sum([r.critical_ticks for r in self.results], axis=0)
        return RunReport(
            controller=self.controller.name.value,
            scenario=self.scenario.name,
            seed=self.seed,
            periods=tuple(self.periods),
            delay_per_street=tuple(int(v) for v in delay_per_street),
            critical_ticks=tuple(int(v) for v in critical),
            vehicles_entered=int(self.state.arrived.sum()),
            vehicles_processed=int(sum(r.vehicles_processed for r in self.results)),
            sqs_series=sqs,
            start_tick=0,
            wall_clock_s=elapsed,
        )


def run_controller(
    scenario: Scenario,
    controller: str,
    config: Optional[IntersectionConfig] = None,
    rulebase: Optional[RuleBase] = None,
    seed: Optional[int] = None,
    segment_len: int = 4,
    stream: Optional[ArrivalStream] = None,
) -> RunReport:
    return SignalBenchmarkPipeline(
        scenario, controller, config=config, rulebase=rulebase, seed=seed, segment_len=segment_len, stream=stream
    ).run()
