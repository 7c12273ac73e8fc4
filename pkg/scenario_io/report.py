# report.py
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from Services.logger_config import logger


SUMMARY_FORMATS = ("json", "text")
SERIES_HEADER = ("tick", "controller", "sqs")
BASELINE_CONTROLLER = "fixed"

PathLike = Union[str, Path]


@dataclass(frozen=True)
class PeriodRecord:
    period_index: int
    green1_s: int
    candidates_evaluated: int
    predicted_delay: Optional[int]
    delay: int
    max_sqs: int
    queue_inconsistent: bool = False


@dataclass(frozen=True)
class RunReport:
    controller: str
    scenario: str
    seed: int
    periods: Tuple[PeriodRecord, ...]
    delay_per_street: Tuple[int, ...]
    critical_ticks: Tuple[int, ...]
    vehicles_entered: int
    vehicles_processed: int
    sqs_series: np.ndarray = field(repr=False, compare=False)
    start_tick: int = 0
    wall_clock_s: float = field(default=0.0, compare=False)

    @property
    def total_delay(self) -> int:
        return int(sum(p.delay for p in self.periods))

    @property
    def max_sqs(self) -> int:
        return int(self.sqs_series.max()) if self.sqs_series.size else 0

    @property
    def candidates_evaluated(self) -> int:
        return int(sum(p.candidates_evaluated for p in self.periods))

    @property
    def per_period_delay(self) -> List[int]:
        return [p.delay for p in self.periods]


# -----------------------------
# Improvement arithmetic
# -----------------------------
def improvement_pct(value: float, baseline: float) -> float:
    """100 * (1 - value / baseline); 0 when the baseline itself is 0."""
    if baseline == 0:
        return 0.0
    return 100.0 * (1.0 - value / baseline)


def _baseline(reports: Sequence[RunReport]) -> Optional[RunReport]:
    return next((r for r in reports if r.controller == BASELINE_CONTROLLER), None)


def summary_rows(reports: Sequence[RunReport]) -> List[Dict[str, Any]]:
    base = _baseline(reports)
    rows = []
    for r in reports:
        rows.append(
            {
                "controller": r.controller,
                "total_delay": r.total_delay,
                "max_sqs": r.max_sqs,
                "delay_improvement_pct": None if base is None else round(improvement_pct(r.total_delay, base.total_delay), 2),
                "queue_improvement_pct": None if base is None else round(improvement_pct(r.max_sqs, base.max_sqs), 2),
                "candidates_evaluated": r.candidates_evaluated,
                "vehicles_entered": r.vehicles_entered,
                "vehicles_processed": r.vehicles_processed,
                "delay_per_street": list(r.delay_per_street),
                "critical_ticks": list(r.critical_ticks),
                "periods": [
                    {
                        "period": p.period_index,
                        "green1_s": p.green1_s,
                        "candidates": p.candidates_evaluated,
                        "predicted_delay": p.predicted_delay,
                        "delay": p.delay,
                        "max_sqs": p.max_sqs,
                        "queue_inconsistent": p.queue_inconsistent,
                    }
                    for p in r.periods
                ],
            }
        )
    return rows


def comparison_table(reports: Sequence[RunReport]) -> str:
    header = f"{'controller':<12}{'total_delay':>14}{'max_sqs':>10}{'delay_impr%':>13}{'queue_impr%':>13}{'candidates':>12}"
    lines = [header, "-" * len(header)]
    for row in summary_rows(reports):
        d = row["delay_improvement_pct"]
        q = row["queue_improvement_pct"]
        lines.append(
            f"{row['controller']:<12}{row['total_delay']:>14}{row['max_sqs']:>10}"
            f"{'n/a' if d is None else f'{d:.2f}':>13}{'n/a' if q is None else f'{q:.2f}':>13}"
            f"{row['candidates_evaluated']:>12}"
        )
    return "\n".join(lines)


# -----------------------------
# Export
# -----------------------------
def write_series(reports: Sequence[RunReport], path: PathLike) -> Path:
    """Per-tick SQS of every run, ordered by tick then controller name."""
    rows = []
    for r in reports:
        ticks = r.start_tick + np.arange(r.sqs_series.shape[0])
        rows.extend(zip(ticks.tolist(), [r.controller] * len(ticks), r.sqs_series.tolist()))
    rows.sort(key=lambda row: (row[0], row[1]))

    p = Path(path)
    with p.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SERIES_HEADER)
        writer.writerows(rows)
    return p


def export_report(reports: Sequence[RunReport], out_dir: PathLike, fmt: str = "json") -> Dict[str, Path]:
    """
    Write the run summary, the SQS series CSV and the wall-clock file into `out_dir`.

    The summary and series carry no timing, so they are identical across reruns.
    """
    if not reports:
        raise ValueError("export_report needs at least one RunReport.")
    if fmt not in SUMMARY_FORMATS:
        raise ValueError(f"Unknown report format '{fmt}'; choose one of {', '.join(SUMMARY_FORMATS)}.")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    if fmt == "json":
        summary_path = out / "summary.json"
        payload = {
            "scenario": reports[0].scenario,
            "seed": reports[0].seed,
            "baseline": BASELINE_CONTROLLER if _baseline(reports) else None,
            "controllers": summary_rows(reports),
        }
        summary_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        summary_path = out / "summary.txt"
        summary_path.write_text(
            f"scenario: {reports[0].scenario}\nseed: {reports[0].seed}\n\n{comparison_table(reports)}\n",
            encoding="utf-8",
        )
    written["summary"] = summary_path
    written["series"] = write_series(reports, out / "sqs_series.csv")

    timing_path = out / "timing.json"
    timing_path.write_text(
        json.dumps({r.controller: round(r.wall_clock_s, 3) for r in reports}, indent=2) + "\n", encoding="utf-8"
    )
    written["timing"] = timing_path

    logger.info(f"Reports for {len(reports)} controller(s) written to {out}")
    return written
