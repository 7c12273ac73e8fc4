# tests/test_report.py
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from scenario_io.report import PeriodRecord, RunReport, comparison_table, export_report, improvement_pct


def _report(controller: str, delays, sqs, candidates=1) -> RunReport:
    periods = tuple(
        PeriodRecord(period_index=k, green1_s=56, candidates_evaluated=candidates, predicted_delay=None, delay=d, max_sqs=0)
        for k, d in enumerate(delays)
    )
    total = sum(delays)
    return RunReport(
        controller=controller,
        scenario="unit",
        seed=1,
        periods=periods,
        delay_per_street=(total, 0, 0, 0),
        critical_ticks=(0, 0, 0, 0),
        vehicles_entered=10,
        vehicles_processed=10,
        sqs_series=np.asarray(sqs, dtype=np.int64),
        start_tick=0,
        wall_clock_s=0.25,
    )


def test_totals_are_sums_of_periods():
    r = _report("fixed", [100, 50, 25], [1, 4, 2], candidates=3)
    assert r.total_delay == 175
    assert r.per_period_delay == [100, 50, 25]
    assert r.max_sqs == 4
    assert r.candidates_evaluated == 9


def test_fixed_alone_improves_nothing(tmp_path: Path):
    export_report([_report("fixed", [100], [3, 2])], tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
    [row] = summary["controllers"]
    assert row["delay_improvement_pct"] == 0.0
    assert row["queue_improvement_pct"] == 0.0
    assert summary["baseline"] == "fixed"


def test_half_the_delay_is_fifty_percent(tmp_path: Path):
    reports = [_report("fixed", [400], [8, 4]), _report("realtime", [200], [2, 6])]
    export_report(reports, tmp_path)
    rows = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))["controllers"]
    assert rows[1]["delay_improvement_pct"] == 50.0
    assert rows[1]["queue_improvement_pct"] == 25.0


def test_zero_baseline_reports_zero_improvement():
    assert improvement_pct(0, 0) == 0.0
    assert improvement_pct(30, 120) == pytest.approx(75.0)


def test_series_rows_sorted_by_tick_then_controller(tmp_path: Path):
    reports = [_report(name, [1], [t + i for t in range(3)]) for i, name in enumerate(["fixed", "fuzzy", "realtime"])]
    paths = export_report(reports, tmp_path)

    with paths["series"].open(encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["tick", "controller", "sqs"]
    assert rows[1:4] == [["0", "fixed", "0"], ["0", "fuzzy", "1"], ["0", "realtime", "2"]]
    assert len(rows) == 1 + 9
    assert [int(r[0]) for r in rows[1:]] == sorted(int(r[0]) for r in rows[1:])


def test_wall_clock_kept_out_of_summary(tmp_path: Path):
    paths = export_report([_report("fixed", [10], [1])], tmp_path)
    assert "wall" not in paths["summary"].read_text(encoding="utf-8")
    assert json.loads(paths["timing"].read_text(encoding="utf-8")) == {"fixed": 0.25}


def test_text_summary_holds_the_table(tmp_path: Path):
    reports = [_report("fixed", [400], [8]), _report("fuzzyreal", [100], [2], candidates=11)]
    paths = export_report(reports, tmp_path, fmt="text")
    text = paths["summary"].read_text(encoding="utf-8")
    assert paths["summary"].name == "summary.txt"
    assert "fuzzyreal" in text and "75.00" in text
    assert comparison_table(reports).splitlines()[0].startswith("controller")


def test_export_needs_reports_and_a_known_format(tmp_path: Path):
    with pytest.raises(ValueError):
        export_report([], tmp_path)
    with pytest.raises(ValueError):
        export_report([_report("fixed", [1], [0])], tmp_path, fmt="xml")
