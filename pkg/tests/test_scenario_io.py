# tests/test_scenario_io.py
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from Services.errors import ScenarioError
from scenario_io.scenario import Scenario, TurnShare
from scenario_io.scenario_parser import dump_scenario, load_scenario, parse_scenario, save_scenario


def _flow_line(street: int, values) -> str:
    return f"flow.R{street} = " + ", ".join(str(v) for v in values)


def _zero_day(lengths=(64, 64, 64, 64)) -> str:
    lines = ["name = empty", "seed = 3"]
    lines += [_flow_line(s, [0] * n) for s, n in enumerate(lengths, start=1)]
    return "\n".join(lines) + "\n"


def test_zero_demand_day_loads(tmp_path: Path):
    path = tmp_path / "empty.scn"
    path.write_text(_zero_day(), encoding="utf-8")
    scenario = load_scenario(path)

    assert scenario.name == "empty"
    assert scenario.num_periods == 64
    assert scenario.master_seed == 3
    assert scenario.flow_matrix().sum() == 0
    assert scenario.start_time == "06:00" and scenario.end_time == "22:00"


def test_short_flow_row_names_its_street():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(_zero_day(lengths=(64, 63, 64, 64)))
    assert exc.value.field == "flow.R2"
    assert exc.value.line == 4
    assert "Street 2" in str(exc.value)


def test_uniformly_wrong_length_is_rejected():
    with pytest.raises(ScenarioError, match="expected 64"):
        parse_scenario(_zero_day(lengths=(60, 60, 60, 60)))


def test_negative_flow_reports_line():
    text = _zero_day().replace("flow.R3 = 0,", "flow.R3 = -4,")
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert exc.value.line == 5
    assert exc.value.field == "flow.R3"


def test_turn_shares_above_100_are_rejected():
    text = _zero_day() + "turns.R1 = 60, 50\n"
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert exc.value.field == "turns.R1"
    assert exc.value.line == 7


@pytest.mark.parametrize(
    "extra, message",
    [
        ("speed = 50\n", "Unknown key"),
        ("flow.R5 = 1\n", "R1..R4"),
        ("seed = 4\n", "Duplicate"),
        ("start 06:00\n", "key = value"),
    ],
)
def test_malformed_lines_are_rejected(extra, message):
    with pytest.raises(ScenarioError, match=message):
        parse_scenario(_zero_day() + extra)


def test_list_values_continue_across_lines():
    text = "\n".join(
        [
            "start = 06:00",
            "end = 07:00",
            "flow.R1 = 1, 2,",
            "          3, 4   # trailing comment",
            _flow_line(2, [0] * 4),
            _flow_line(3, [0] * 4),
            _flow_line(4, [0] * 4),
        ]
    )
    scenario = parse_scenario(text)
    assert scenario.flows[0] == [1, 2, 3, 4]
    assert scenario.num_periods == 4


def test_period_turn_profiles_override_static_shares():
    text = "\n".join(
        [
            "end = 07:00",
            "turns.R1 = 10, 10",
            *[_flow_line(s, [5] * 4) for s in range(1, 5)],
            "left.R1 = 10, 20, 30, 40",
        ]
    )
    scenario = parse_scenario(text)
    assert scenario.turn_fractions_at(2)[0].left_pct == 30
    assert scenario.turn_fractions_at(2)[0].right_pct == 10
    assert scenario.turn_fractions_at(2)[1].left_pct == 0


def test_profile_that_overflows_a_period_is_rejected():
    text = "\n".join(
        ["end = 07:00", "turns.R1 = 10, 50", *[_flow_line(s, [5] * 4) for s in range(1, 5)], "left.R1 = 10, 20, 60, 40"]
    )
    with pytest.raises(ScenarioError, match="period 2"):
        parse_scenario(text)


def test_bundled_scenario_has_two_peaks_on_the_major_pair():
    scenario = load_scenario("abshar_synthetic")
    flows = scenario.flow_matrix()

    assert scenario.num_periods == 64
    assert flows.shape == (64, 4)
    morning, evening = int(np.argmax(flows[:32, 0])), 32 + int(np.argmax(flows[32:, 0]))
    assert morning == 7 and evening == 48
    assert flows[:, 0].max() > 2 * flows[:, 1].max()
    assert flows[:, 2].mean() > flows[:, 3].mean()


def test_dump_and_load_round_trip(tmp_path: Path):
    original = load_scenario("abshar_synthetic")
    path = save_scenario(original, tmp_path / "copy.scn")
    assert load_scenario(path) == original
    assert parse_scenario(dump_scenario(original)) == original


def test_model_validates_programmatic_scenarios():
    with pytest.raises(ValueError):
        Scenario(name="x", end_time="06:30", flows=[[1, 2]] * 3)
    ok = Scenario(name="x", end_time="06:30", flows=[[1, 2]] * 4, turns=[TurnShare(left_pct=10)] * 4)
    assert ok.num_periods == 2
    assert ok.daily_average_flows().tolist() == [1.5] * 4


def test_missing_scenario_file():
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario("no_such_scenario")
