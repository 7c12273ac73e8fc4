# scenario_parser.py
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from Services import settings
from Services.errors import ScenarioError
from Services.logger_config import logger
from scenario_io.scenario import Scenario, TurnShare
from simcore.intersection import NUM_STREETS


# -----------------------------
# Regex (compiled once)
# -----------------------------
RE_COMMENT = re.compile(r"\s*#.*$")
RE_ENTRY = re.compile(r"^(?P<key>[A-Za-z_][\w.]*)\s*=\s*(?P<value>.*)$")
RE_STREET_KEY = re.compile(r"^(?P<kind>flow|turns|left|right)\.R(?P<street>\d+)$", re.IGNORECASE)

SCALAR_KEYS = {"name", "start", "end", "period_s", "seed"}

PathLike = Union[str, Path]


@dataclass(frozen=True)
class _Entry:
    line: int
    key: str
    value: str


# -----------------------------
# SRP helpers
# -----------------------------
def _logical_lines(text: str) -> List[_Entry]:
    """key = value entries; a value ending in ',' continues on the next line."""
    entries: List[_Entry] = []
    pending: Optional[_Entry] = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = RE_COMMENT.sub("", raw).strip()
        if not line:
            continue
        if pending is not None:
            pending = _Entry(pending.line, pending.key, pending.value + line)
        else:
            m = RE_ENTRY.match(line)
            if not m:
                raise ScenarioError(f"Expected 'key = value', got '{line}'.", line=line_no)
            pending = _Entry(line_no, m.group("key"), m.group("value").strip())

        if not pending.value.endswith(","):
            entries.append(pending)
            pending = None

    if pending is not None:
        raise ScenarioError("Value list ends with a dangling ','.", line=pending.line, field=pending.key)
    return entries


def _int_list(entry: _Entry) -> List[int]:
    values: List[int] = []
    for item in entry.value.split(","):
        item = item.strip()
        try:
            v = int(item)
        except ValueError:
            raise ScenarioError(f"'{item}' is not a whole vehicle count.", line=entry.line, field=entry.key) from None
        if v < 0:
            raise ScenarioError(f"Negative flow {v}.", line=entry.line, field=entry.key)
        values.append(v)
    return values


def _float_list(entry: _Entry) -> List[float]:
    try:
        return [float(item) for item in entry.value.split(",")]
    except ValueError:
        raise ScenarioError(f"'{entry.value}' is not a list of percentages.", line=entry.line, field=entry.key) from None


def _scalar_field(entry: _Entry) -> Tuple[str, Any]:
    key = entry.key.lower()
    if key == "name":
        return "name", entry.value
    if key == "start":
        return "start_time", entry.value
    if key == "end":
        return "end_time", entry.value
    try:
        number = int(entry.value)
    except ValueError:
        raise ScenarioError(f"'{entry.value}' is not an integer.", line=entry.line, field=entry.key) from None
    return ("period_s", number) if key == "period_s" else ("master_seed", number)


def _model_error(e: ValidationError, lines: Dict[str, int]) -> ScenarioError:
    err = e.errors()[0]
    loc = [str(p) for p in err.get("loc", ())]
    field = ".".join(loc) or None
    msg = str(err.get("msg", e)).removeprefix("Value error, ")

    line = None
    if loc and loc[0] in {"flows", "turns"} and len(loc) > 1 and loc[1].isdigit():
        street = int(loc[1]) + 1
        key = ("flow" if loc[0] == "flows" else "turns") + f".R{street}"
        line, field = lines.get(key.lower()), key
    elif loc:
        line = lines.get(loc[0].lower())
    if line is None:
        m = re.search(r"street (\d+)", msg)
        if m:
            key = f"flow.R{m.group(1)}"
            line = lines.get(key.lower())
            field = field or key
    return ScenarioError(msg, line=line, field=field)


# -----------------------------
# Public API
# -----------------------------
def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    entries = _logical_lines(text)

    fields: Dict[str, Any] = {"name": default_name}
    flows: Dict[int, List[int]] = {}
    turns: Dict[int, TurnShare] = {}
    left: Dict[int, List[float]] = {}
    right: Dict[int, List[float]] = {}
    lines: Dict[str, int] = {}

    for entry in entries:
        key_l = entry.key.lower()
        if key_l in lines:
            raise ScenarioError(f"Duplicate key (first set on line {lines[key_l]}).", line=entry.line, field=entry.key)
        lines[key_l] = entry.line

        if key_l in SCALAR_KEYS:
            name, value = _scalar_field(entry)
            fields[name] = value
            lines[name] = entry.line
            continue

        m = RE_STREET_KEY.match(entry.key)
        if not m:
            raise ScenarioError("Unknown key.", line=entry.line, field=entry.key)
        street = int(m.group("street"))
        if not 1 <= street <= NUM_STREETS:
            raise ScenarioError(f"Street must be R1..R{NUM_STREETS}.", line=entry.line, field=entry.key)

        kind = m.group("kind").lower()
        if kind == "flow":
            flows[street] = _int_list(entry)
        elif kind == "turns":
            shares = _float_list(entry)
            if len(shares) != 2:
                raise ScenarioError("Expected 'left%, right%'.", line=entry.line, field=entry.key)
            try:
                turns[street] = TurnShare(left_pct=shares[0], right_pct=shares[1])
            except ValidationError as e:
                msg = str(e.errors()[0].get("msg", e)).removeprefix("Value error, ")
                raise ScenarioError(msg, line=entry.line, field=entry.key) from None
        elif kind == "left":
            left[street] = _float_list(entry)
        else:
            right[street] = _float_list(entry)

    missing = [f"flow.R{s}" for s in range(1, NUM_STREETS + 1) if s not in flows]
    if missing:
        raise ScenarioError(f"Missing flow rows: {', '.join(missing)}.", field=missing[0])

    _check_lengths(flows, lines)

    fields["flows"] = [flows[s] for s in range(1, NUM_STREETS + 1)]
    fields["turns"] = [turns.get(s, TurnShare()) for s in range(1, NUM_STREETS + 1)]
    fields["left_profile"] = left
    fields["right_profile"] = right
    try:
        return Scenario(**fields)
    except ValidationError as e:
        raise _model_error(e, lines) from None


def _check_lengths(flows: Dict[int, List[int]], lines: Dict[str, int]) -> None:
    """Name the street whose row disagrees with the majority length."""
    lengths = [len(flows[s]) for s in sorted(flows)]
    expected = max(set(lengths), key=lengths.count)
    for s in sorted(flows):
        if len(flows[s]) != expected:
            key = f"flow.R{s}"
            raise ScenarioError(
                f"Street {s} has {len(flows[s])} flow periods, the other streets have {expected}.",
                line=lines.get(key.lower()),
                field=key,
            )


def resolve_scenario_path(name_or_path: PathLike) -> Path:
    """A path as given, else a bundled scenario name looked up in the scenario directory."""
    p = Path(name_or_path)
    if p.is_file():
        return p
    bundled = Path(settings.SCENARIO_DIR) / p.name
    for candidate in (bundled, bundled.with_name(bundled.name + settings.SCENARIO_SUFFIX)):
        if candidate.is_file():
            return candidate
    raise ScenarioError(f"Scenario not found: '{name_or_path}' (also looked in {settings.SCENARIO_DIR}).")


def load_scenario(path: PathLike) -> Scenario:
    p = resolve_scenario_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario {p}: {e}") from None

    try:
        scenario = parse_scenario(text, default_name=p.stem)
    except ScenarioError as e:
        raise ScenarioError(f"{p}: {e.message}", line=e.line, field=e.field) from None

    logger.info(f"Loaded scenario '{scenario.name}' from {p}: {scenario.num_periods} periods.")
    return scenario


# -----------------------------
# Writer
# -----------------------------
def _fmt_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _wrap(key: str, values: List[str], per_line: int = 16) -> List[str]:
    chunks = [values[i : i + per_line] for i in range(0, len(values), per_line)] or [[]]
    out = []
    for i, chunk in enumerate(chunks):
        head = f"{key} = " if i == 0 else " " * (len(key) + 3)
        tail = "," if i < len(chunks) - 1 else ""
        out.append(head + ", ".join(chunk) + tail)
    return out


def dump_scenario(scenario: Scenario) -> str:
    lines = [
        f"name = {scenario.name}",
        f"start = {scenario.start_time}",
        f"end = {scenario.end_time}",
        f"period_s = {scenario.period_s}",
        f"seed = {scenario.master_seed}",
        "",
    ]
    for s, share in enumerate(scenario.turns, start=1):
        lines.append(f"turns.R{s} = {_fmt_number(share.left_pct)}, {_fmt_number(share.right_pct)}")
    for s, row in enumerate(scenario.flows, start=1):
        lines.append("")
        lines.extend(_wrap(f"flow.R{s}", [str(v) for v in row]))
    for label, profile in (("left", scenario.left_profile), ("right", scenario.right_profile)):
        for s in sorted(profile):
            lines.append("")
            lines.extend(_wrap(f"{label}.R{s}", [_fmt_number(v) for v in profile[s]]))
    return "\n".join(lines) + "\n"


def save_scenario(scenario: Scenario, path: PathLike) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dump_scenario(scenario), encoding="utf-8")
    return p
