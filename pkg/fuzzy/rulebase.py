# rulebase.py
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from Services.errors import RuleBaseError
from Services.logger_config import logger
from fuzzy.levels import DENSITY_LEVELS, LEVEL_VALUES, fuzzify, level_index
from simcore.intersection import IntersectionConfig


RULEBASE_HEADER = ("d1", "d2", "d3", "d4", "green")
NUM_LEVELS = len(LEVEL_VALUES)
NUM_RULE_STREETS = 4
FULL_SIZE = NUM_LEVELS ** NUM_RULE_STREETS
BUILDER_VERSION = "2"

LevelKey = Tuple[int, int, int, int]
PathLike = Union[str, Path]


def all_level_keys() -> Iterator[LevelKey]:
    """Every level tuple in lexicographic order (the CSV row order)."""
    return itertools.product(range(NUM_LEVELS), repeat=NUM_RULE_STREETS)


def key_values(key: LevelKey) -> Tuple[float, ...]:
    return tuple(DENSITY_LEVELS[i].level_value for i in key)


@dataclass(frozen=True)
class RuleBase:
    entries: Dict[LevelKey, int]
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def is_complete(self) -> bool:
        return len(self.entries) == FULL_SIZE

    def green_for(self, key: LevelKey) -> int:
        try:
            return self.entries[key]
        except KeyError:
            raise RuleBaseError(
                f"Rule base has no rule for densities {key_values(key)}; "
                "build a complete one with the build-rulebase command."
            ) from None

    def validate(self, config: IntersectionConfig, require_complete: bool = True) -> None:
        if require_complete and not self.is_complete:
            raise RuleBaseError(
                f"Rule base holds {len(self.entries)} rules, expected {FULL_SIZE}. "
                "Run the build-rulebase command to produce a complete one."
            )
        for key, green in self.entries.items():
            if not config.min_green_s <= green <= config.max_green_s:
                raise RuleBaseError(
                    f"Rule {key_values(key)} -> {green}s is outside [{config.min_green_s}, {config.max_green_s}]."
                )


# -----------------------------
# CSV io
# -----------------------------
def load_rulebase(
    path: PathLike,
    config: Optional[IntersectionConfig] = None,
    require_complete: bool = True,
) -> RuleBase:
    p = Path(path)
    if not p.is_file():
        raise RuleBaseError(f"Rule base file not found: {p}. Generate one with the build-rulebase command.")

    entries: Dict[LevelKey, int] = {}
    with p.open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != RULEBASE_HEADER:
            raise RuleBaseError(f"{p}: header must be {','.join(RULEBASE_HEADER)}, got {header}.")
        for line_no, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != len(RULEBASE_HEADER):
                raise RuleBaseError(f"{p}:{line_no}: expected {len(RULEBASE_HEADER)} columns, got {len(row)}.")
            try:
                key = tuple(level_index(float(v)) for v in row[:4])
                green = int(row[4])
            except ValueError as e:
                raise RuleBaseError(f"{p}:{line_no}: {e}") from None
            if key in entries:
                raise RuleBaseError(f"{p}:{line_no}: duplicate rule for densities {key_values(key)}.")
            entries[key] = green

    rulebase = RuleBase(entries=entries, metadata=_load_metadata(p))
    if config is not None:
        rulebase.validate(config, require_complete=require_complete)
    elif require_complete and not rulebase.is_complete:
        rulebase.validate(IntersectionConfig(), require_complete=True)

    logger.info(f"Loaded rule base {p} with {len(entries)} rules.")
    return rulebase


def save_rulebase(rulebase: RuleBase, path: PathLike) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RULEBASE_HEADER)
        for key in sorted(rulebase.entries):
            writer.writerow([f"{v:.1f}" for v in key_values(key)] + [int(rulebase.entries[key])])
    if rulebase.metadata:
        _metadata_path(p).write_text(json.dumps(rulebase.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return p


def _metadata_path(p: Path) -> Path:
    return p.with_name(p.name + ".meta.json")


def _load_metadata(p: Path) -> Dict[str, str]:
    meta_path = _metadata_path(p)
    if not meta_path.is_file():
        return {}
    try:
        data = json.loads(meta_path.read_text(encoding="utf-8"))
        return {str(k): str(v) for k, v in data.items()} if isinstance(data, dict) else {}
    except Exception:
        logger.warning(f"Ignoring unreadable rule-base metadata {meta_path}.", exc_info=True)
        return {}


# -----------------------------
# Inference
# -----------------------------
def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def infer_green(
    densities: Sequence[float],
    rulebase: RuleBase,
    config: Optional[IntersectionConfig] = None,
) -> int:
    """
    Phase-1 green for four street densities.

    Fires every rule whose levels all have nonzero membership (at most 16),
    weights each by the product of memberships and returns the weighted mean
    green, rounded to whole seconds and clamped to the green bounds.
    """
    config = config or IntersectionConfig()
    if len(densities) != NUM_RULE_STREETS:
        raise ValueError(f"Expected {NUM_RULE_STREETS} densities, got {len(densities)}.")

    weights = fuzzify(densities)
    active = [np.nonzero(row)[0] for row in weights]

    num = 0.0
    den = 0.0
    for key in itertools.product(*active):
        w = float(np.prod([weights[s, k] for s, k in enumerate(key)]))
        if w <= 0.0:
            continue
        num += w * rulebase.green_for(tuple(int(k) for k in key))
        den += w

    if den == 0.0:
        raise RuleBaseError(f"No rule fired for densities {tuple(densities)}.")
    green = round_half_up(num / den)
    return min(max(green, config.min_green_s), config.max_green_s)
