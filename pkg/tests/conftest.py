# tests/conftest.py
from __future__ import annotations

import sys
from pathlib import Path
from typing import List, Sequence

import pytest


# Make repo root importable so `simcore.*`, `controllers.*`, `fuzzy.*` work in tests.
PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from fuzzy.rulebase import RuleBase, all_level_keys, key_values, round_half_up  # noqa: E402
from simcore.arrivals import VehicleRecord  # noqa: E402
from simcore.intersection import Intent, IntersectionConfig  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-day or rule-base-builder runs (deselect with -m 'not slow')")


@pytest.fixture
def config() -> IntersectionConfig:
    return IntersectionConfig()


@pytest.fixture
def published_rules_path() -> Path:
    return PROJECT_ROOT / "rulebases" / "published_rules.csv"


@pytest.fixture
def proportional_rulebase() -> RuleBase:
    """Complete rule base whose green follows the phase-1 share of density."""
    entries = {}
    for key in all_level_keys():
        d1, d2, d3, d4 = key_values(key)
        green = round_half_up(112 * (d1 + d3) / (d1 + d2 + d3 + d4))
        entries[key] = min(max(green, 5), 112)
    return RuleBase(entries=entries, metadata={"source": "proportional"})


def _make_records(specs: Sequence[tuple]) -> List[VehicleRecord]:
    out = []
    for i, row in enumerate(specs):
        street, lane, entry = row[:3]
        intent = row[3] if len(row) > 3 else Intent.STRAIGHT
        out.append(VehicleRecord(id=i, street=street, lane=lane, entry_tick=entry, intent=intent))
    return out


@pytest.fixture
def make_records():
    """(street, lane, entry_tick[, intent]) tuples to records with ids in order."""
    return _make_records
