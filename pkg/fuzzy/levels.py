# levels.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import skfuzzy as fuzz


# Literal values: 0.3 + 0.6 * i is not exact in binary and would break gridpoint lookups.
LEVEL_VALUES: Tuple[float, ...] = (0.3, 0.9, 1.5, 2.1, 2.7)
DENSITY_MAX = 3.0


@dataclass(frozen=True)
class DensityLevel:
    index: int
    level_value: float
    low: float
    high: float

    def contains(self, density: float) -> bool:
        if self.index == 0:
            return self.low <= density <= self.high
        return self.low < density <= self.high

    @property
    def label(self) -> str:
        return f"{self.level_value:.1f}"


DENSITY_LEVELS: Tuple[DensityLevel, ...] = (
    DensityLevel(0, 0.3, 0.0, 0.6),
    DensityLevel(1, 0.9, 0.6, 1.2),
    DensityLevel(2, 1.5, 1.2, 1.8),
    DensityLevel(3, 2.1, 1.8, 2.4),
    DensityLevel(4, 2.7, 2.4, 3.0),
)


def level_of(density: float) -> DensityLevel:
    d = min(max(float(density), 0.0), DENSITY_MAX)
    for level in DENSITY_LEVELS:
        if level.contains(d):
            return level
    return DENSITY_LEVELS[-1]


def level_index(value: float) -> int:
    """Index of a printed level value such as 0.3 or 2.7."""
    rounded = round(float(value), 1)
    for level in DENSITY_LEVELS:
        if abs(level.level_value - rounded) < 1e-9:
            return level.index
    raise ValueError(f"{value} is not one of the density levels {LEVEL_VALUES}.")


def _memberships(x: np.ndarray) -> np.ndarray:
    v = LEVEL_VALUES
    columns = [fuzz.trapmf(x, [0.0, 0.0, v[0], v[1]])]
    for i in range(1, len(v) - 1):
        columns.append(fuzz.trimf(x, [v[i - 1], v[i], v[i + 1]]))
    columns.append(fuzz.trapmf(x, [v[-2], v[-1], DENSITY_MAX, DENSITY_MAX]))
    return np.stack(columns, axis=-1)


def fuzzify(densities: Sequence[float]) -> np.ndarray:
    """
    Membership weights over the five levels, one row per street.

    Triangles peak at each level and reach zero at the neighbouring peaks; the
    outer levels are shouldered. At most two weights per row are nonzero and
    every row sums to 1.
    """
    x = np.clip(np.atleast_1d(np.asarray(densities, dtype=float)), 0.0, DENSITY_MAX)
    weights = _memberships(x)
    return weights / weights.sum(axis=-1, keepdims=True)
