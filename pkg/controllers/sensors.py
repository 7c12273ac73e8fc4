# sensors.py
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from Services.errors import SensorDataError
from Services.logger_config import logger


@dataclass(frozen=True)
class SensorFrame:
    """Counts of one data-submission period: FIR at the entry sensor, FOR at the stop line."""

    period_index: int
    fir: Tuple[int, ...]
    for_: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.fir) != len(self.for_):
            raise SensorDataError(f"Frame {self.period_index}: FIR and FOR cover different streets.")
        if any(v < 0 for v in self.fir) or any(v < 0 for v in self.for_):
            raise SensorDataError(f"Frame {self.period_index}: sensor counts cannot be negative.")

    @classmethod
    def empty(cls, period_index: int, num_streets: int = 4) -> "SensorFrame":
        zeros = (0,) * num_streets
        return cls(period_index=period_index, fir=zeros, for_=zeros)


@dataclass(frozen=True)
class QueueEstimate:
    qr: Tuple[int, ...]
    inconsistent: Tuple[bool, ...]

    @property
    def any_inconsistent(self) -> bool:
        return any(self.inconsistent)


def estimate_queue(
    fir_history: Sequence[Sequence[int]],
    for_history: Sequence[Sequence[int]],
) -> QueueEstimate:
    """
    Vehicles between the two sensors of every street: sum(FIR) - sum(FOR).

    Histories are one count series per street. A negative balance means the
    sensors disagree; the estimate is clamped to 0 and flagged.
    """
    if len(fir_history) != len(for_history):
        raise SensorDataError(
            f"FIR history covers {len(fir_history)} streets but FOR history covers {len(for_history)}."
        )

    qr: List[int] = []
    flags: List[bool] = []
    for street, (fir, out) in enumerate(zip(fir_history, for_history), start=1):
        if len(fir) != len(out):
            raise SensorDataError(
                f"Street {street}: FIR history has {len(fir)} periods, FOR history has {len(out)}."
            )
        raw = int(np.sum(np.asarray(fir, dtype=np.int64))) - int(np.sum(np.asarray(out, dtype=np.int64)))
        if raw < 0:
            logger.warning(f"Street {street}: sensor counts disagree (FIR - FOR = {raw}); queue estimate clamped to 0.")
        qr.append(max(raw, 0))
        flags.append(raw < 0)
    return QueueEstimate(qr=tuple(qr), inconsistent=tuple(flags))


def histories(frames: Sequence[SensorFrame], num_streets: int = 4) -> Tuple[List[List[int]], List[List[int]]]:
    """Per-street FIR and FOR series out of a frame log."""
    fir = [[f.fir[s] for f in frames] for s in range(num_streets)]
    out = [[f.for_[s] for f in frames] for s in range(num_streets)]
    return fir, out
