# density.py
from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from Services.errors import ConfigurationError
from simcore.intersection import IntersectionConfig


def raw_density(qr: Sequence[float], fir: Sequence[float], config: IntersectionConfig) -> np.ndarray:
    """(cycles_per_period * QR + FIR) / CR per street, before the lane rescale."""
    cr = config.street_capacity_per_period
    if cr <= 0:
        raise ConfigurationError("street_capacity_per_period must be positive to compute densities.")
    qr_arr = np.asarray(qr, dtype=float)
    fir_arr = np.asarray(fir, dtype=float)
    if qr_arr.shape != fir_arr.shape:
        raise ValueError(f"QR and FIR shapes differ: {qr_arr.shape} vs {fir_arr.shape}.")
    return (config.cycles_per_period * qr_arr + fir_arr) / cr


def compute_density(qr: Sequence[float], fir: Sequence[float], config: IntersectionConfig) -> Tuple[float, ...]:
    """Street densities on the [0, lanes] scale: a saturated street reads 3.0."""
    lanes = config.lanes_per_street
    scaled = np.clip(raw_density(qr, fir, config) * lanes, 0.0, float(lanes))
    return tuple(float(d) for d in scaled)
