# tests/test_density.py
from __future__ import annotations

import numpy as np
import pytest

from Services.errors import ConfigurationError
from simcore.density import compute_density, raw_density
from simcore.intersection import IntersectionConfig


def test_idle_street_has_zero_density(config):
    assert compute_density([0, 0, 0, 0], [0, 0, 0, 0], config) == (0.0, 0.0, 0.0, 0.0)


def test_density_formula_before_lane_rescale():
    cfg = IntersectionConfig(street_capacity_per_period=900)
    assert raw_density([10], [60], cfg)[0] == pytest.approx(0.15)
    assert compute_density([10], [60], cfg)[0] == pytest.approx(0.45)


@pytest.mark.parametrize("fir", [1350, 2000])
def test_saturated_street_clamps_to_top(config, fir):
    assert compute_density([0], [fir], config)[0] == pytest.approx(3.0)


def test_zero_capacity_is_a_configuration_error():
    cfg = IntersectionConfig(street_capacity_per_period=0)
    with pytest.raises(ConfigurationError):
        compute_density([1], [1], cfg)


def test_randomized_densities_follow_the_formula():
    rng = np.random.default_rng(7)
    for period_s in (600, 900, 1800):
        cfg = IntersectionConfig(period_s=period_s)
        qr = rng.integers(0, 200, size=(250, 4))
        fir = rng.integers(0, 1500, size=(250, 4))
        for q, f in zip(qr, fir):
            got = raw_density(q.tolist(), f.tolist(), cfg)
            expected = (cfg.cycles_per_period * q + f) / cfg.street_capacity_per_period
            np.testing.assert_allclose(got, expected, rtol=1e-12, atol=0)

            scaled = compute_density(q.tolist(), f.tolist(), cfg)
            np.testing.assert_allclose(scaled, np.clip(expected * 3, 0.0, 3.0), rtol=1e-12, atol=0)


def test_density_clamps_at_both_bounds(config):
    low, high = compute_density([-40, 400], [0, 0], config)
    assert low == 0.0
    assert high == 3.0
