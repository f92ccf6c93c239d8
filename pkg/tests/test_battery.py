from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tclfleet.battery import (
    GeneralizedBattery,
    SignalSeries,
    UnitMismatchError,
    battery_from_fleet,
    is_admissible,
    max_energy_requirement,
    soc_trajectory,
)

DT_4S = 1.0 / 900.0


def _sig(values, dt=1.0, unit="kW", normalized=False):
    return SignalSeries(dt_hours=dt, values=np.asarray(values, dtype=float),
                        unit=unit, normalized=normalized)


def test_cluster_battery_water_heater(water_heater_params):
    # 6.5% of 13.7M households.
    batt = battery_from_fleet(water_heater_params, 20.0, 890500.0)
    assert batt.charge_limit == pytest.approx(211493.75, rel=1e-9)
    assert batt.discharge_limit == pytest.approx(3795756.25, rel=1e-9)
    assert batt.energy_capacity == pytest.approx(534300.0, rel=1e-9)
    assert batt.dissipation == pytest.approx(1.0 / 48.0, rel=1e-12)
    assert not batt.saturated


def test_cluster_battery_fridge(fridge_params):
    # 122.3% of 13.7M households.
    n = 13.7e6 * 1.223
    batt = battery_from_fleet(fridge_params, 20.0, n)
    assert batt.charge_limit == pytest.approx(1628968.06, rel=1e-6)
    assert batt.discharge_limit == pytest.approx(3397561.94, rel=1e-6)
    assert batt.energy_capacity == pytest.approx(3769897.5, rel=1e-6)
    assert batt.dissipation == pytest.approx(1.0 / 54.0, rel=1e-12)


def test_cluster_battery_saturated_flag(ac_params):
    cold = battery_from_fleet(ac_params, 20.0, 100.0)
    assert cold.saturated
    assert cold.charge_limit == 0.0


def test_unit_conversion():
    batt = GeneralizedBattery(energy_capacity=534300.0,
                              charge_limit=211493.75,
                              discharge_limit=3795756.25,
                              dissipation=1.0 / 48.0)
    gw = batt.to("GW")
    assert gw.charge_limit == pytest.approx(0.21149375)
    assert gw.discharge_limit == pytest.approx(3.79575625)
    assert gw.energy_capacity == pytest.approx(0.5343)
    back = gw.to("kW")
    assert back.charge_limit == pytest.approx(batt.charge_limit)
    with pytest.raises(ValueError):
        batt.to("W")


def test_soc_exact_integrator():
    batt = GeneralizedBattery(energy_capacity=1e9, charge_limit=1e9,
                              discharge_limit=1e9, dissipation=0.25)
    u = _sig(np.full(21600, 600.0), dt=DT_4S)
    x = soc_trajectory(batt, u)
    assert len(x) == 21601
    assert x[0] == 0.0
    # Closed form for constant drive: x -> -(u/alpha)(1 - exp(-alpha*t)).
    assert x[-1] == pytest.approx(-2400.0 * (1.0 - math.exp(-6.0)),
                                  rel=1e-9)
    assert x[-1] == pytest.approx(-2394.0509947765295, rel=1e-12)


def test_soc_alpha_zero_is_pure_integral():
    batt = GeneralizedBattery(energy_capacity=1e9, charge_limit=1e9,
                              discharge_limit=1e9, dissipation=0.0)
    u = _sig([1.0, -2.0, 3.0], dt=0.5)
    x = soc_trajectory(batt, u)
    assert np.allclose(x, [0.0, -0.5, 0.5, -1.0], atol=1e-12)


def test_soc_initial_state_decay():
    batt = GeneralizedBattery(energy_capacity=10.0, charge_limit=5.0,
                              discharge_limit=5.0, dissipation=0.5)
    u = _sig([0.0, 0.0], dt=1.0)
    x = soc_trajectory(batt, u, x0=4.0)
    assert x[1] == pytest.approx(4.0 * math.exp(-0.5), rel=1e-12)
    assert x[2] == pytest.approx(4.0 * math.exp(-1.0), rel=1e-12)


def test_admissible_power_violation_index():
    batt = GeneralizedBattery(energy_capacity=100.0, charge_limit=5.0,
                              discharge_limit=8.0, dissipation=0.0)
    report = is_admissible(batt, _sig([1.0, -4.9, 2.0, 8.1, 0.0]))
    assert not report
    assert report.kind == "power"
    assert report.index == 3
    report = is_admissible(batt, _sig([-5.1]))
    assert report.kind == "power" and report.index == 0


def test_admissible_energy_violation_index():
    # alpha = 0, capacity 10, |u| = 4, dt = 1: the SoC reaches 12 after
    # ceil(10/4) = 3 updates, so the energy violation lands on state 3.
    batt = GeneralizedBattery(energy_capacity=10.0, charge_limit=5.0,
                              discharge_limit=5.0, dissipation=0.0)
    report = is_admissible(batt, _sig([-4.0] * 6))
    assert not report
    assert report.kind == "energy"
    assert report.index == 3


def test_admissible_boundary_is_inclusive():
    batt = GeneralizedBattery(energy_capacity=8.0, charge_limit=5.0,
                              discharge_limit=5.0, dissipation=0.0)
    # Power exactly at the limit, SoC exactly at capacity: admissible.
    report = is_admissible(batt, _sig([5.0, -5.0, -5.0, 5.0], dt=0.8))
    assert report
    assert report.kind is None


def test_admissible_x0_beyond_capacity():
    batt = GeneralizedBattery(energy_capacity=2.0, charge_limit=1.0,
                              discharge_limit=1.0, dissipation=0.0)
    report = is_admissible(batt, _sig([0.0]), x0=2.5)
    assert report.kind == "energy"
    assert report.index == 0


def test_admissible_unit_mismatch():
    batt = GeneralizedBattery(energy_capacity=1.0, charge_limit=1.0,
                              discharge_limit=1.0, dissipation=0.0)
    with pytest.raises(UnitMismatchError):
        is_admissible(batt, _sig([0.1], unit="MW"))
    with pytest.raises(UnitMismatchError):
        is_admissible(batt, _sig([0.1], unit="1", normalized=True))


def test_signal_scale():
    sig = _sig([0.5, -1.0], dt=DT_4S, unit="1", normalized=True)
    scaled = sig.scale(200.0)
    assert scaled.unit == "kW"
    assert not scaled.normalized
    assert np.allclose(scaled.values, [100.0, -200.0])
    assert scaled.dt_hours == sig.dt_hours


def test_max_energy_requirement_scales_exactly():
    rng = np.random.default_rng(5)
    r = _sig(np.clip(rng.standard_normal(900) * 0.3, -1, 1), dt=DT_4S,
             unit="1", normalized=True)
    one = max_energy_requirement(0.1, 1.0, r)
    assert max_energy_requirement(0.1, 600.0, r) == \
        pytest.approx(600.0 * one, rel=1e-12)
    with pytest.raises(ValueError):
        max_energy_requirement(0.1, 0.0, r)


def test_max_energy_requirement_zero_signal():
    r = _sig(np.zeros(100), dt=DT_4S, unit="1", normalized=True)
    assert max_energy_requirement(0.25, 600.0, r) == 0.0


def test_max_energy_requirement_validation():
    kw = _sig([0.5], dt=DT_4S)
    with pytest.raises(ValueError):
        max_energy_requirement(0.25, 600.0, kw)
    bad = _sig([0.5, 1.2], dt=DT_4S, unit="1", normalized=True)
    with pytest.raises(ValueError, match="1"):
        max_energy_requirement(0.25, 600.0, bad)


def test_battery_validation():
    with pytest.raises(ValueError):
        GeneralizedBattery(energy_capacity=-1.0, charge_limit=1.0,
                          discharge_limit=1.0, dissipation=0.0)
    with pytest.raises(ValueError):
        GeneralizedBattery(energy_capacity=1.0, charge_limit=1.0,
                          discharge_limit=1.0, dissipation=-0.1)


@given(st.lists(st.floats(-50.0, 50.0), min_size=1, max_size=40))
def test_soc_is_linear_in_signal(values):
    batt = GeneralizedBattery(energy_capacity=1e12, charge_limit=1e12,
                              discharge_limit=1e12, dissipation=0.3)
    u = np.asarray(values)
    x_u = soc_trajectory(batt, _sig(u, dt=0.25))
    x_2u = soc_trajectory(batt, _sig(2.0 * u, dt=0.25))
    assert np.allclose(x_2u, 2.0 * np.asarray(x_u), atol=1e-9)


@given(st.floats(0.1, 1.0))
def test_admissible_shrinks_with_amplitude(scale):
    # Any admissible signal stays admissible when scaled down (x0 = 0).
    batt = GeneralizedBattery(energy_capacity=6.0, charge_limit=4.0,
                              discharge_limit=4.0, dissipation=0.1)
    base = np.array([3.0, -3.5, 2.0, -1.0, 3.9, -3.9, 0.5])
    assert is_admissible(batt, _sig(base, dt=0.5))
    assert is_admissible(batt, _sig(scale * base, dt=0.5))
