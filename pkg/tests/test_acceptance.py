"""End-to-end checks for the headline numbers and guarantees.

Each test covers one published figure or behavioural guarantee and prints
a single PASS/FAIL line so a plain-text log reads as a checklist. The
frozen targets are the rounded values the package is expected to land on;
tolerances state how much rounding slack each one gets.
"""
from __future__ import annotations

import filecmp
import math
import os
import time

import numpy as np
import pytest
from click.testing import CliRunner

from tclfleet.battery import (
    SignalSeries,
    battery_from_fleet,
    is_admissible,
    max_energy_requirement,
)
from tclfleet.cli import main
from tclfleet.dispatch import SimFleet, accuracy, ramp_check, track
from tclfleet.fleet import CityProfile, DeviceClass, hourly_flexibility
from tclfleet.ingest import load_signal_csv, synth_regulation_trace
from tclfleet.market import PriceSeries, award_from_flexibility, revenue
from tclfleet.economics import CapitalCost, tcl_cost_figures
from tclfleet.tcl import AmbientSeries, TclParams

from oracle import euler_thermostat

HOUSEHOLDS = 13.7e6
WH_UNITS = HOUSEHOLDS * 0.065
FRIDGE_UNITS = HOUSEHOLDS * 1.223

WH = TclParams(thermal_capacitance=0.4, thermal_resistance=120.0,
               rated_power=4.5, cop=1.0, setpoint=48.5, deadband=1.5,
               load_kind="heating")
FRIDGE = TclParams(thermal_capacitance=0.6, thermal_resistance=90.0,
                   rated_power=0.3, cop=2.0, setpoint=2.5, deadband=0.75,
                   load_kind="cooling")
AC = TclParams(thermal_capacitance=2.0, thermal_resistance=2.0,
               rated_power=5.6, cop=2.5, setpoint=22.5, deadband=0.3125,
               load_kind="cooling")
HP = TclParams(thermal_capacitance=2.0, thermal_resistance=2.0,
               rated_power=5.6, cop=3.5, setpoint=19.5, deadband=0.3125,
               load_kind="heating")


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")


def _rel(value: float, target: float) -> float:
    return abs(value - target) / abs(target)


@pytest.fixture(scope="module")
def fixed_ambient_flex():
    # Water heaters and refrigerators live indoors: their flexibility is
    # a constant over the year, so the ambient trace content is irrelevant.
    classes = [
        DeviceClass(name="water_heater", params=WH, saturation_rate=0.065,
                    fixed_ambient_c=20.0),
        DeviceClass(name="refrigerator", params=FRIDGE,
                    saturation_rate=1.223, fixed_ambient_c=20.0),
    ]
    city = CityProfile(name="x", households=1.0,
                       ambient=AmbientSeries(None, 1.0, np.zeros(8760)))
    return hourly_flexibility(classes, [city], {}, HOUSEHOLDS)


def test_criterion_1_battery_synthesis_values():
    wh = battery_from_fleet(WH, 20.0, WH_UNITS).to("GW")
    fr = battery_from_fleet(FRIDGE, 20.0, FRIDGE_UNITS).to("GW")
    got = (wh.charge_limit, wh.discharge_limit, wh.energy_capacity,
           fr.charge_limit, fr.discharge_limit, fr.energy_capacity)
    want = (0.21, 3.79, 0.53, 1.63, 3.38, 3.78)
    errs = [_rel(g, w) for g, w in zip(got, want)]
    ok = max(errs) < 0.01
    _report(1, ok,
            f"wh (n-, n+, C) = ({got[0]:.4f}, {got[1]:.4f}, {got[2]:.4f}) "
            f"GW/GWh, fridge = ({got[3]:.4f}, {got[4]:.4f}, {got[5]:.4f}); "
            f"max deviation {max(errs):.2%} (limit 1%)")
    assert ok


def test_criterion_2_thermal_time_constants():
    rates = {"ac": AC.thermal_rate, "heat_pump": HP.thermal_rate,
             "water_heater": WH.thermal_rate,
             "refrigerator": FRIDGE.thermal_rate}
    ok = (rates["ac"] == 0.25 and rates["heat_pump"] == 0.25
          and round(rates["water_heater"], 4) == 0.0208
          and round(rates["refrigerator"], 4) == 0.0185
          and round(rates["water_heater"], 2) == 0.02
          and round(rates["refrigerator"], 2) == 0.02)
    _report(2, ok,
            f"a = 0.25 (ac, heat_pump), {rates['water_heater']:.4f} (wh), "
            f"{rates['refrigerator']:.4f} (fridge) 1/h; both round to 0.02")
    assert ok


def test_criterion_3_capacity_revenue(fixed_ambient_flex):
    awards = award_from_flexibility(fixed_ambient_flex)
    prices = PriceSeries.flat(8760, 4.61, 3.43, 0.069, 0.130)
    counts = {"water_heater": WH_UNITS, "refrigerator": FRIDGE_UNITS}
    report = revenue(awards, prices, installed_counts=counts)
    wh = report.class_named("water_heater")
    fr = report.class_named("refrigerator")
    got = (wh.per_unit_cap_up, wh.per_unit_cap_down,
           fr.per_unit_cap_up, fr.per_unit_cap_down)
    want = (9.60, 128.06, 3.93, 6.09)
    errs = [_rel(g, w) for g, w in zip(got, want)]
    ok = max(errs) < 0.02
    _report(3, ok,
            f"per-unit capacity revenue $/y: wh {got[0]:.2f} up / "
            f"{got[1]:.2f} down, fridge {got[2]:.2f} / {got[3]:.2f}; "
            f"max deviation {max(errs):.2%} (limit 2%)")
    assert ok


def test_criterion_4_cost_figures(fixed_ambient_flex):
    wh = tcl_cost_figures("water_heater", fixed_ambient_flex,
                          CapitalCost(50.0, 100.0), WH_UNITS)
    fr = tcl_cost_figures("refrigerator", fixed_ambient_flex,
                          CapitalCost(50.0, 100.0), FRIDGE_UNITS)
    kwh_errs = [_rel(wh.cost_per_kwh[0], 83.0),
                _rel(wh.cost_per_kwh[1], 167.0),
                _rel(fr.cost_per_kwh[0], 222.0),
                _rel(fr.cost_per_kwh[1], 444.0)]
    down_rounded = (round(wh.cost_per_kw_down[0]),
                    round(wh.cost_per_kw_down[1]))
    ok = max(kwh_errs) < 0.02 and down_rounded == (12, 23)
    _report(4, ok,
            f"$/kWh: wh {wh.cost_per_kwh[0]:.1f}-{wh.cost_per_kwh[1]:.1f}, "
            f"fridge {fr.cost_per_kwh[0]:.1f}-{fr.cost_per_kwh[1]:.1f} "
            f"(max deviation {max(kwh_errs):.2%}); wh $/kW down rounds to "
            f"{down_rounded[0]}-{down_rounded[1]}")
    assert ok


def test_criterion_5_energy_requirement_properties():
    trace = synth_regulation_trace(42)
    e_300 = max_energy_requirement(0.25, 300.0, trace)
    e_600 = max_energy_requirement(0.25, 600.0, trace)
    lin_err = abs(e_600 - 2.0 * e_300) / e_600
    e_slow = max_energy_requirement(0.02, 600.0, trace)

    agc_path = os.environ.get("TCLFLEET_AGC_TRACE")
    if agc_path:
        agc = load_signal_csv(agc_path)
        e_band = max_energy_requirement(0.25, 600.0, agc)
        source = "supplied trace"
    else:
        e_band = e_600
        source = "synthetic day trace"

    ok = (lin_err < 1e-9 and e_slow > e_600
          and 90.0 <= e_band <= 210.0)
    _report(5, ok,
            f"linearity error {lin_err:.2e}; slow/fast dissipation "
            f"{e_slow:.1f} > {e_600:.1f} MWh; {source} at (0.25/h, 600 MW) "
            f"= {e_band:.1f} MWh in [90, 210]")
    assert ok


def test_criterion_6_dispatch_tracks_admissible_signals():
    t0 = time.monotonic()
    n_units = 200
    ambient = 32.0
    batt = battery_from_fleet(AC, ambient, n_units)
    headroom = min(batt.charge_limit, batt.discharge_limit)
    rng = np.random.default_rng(20260822)
    dt_h = 4.0 / 3600.0
    n_steps = 675  # three full 15-minute windows
    t_s = np.arange(n_steps) * 4.0

    n_signals = 50
    worst_score = 1.0
    violations = 0
    for i in range(n_signals):
        # Two sinusoids, the second kept under half the first: equal-sized
        # components at nearby periods can beat to near-zero for a whole
        # scoring window, where the per-unit toggle granularity (not the
        # controller) floors the accuracy ratio.
        periods = rng.uniform(240.0, 720.0, 2)
        phases = rng.uniform(0.0, 2.0 * np.pi, 2)
        amps = np.array([1.0, rng.uniform(0.2, 0.5)])
        raw = np.zeros(n_steps)
        for a, p, ph in zip(amps, periods, phases):
            raw += a * np.sin(2.0 * np.pi * t_s / p + ph)
        target = rng.uniform(0.4, 0.7) * headroom
        u = SignalSeries(dt_h, raw * (target / np.max(np.abs(raw))),
                         unit="kW")
        assert is_admissible(batt, u).admissible

        fleet = SimFleet.homogeneous(
            AC, n_units, ambient, np.random.default_rng(1000 + i))
        result = track(fleet, u)
        violations += result.total_violations
        worst_score = min(worst_score, accuracy(result).worst)

    elapsed = time.monotonic() - t0
    ok = violations == 0 and worst_score >= 0.95 and elapsed < 120.0
    _report(6, ok,
            f"{n_signals} admissible signals on {n_units} units: "
            f"{violations} band violations, worst window score "
            f"{worst_score:.4f} (floor 0.95), {elapsed:.1f} s")
    assert ok


def test_criterion_7_independent_oracle():
    n_units = 5
    ambient = 32.0
    rng = np.random.default_rng(7)
    theta0 = rng.uniform(AC.band_low + 0.05, AC.band_high - 0.05, n_units)
    mode0 = (rng.random(n_units) < 0.5).astype(np.int8)

    fleet = SimFleet(
        [AC] * n_units, ambient, theta0.copy(), mode0.copy())
    n_steps = 900  # one hour at the 4 s control step
    engine = np.empty((n_steps, n_units))
    for k in range(n_steps):
        fleet.advance(1.0 / 900.0)
        engine[k] = fleet.theta

    worst = 0.0
    for j in range(n_units):
        thetas, _ = euler_thermostat(
            c_kwh_per_c=2.0, r_c_per_kw=2.0, rated_kw=5.6, cop=2.5,
            setpoint_c=22.5, deadband_c=0.3125, cooling=True,
            ambient_c=ambient, theta0_c=float(theta0[j]), q0=int(mode0[j]),
            hours=1.0, dt_s=0.1)
        oracle = np.asarray(thetas)[40::40]  # every 4 s mark
        worst = max(worst, float(np.max(np.abs(engine[:, j] - oracle))))
    agree = worst < 0.01

    # A demand beyond the all-ON ceiling cannot be met with the thermostat
    # honoured (tracking error), and meeting it anyway means running every
    # unit through the band floor (comfort violation).
    po_exact = fleet.baseline_kw / n_units
    n_plus = n_units * (5.6 - 2.4)  # linearized headroom at 32 degC
    demand = n_units * po_exact + 1.2 * n_plus
    achieved_ceiling = n_units * 5.6
    shortfall = demand - achieved_ceiling

    theta = float(theta0[0])
    dt_h = 0.1 / 3600.0
    floor = theta
    for _ in range(36000):
        theta += dt_h * (0.25 * (ambient - theta) - 1.25 * 5.6)
        floor = min(floor, theta)
    violated = floor < AC.band_low - 0.5

    ok = agree and shortfall > 0 and violated
    _report(7, ok,
            f"engine vs 0.1 s Euler oracle: max gap {worst:.2e} degC "
            f"(limit 0.01); over-envelope demand leaves {shortfall:.2f} kW "
            f"unmet or drags units {AC.band_low - floor:.1f} degC below "
            f"the band")
    assert ok


def test_criterion_8_ramp_within_one_control_step():
    fleet = SimFleet.homogeneous(AC, 50, 32.0, np.random.default_rng(8))
    low, high = fleet.envelope_kw
    t_up = ramp_check(fleet, 0.6 * high)
    fleet2 = SimFleet.homogeneous(AC, 50, 32.0, np.random.default_rng(8))
    t_down = ramp_check(fleet2, 0.6 * low)
    ok = t_up == 4.0 and t_down == 4.0 and t_up <= 600.0 / 100.0
    _report(8, ok,
            f"95% of a step command reached in {t_up:.0f} s up / "
            f"{t_down:.0f} s down, vs the 600 s requirement")
    assert ok


def test_criterion_9_byte_identical_reruns(fixture_set, tmp_path):
    runner = CliRunner()
    cases = [
        (["track", "--fleet", str(fixture_set.fleet_config),
          "--signal", str(fixture_set.signal), "--seed", "42",
          "--units", "20"],
         ["track_trace.csv", "track_windows.csv"]),
        (["capacity", "--fleet", str(fixture_set.fleet_config),
          "--temps", str(fixture_set.temps_dir), "--seed", "42"],
         ["capacity_hourly.csv", "capacity_summary.csv"]),
    ]
    identical = True
    for i, (args, files) in enumerate(cases):
        a = tmp_path / f"a{i}"
        b = tmp_path / f"b{i}"
        for out in (a, b):
            res = runner.invoke(main, args + ["--out", str(out)])
            assert res.exit_code == 0, res.output
        for name in files:
            identical &= filecmp.cmp(a / name, b / name, shallow=False)
    _report(9, identical,
            "track and capacity reruns with the same seed emit "
            "byte-identical files")
    assert identical
