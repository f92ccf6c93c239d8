from __future__ import annotations

import csv
import io

import numpy as np
import pytest

from tclfleet.economics import (
    CapitalCost,
    comparison_table,
    load_reference_techs,
    tcl_cost_figures,
)
from tclfleet.fleet import DeviceClass, CityProfile, hourly_flexibility
from tclfleet.tcl import AmbientSeries, TclParams


def _flex(params_by_name, saturations, fixed_ambient=20.0, hours=24):
    classes = [
        DeviceClass(name=name, params=params, saturation_rate=saturations[name],
                    fixed_ambient_c=fixed_ambient)
        for name, params in params_by_name.items()
    ]
    city = CityProfile(name="x", households=1.0,
                       ambient=AmbientSeries(None, 1.0, np.zeros(hours)))
    return hourly_flexibility(classes, [city], {}, 13.7e6)


def test_load_reference_techs():
    techs = load_reference_techs()
    assert [t.name for t in techs] == [
        "Flywheel", "Li-ion", "Advanced lead acid", "Zinc bromide"]
    fly = techs[0]
    assert fly.maturity == "demo"
    assert fly.cycles_per_year == ">8000"
    assert fly.efficiency == (0.85, 0.87)
    assert fly.cost_per_kwh == (7800.0, 8800.0)
    assert fly.cost_per_kw == (1950.0, 2200.0)
    zinc = techs[3]
    assert zinc.cost_per_kwh == (1464.0, 1464.0)


def test_water_heater_cost_figures(water_heater_params, fridge_params):
    flex = _flex({"water_heater": water_heater_params,
                  "refrigerator": fridge_params},
                 {"water_heater": 0.065, "refrigerator": 1.223})
    fig = tcl_cost_figures("water_heater", flex, CapitalCost(50.0, 100.0),
                           installed_units=890500.0,
                           cycles_note="4-6x nominal")
    assert fig.cost_per_kwh[0] == pytest.approx(83.33333333333334, rel=1e-9)
    assert fig.cost_per_kwh[1] == pytest.approx(166.66666666666669,
                                                rel=1e-9)
    assert fig.cost_per_kw_up[0] == pytest.approx(50.0 / 0.2375, rel=1e-9)
    assert fig.cost_per_kw_up[1] == pytest.approx(100.0 / 0.2375, rel=1e-9)
    assert fig.cost_per_kw_down[0] == pytest.approx(50.0 / 4.2625,
                                                    rel=1e-9)
    assert fig.cost_per_kw_down[1] == pytest.approx(100.0 / 4.2625,
                                                    rel=1e-9)
    assert fig.cycles_note == "4-6x nominal"


def test_fridge_cost_figures(water_heater_params, fridge_params):
    flex = _flex({"water_heater": water_heater_params,
                  "refrigerator": fridge_params},
                 {"water_heater": 0.065, "refrigerator": 1.223})
    fig = tcl_cost_figures("refrigerator", flex, CapitalCost(50.0, 100.0),
                           installed_units=13.7e6 * 1.223)
    assert fig.cost_per_kwh[0] == pytest.approx(222.22222222222226,
                                                rel=1e-9)
    assert fig.cost_per_kwh[1] == pytest.approx(444.4444444444445,
                                                rel=1e-9)


def test_zero_flexibility_is_unavailable_not_infinite(ac_params):
    # An AC pinned at mild ambient never runs: no up capability.
    flex = _flex({"ac": ac_params}, {"ac": 0.465})
    fig = tcl_cost_figures("ac", flex, CapitalCost(100.0, 250.0),
                           installed_units=13.7e6 * 0.465)
    assert fig.cost_per_kw_up is None
    assert fig.cost_per_kw_down is not None
    with pytest.raises(ValueError):
        tcl_cost_figures("ac", flex, CapitalCost(100.0, 250.0),
                         installed_units=0.0)


def test_comparison_table_layout(water_heater_params, fridge_params):
    flex = _flex({"water_heater": water_heater_params,
                  "refrigerator": fridge_params},
                 {"water_heater": 0.065, "refrigerator": 1.223})
    figures = [
        tcl_cost_figures("water_heater", flex, CapitalCost(50.0, 100.0),
                         890500.0, cycles_note="4-6x nominal"),
        tcl_cost_figures("refrigerator", flex, CapitalCost(50.0, 100.0),
                         13.7e6 * 1.223, cycles_note="2-3x nominal"),
    ]
    report = comparison_table(figures, load_reference_techs())

    names = [r.name for r in report.rows]
    # Descending lower-bound $/kWh puts storage first, TCLs last.
    assert names == ["Flywheel", "Li-ion", "Advanced lead acid",
                     "Zinc bromide", "refrigerator", "water_heater"]
    kinds = {r.name: r.kind for r in report.rows}
    assert kinds["Flywheel"] == "reference"
    assert kinds["water_heater"] == "tcl"

    text = report.to_text()
    assert "83-167" in text
    assert "211-421" in text
    assert "12-23" in text
    assert "222-444" in text
    assert "514-1,029" in text
    assert "247-493" in text
    assert "4-6x nominal" in text
    assert "100%" in text
    assert "85-87%" in text
    assert "R&D" in text

    parsed = list(csv.DictReader(io.StringIO(report.to_csv())))
    assert len(parsed) == 6
    wh = next(r for r in parsed if r["name"] == "water_heater")
    assert float(wh["cost_per_kwh_lo"]) == pytest.approx(83.3333, rel=1e-4)
    assert float(wh["cost_per_kw_down_hi"]) == pytest.approx(23.4604,
                                                             rel=1e-4)
    fly = next(r for r in parsed if r["name"] == "Flywheel")
    assert fly["cost_per_kw_up_lo"] == "1950"
    assert fly["cost_per_kw_down_lo"] == "1950"


def test_unavailable_rows_sink_and_render_na(ac_params, water_heater_params):
    flex = _flex({"ac": ac_params, "water_heater": water_heater_params},
                 {"ac": 0.465, "water_heater": 0.065})
    figures = [
        tcl_cost_figures("ac", flex, CapitalCost(100.0, 250.0),
                         13.7e6 * 0.465),
        tcl_cost_figures("water_heater", flex, CapitalCost(50.0, 100.0),
                         890500.0),
    ]
    # The idle AC keeps its $/kWh (capacity is duty-independent) but has
    # no up capability, so only that column goes unavailable.
    zinc = [t for t in load_reference_techs() if t.name == "Zinc bromide"]
    report = comparison_table(figures, zinc)
    assert [r.name for r in report.rows] == ["Zinc bromide", "ac",
                                             "water_heater"]
    ac_row = report.rows[1]
    assert ac_row.cost_per_kw_up is None
    assert ac_row.cost_per_kwh == pytest.approx((400.0, 1000.0), rel=1e-9)
    assert "n/a" in report.to_text()
    with pytest.raises(ValueError):
        comparison_table(figures, [])


def test_capital_cost_validation():
    with pytest.raises(ValueError):
        CapitalCost(low=-1.0, high=10.0)
    with pytest.raises(ValueError):
        CapitalCost(low=10.0, high=5.0)
