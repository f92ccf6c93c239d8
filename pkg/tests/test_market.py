from __future__ import annotations

import numpy as np
import pytest

from tclfleet.fleet import DeviceClass, CityProfile, hourly_flexibility
from tclfleet.market import (
    Award,
    PriceSeries,
    award_from_flexibility,
    revenue,
)
from tclfleet.tcl import AmbientSeries

HOURS = 8760


def _flat_prices(hours=HOURS):
    return PriceSeries.flat(hours, 4.61, 3.43, 0.069, 0.130)


def _year_flex(water_heater_params, fridge_params, hours=HOURS):
    classes = [
        DeviceClass(name="water_heater", params=water_heater_params,
                    saturation_rate=0.065, fixed_ambient_c=20.0),
        DeviceClass(name="refrigerator", params=fridge_params,
                    saturation_rate=1.223, fixed_ambient_c=20.0),
    ]
    city = CityProfile(name="x", households=1.0,
                       ambient=AmbientSeries(None, 1.0, np.zeros(hours)))
    return hourly_flexibility(classes, [city], {}, 13.7e6)


def test_price_series_validation():
    with pytest.raises(ValueError):
        PriceSeries(ru_cap=np.array([1.0]), rd_cap=np.array([-0.1]),
                    ru_mil=np.array([0.0]), rd_mil=np.array([0.0]))
    with pytest.raises(ValueError):
        PriceSeries(ru_cap=np.array([1.0, 2.0]), rd_cap=np.array([1.0]),
                    ru_mil=np.array([1.0]), rd_mil=np.array([1.0]))
    with pytest.raises(ValueError):
        PriceSeries(ru_cap=np.array([np.nan]), rd_cap=np.array([1.0]),
                    ru_mil=np.array([1.0]), rd_mil=np.array([1.0]))


def test_award_from_flexibility(water_heater_params, fridge_params):
    flex = _year_flex(water_heater_params, fridge_params, hours=24)
    awards = award_from_flexibility(flex)
    assert [a.name for a in awards] == ["water_heater", "refrigerator"]
    wh = awards[0]
    assert wh.cap_up_mw[0] == pytest.approx(211.49375, rel=1e-9)
    assert wh.cap_down_mw[0] == pytest.approx(3795.75625, rel=1e-9)
    assert wh.mil_up_mw[0] == pytest.approx(2.5 * 211.49375, rel=1e-9)
    assert wh.accuracy == pytest.approx(0.95)
    custom = award_from_flexibility(flex, mileage_multiplier=1.0,
                                    accuracy=0.8)
    assert custom[0].mil_up_mw[0] == pytest.approx(211.49375, rel=1e-9)
    assert custom[0].accuracy == pytest.approx(0.8)


def test_annual_revenue_temperature_independent_classes(
        water_heater_params, fridge_params):
    flex = _year_flex(water_heater_params, fridge_params)
    awards = award_from_flexibility(flex)
    counts = {"water_heater": 890500.0, "refrigerator": 13.7e6 * 1.223}
    report = revenue(awards, _flat_prices(), installed_counts=counts)

    wh = report.class_named("water_heater")
    assert wh.per_unit_cap_up == pytest.approx(9.591105, rel=1e-9)
    assert wh.per_unit_cap_down == pytest.approx(128.074485, rel=1e-9)
    assert wh.per_unit_mil_up == pytest.approx(0.34094193750000007,
                                               rel=1e-9)
    assert wh.per_unit_mil_down == pytest.approx(11.528570624999999,
                                                 rel=1e-9)

    fr = report.class_named("refrigerator")
    assert fr.per_unit_cap_up == pytest.approx(3.9261833333333334, rel=1e-9)
    assert fr.per_unit_cap_down == pytest.approx(6.092823333333334,
                                                 rel=1e-9)

    assert wh.total == pytest.approx(wh.cap_up + wh.cap_down + wh.mil_up
                                     + wh.mil_down)
    assert report.annual_total == pytest.approx(wh.total + fr.total)
    assert wh.cap_up == pytest.approx(9.591105 * 890500.0, rel=1e-9)


def test_zero_prices_zero_revenue(water_heater_params, fridge_params):
    flex = _year_flex(water_heater_params, fridge_params, hours=24)
    awards = award_from_flexibility(flex)
    report = revenue(awards, PriceSeries.flat(24, 0.0, 0.0, 0.0, 0.0))
    assert report.annual_total == 0.0


def test_revenue_linear_in_prices(water_heater_params, fridge_params):
    flex = _year_flex(water_heater_params, fridge_params, hours=24)
    awards = award_from_flexibility(flex)
    base = revenue(awards, PriceSeries.flat(24, 4.61, 3.43, 0.069, 0.130))
    double = revenue(awards, PriceSeries.flat(24, 9.22, 6.86, 0.138, 0.260))
    assert double.annual_total == pytest.approx(2.0 * base.annual_total,
                                                rel=1e-12)


def test_accuracy_scales_mileage_only(water_heater_params, fridge_params):
    flex = _year_flex(water_heater_params, fridge_params, hours=24)
    full = revenue(award_from_flexibility(flex, accuracy=1.0),
                   _flat_prices(24))
    half = revenue(award_from_flexibility(flex, accuracy=0.5),
                   _flat_prices(24))
    wh_full = full.class_named("water_heater")
    wh_half = half.class_named("water_heater")
    assert wh_half.cap_up == pytest.approx(wh_full.cap_up, rel=1e-12)
    assert wh_half.mil_up == pytest.approx(0.5 * wh_full.mil_up, rel=1e-12)


def test_per_unit_requires_count(water_heater_params, fridge_params):
    flex = _year_flex(water_heater_params, fridge_params, hours=24)
    report = revenue(award_from_flexibility(flex), _flat_prices(24))
    cls = report.class_named("water_heater")
    with pytest.raises(ValueError):
        cls.per_unit_cap_up


def test_revenue_rejects_misaligned_prices(water_heater_params,
                                           fridge_params):
    flex = _year_flex(water_heater_params, fridge_params, hours=24)
    awards = award_from_flexibility(flex)
    with pytest.raises(ValueError):
        revenue(awards, _flat_prices(23))


def test_award_validation():
    with pytest.raises(ValueError):
        Award(name="x", cap_up_mw=np.array([-1.0]),
              cap_down_mw=np.array([1.0]), mil_up_mw=np.array([1.0]),
              mil_down_mw=np.array([1.0]))
    with pytest.raises(ValueError):
        Award(name="x", cap_up_mw=np.array([1.0]),
              cap_down_mw=np.array([1.0]), mil_up_mw=np.array([1.0]),
              mil_down_mw=np.array([1.0]), accuracy=1.5)
