from __future__ import annotations

import numpy as np
import pytest

try:
    from hypothesis import HealthCheck, settings

    settings.register_profile(
        "suite", deadline=None, derandomize=True, max_examples=60,
        suppress_health_check=[HealthCheck.too_slow])
    settings.load_profile("suite")
except ImportError:
    pass

from tclfleet.tcl import TclParams


@pytest.fixture
def ac_params() -> TclParams:
    return TclParams(thermal_capacitance=2.0, thermal_resistance=2.0,
                     rated_power=5.6, cop=2.5, setpoint=22.5,
                     deadband=0.3125, load_kind="cooling")


@pytest.fixture
def heat_pump_params() -> TclParams:
    return TclParams(thermal_capacitance=2.0, thermal_resistance=2.0,
                     rated_power=5.6, cop=3.5, setpoint=19.5,
                     deadband=0.3125, load_kind="heating")


@pytest.fixture
def water_heater_params() -> TclParams:
    return TclParams(thermal_capacitance=0.4, thermal_resistance=120.0,
                     rated_power=4.5, cop=1.0, setpoint=48.5,
                     deadband=1.5, load_kind="heating")


@pytest.fixture
def fridge_params() -> TclParams:
    return TclParams(thermal_capacitance=0.6, thermal_resistance=90.0,
                     rated_power=0.3, cop=2.0, setpoint=2.5,
                     deadband=0.75, load_kind="cooling")


@pytest.fixture(scope="session")
def fixture_set(tmp_path_factory):
    from tclfleet.ingest import synth_fixtures

    root = tmp_path_factory.mktemp("fixtures")
    return synth_fixtures(42, root)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)
