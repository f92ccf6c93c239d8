"""Aggregate flexibility of thermostatically controlled loads.

Simulates populations of hysteretically controlled thermal loads (air
conditioners, heat pumps, water heaters, refrigerators), abstracts their
aggregate flexibility as a dissipative generalized battery, dispatches
individual units against a regulation signal with a priority stack, and
prices the resulting capability in a frequency-regulation market.

Internal units are kW, kWh, degC, and hours throughout; MW/GW appear only
at reporting boundaries.
"""
from __future__ import annotations

from ._core import backend_name
from .battery import (
    AdmissibilityReport,
    GeneralizedBattery,
    SignalSeries,
    UnitMismatchError,
    battery_from_fleet,
    is_admissible,
    max_energy_requirement,
    soc_trajectory,
)
from .tcl import (
    AmbientSeries,
    DutyCycle,
    TclParams,
    TclState,
    duty_cycle_power,
    limit_cycle_states,
    mode_asymptotes,
    step_tcl,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport",
    "AmbientSeries",
    "DutyCycle",
    "GeneralizedBattery",
    "SignalSeries",
    "TclParams",
    "TclState",
    "UnitMismatchError",
    "backend_name",
    "battery_from_fleet",
    "duty_cycle_power",
    "is_admissible",
    "limit_cycle_states",
    "max_energy_requirement",
    "mode_asymptotes",
    "soc_trajectory",
    "step_tcl",
    "__version__",
]
