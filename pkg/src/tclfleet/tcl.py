"""Hybrid thermal/switching model of a single thermostatically controlled load.

Each unit is a first-order thermal mass under hysteretic ON/OFF control:

    dtheta/dt = a*(theta_amb - theta) - s*b*P_m*q + w      q in {0, 1}

with a = 1/(C*R), b = cop/C, s = +1 for cooling loads and -1 for heating
loads. The thermostat holds the temperature inside the band
[setpoint - deadband, setpoint + deadband]: a cooling unit switches ON at
the upper band edge and OFF at the lower edge (heating mirrored).

Because each constant-mode segment is an affine ODE, trajectories are
advanced with the closed-form exponential solution; switching events are
located on that closed form by bisection to within EVENT_TOL_H hours and
the temperature is pinned to the band edge at the event. There is no
integration drift: between events the solution is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

import numpy as np

from . import _core

# Event-location tolerance (hours) for the bisection on the closed-form
# trajectory, and the band tolerance (deg C) trajectories are allowed to
# exceed the deadband by. Events are pinned to the band edge, so the band
# tolerance only has to absorb float roundoff.
EVENT_TOL_H = 1e-6
BAND_TOL_C = 1e-6

COOLING = "cooling"
HEATING = "heating"


@dataclass(frozen=True)
class TclParams:
    """Physical parameters of one TCL.

    thermal_capacitance  C    kWh/degC
    thermal_resistance   R    degC/kW
    rated_power          P_m  kW (electrical)
    cop                  eta  dimensionless
    setpoint                  degC
    deadband                  degC, half-width of the comfort band
    load_kind                 "cooling" or "heating"
    """

    thermal_capacitance: float
    thermal_resistance: float
    rated_power: float
    cop: float
    setpoint: float
    deadband: float
    load_kind: str = COOLING

    def __post_init__(self):
        for name in ("thermal_capacitance", "thermal_resistance", "rated_power",
                     "cop", "deadband"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not math.isfinite(self.setpoint):
            raise ValueError(f"setpoint must be finite, got {self.setpoint!r}")
        if self.load_kind not in (COOLING, HEATING):
            raise ValueError(f"load_kind must be 'cooling' or 'heating', got {self.load_kind!r}")

    @property
    def thermal_rate(self) -> float:
        """a = 1/(C*R), the inverse thermal time constant (1/h)."""
        return 1.0 / (self.thermal_capacitance * self.thermal_resistance)

    @property
    def heat_gain(self) -> float:
        """b = cop/C, temperature drive per unit electrical power (degC/h per kW)."""
        return self.cop / self.thermal_capacitance

    @property
    def band_low(self) -> float:
        return self.setpoint - self.deadband

    @property
    def band_high(self) -> float:
        return self.setpoint + self.deadband

    @property
    def sign(self) -> int:
        """+1 if running the unit drives the temperature down (cooling)."""
        return 1 if self.load_kind == COOLING else -1


@dataclass(frozen=True)
class TclState:
    """Instantaneous state: temperature (degC), mode (0=OFF, 1=ON), clock (h)."""

    temperature: float
    mode: int
    clock: float = 0.0

    def __post_init__(self):
        if self.mode not in (0, 1):
            raise ValueError(f"mode must be 0 or 1, got {self.mode!r}")
        if not math.isfinite(self.temperature):
            raise ValueError("temperature must be finite")


@dataclass(frozen=True)
class AmbientSeries:
    """Uniformly sampled ambient-temperature series (degC)."""

    start: datetime
    step_hours: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size == 0:
            raise ValueError("ambient series must be non-empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("ambient series contains non-finite values")
        if self.step_hours <= 0:
            raise ValueError("step_hours must be > 0")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


def mode_asymptotes(params: TclParams, ambient_c: float,
                    disturbance_c_per_h: float = 0.0) -> tuple[float, float]:
    """Steady-state temperatures the ON and OFF dynamics relax toward.

    Returns (theta_inf_on, theta_inf_off). The disturbance enters the ODE
    additively in degC/h (w in the model equation).
    """
    a = params.thermal_rate
    drive = params.sign * params.heat_gain * params.rated_power
    th_on = ambient_c + (disturbance_c_per_h - drive) / a
    th_off = ambient_c + disturbance_c_per_h / a
    return th_on, th_off


def step_tcl(params: TclParams, state: TclState, ambient_c: float,
             dt_hours: float, disturbance_c_per_h: float = 0.0) -> TclState:
    """Advance one TCL by dt_hours under its internal hysteresis control.

    Pure function: returns the new state, exact on each constant-mode
    segment, with switching events located by bisection (EVENT_TOL_H) and
    the temperature pinned to the band edge at each event.
    """
    if not (math.isfinite(dt_hours) and dt_hours > 0):
        raise ValueError(f"dt_hours must be finite and > 0, got {dt_hours!r}")
    for name, value in (("ambient_c", ambient_c),
                        ("disturbance_c_per_h", disturbance_c_per_h)):
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite")

    th_on, th_off = mode_asymptotes(params, ambient_c, disturbance_c_per_h)
    theta = np.array([state.temperature], dtype=float)
    mode = np.array([state.mode], dtype=np.int8)
    _core.advance_units(
        theta, mode,
        np.array([params.thermal_rate]),
        np.array([th_on]), np.array([th_off]),
        np.array([params.band_low]), np.array([params.band_high]),
        np.array([params.sign > 0]),
        dt_hours,
    )
    return TclState(temperature=float(theta[0]), mode=int(mode[0]),
                    clock=state.clock + dt_hours)


@dataclass(frozen=True)
class DutyCycle:
    """Steady-state cycling figures for one TCL at a fixed ambient.

    power_kw is the exact cycle-average power P_m*T_on/(T_on+T_off);
    approx_kw is the linearized a*|ambient - setpoint|/b form (both clamped
    to [0, P_m]). saturation is None for a normally cycling unit, or
    "always_off"/"always_on" when the ambient pins the unit at one end
    (the unit then never cycles and on/off times are None).
    """

    power_kw: float
    approx_kw: float
    on_time_h: Optional[float]
    off_time_h: Optional[float]
    saturation: Optional[str] = None

    @property
    def cycles_per_day(self) -> float:
        if self.saturation is not None:
            return 0.0
        return 24.0 / (self.on_time_h + self.off_time_h)


def duty_cycle_power(params: TclParams, ambient_c: float) -> DutyCycle:
    """Exact cycle-average power from the closed-form deadband transit times.

    For a cycling unit the OFF segment runs from one band edge to the
    other under the OFF dynamics and the ON segment back under the ON
    dynamics; both transit times follow from the exponential solution.
    Ambient regimes where the unit cannot cycle are reported through the
    saturation flag, never as an exception.
    """
    if not math.isfinite(ambient_c):
        raise ValueError("ambient_c must be finite")
    a = params.thermal_rate
    b = params.heat_gain
    lo, hi = params.band_low, params.band_high
    th_on, th_off = mode_asymptotes(params, ambient_c)

    if params.sign > 0:  # cooling: OFF drifts up to hi, ON pulls down to lo
        approx = a * (ambient_c - params.setpoint) / b
        needs_run = th_off > hi
        can_cycle = th_on < lo
        if needs_run and can_cycle:
            t_off = math.log((th_off - lo) / (th_off - hi)) / a
            t_on = math.log((hi - th_on) / (lo - th_on)) / a
        elif not needs_run:
            return DutyCycle(0.0, _clamp(approx, params.rated_power), None, None,
                             saturation="always_off")
        else:
            return DutyCycle(params.rated_power, _clamp(approx, params.rated_power),
                             None, None, saturation="always_on")
    else:  # heating: OFF drifts down to lo, ON pushes up to hi
        approx = a * (params.setpoint - ambient_c) / b
        needs_run = th_off < lo
        can_cycle = th_on > hi
        if needs_run and can_cycle:
            t_off = math.log((hi - th_off) / (lo - th_off)) / a
            t_on = math.log((th_on - lo) / (th_on - hi)) / a
        elif not needs_run:
            return DutyCycle(0.0, _clamp(approx, params.rated_power), None, None,
                             saturation="always_off")
        else:
            return DutyCycle(params.rated_power, _clamp(approx, params.rated_power),
                             None, None, saturation="always_on")

    exact = params.rated_power * t_on / (t_on + t_off)
    return DutyCycle(exact, _clamp(approx, params.rated_power), t_on, t_off)


def _clamp(value: float, upper: float) -> float:
    return min(max(value, 0.0), upper)


def limit_cycle_states(params: TclParams, ambient_c: float, n: int,
                       rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw n initial (temperature, mode) pairs uniform in cycle phase.

    An uncoordinated population sits at random points along the
    steady-state ON/OFF limit cycle; sampling the phase uniformly
    reproduces that. Requires a cycling regime (raises if the unit is
    saturated at this ambient).
    """
    duty = duty_cycle_power(params, ambient_c)
    if duty.saturation is not None:
        raise ValueError(
            f"no limit cycle at ambient {ambient_c} degC ({duty.saturation})")
    a = params.thermal_rate
    lo, hi = params.band_low, params.band_high
    th_on, th_off = mode_asymptotes(params, ambient_c)
    cycle = duty.on_time_h + duty.off_time_h
    phase = rng.uniform(0.0, cycle, size=n)

    theta = np.empty(n)
    mode = np.zeros(n, dtype=np.int8)
    on = phase < duty.on_time_h
    mode[on] = 1
    if params.sign > 0:
        # ON leg runs hi -> lo, OFF leg lo -> hi
        theta[on] = th_on + (hi - th_on) * np.exp(-a * phase[on])
        tau = phase[~on] - duty.on_time_h
        theta[~on] = th_off + (lo - th_off) * np.exp(-a * tau)
    else:
        # ON leg runs lo -> hi, OFF leg hi -> lo
        theta[on] = th_on + (lo - th_on) * np.exp(-a * phase[on])
        tau = phase[~on] - duty.on_time_h
        theta[~on] = th_off + (hi - th_off) * np.exp(-a * tau)
    return theta, mode


__all__ = [
    "AmbientSeries", "DutyCycle", "TclParams", "TclState",
    "BAND_TOL_C", "COOLING", "EVENT_TOL_H", "HEATING",
    "duty_cycle_power", "limit_cycle_states", "mode_asymptotes", "step_tcl",
]
