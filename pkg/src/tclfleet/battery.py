"""Generalized battery abstraction of aggregate fleet flexibility.

A fleet's trackable power deviations are summarized by four non-negative
parameters: energy capacity (kWh), charge limit n- (kW), discharge limit
n+ (kW), and a dissipation rate alpha (1/h). A deviation signal u(t) is
admissible when -n- <= u <= n+ pointwise and the state of charge

    dx/dt = -alpha*x - u,  x(0) = x0

stays within [-capacity, +capacity]. Sign convention: u > 0 means the
fleet draws above baseline (regulation down), which discharges x; u < 0
(regulation up) charges it. n- therefore caps the charging draw and n+
the discharging draw.

For piecewise-constant u the SoC update is exact:

    x[k+1] = x[k]*exp(-alpha*dt) - u[k]*(1 - exp(-alpha*dt))/alpha

with the alpha -> 0 limit u[k]*dt; the gain is evaluated through expm1
so small alpha*dt does not cancel.

For a homogeneous cluster of N units the parameters are capacity =
N*deadband/b, n- = N*P_o, n+ = N*(P_m - P_o), alpha = a, with P_o the
linearized duty-cycle power.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .tcl import TclParams, duty_cycle_power

POWER_UNITS = {"kW": 1.0, "MW": 1e3, "GW": 1e6}

# Unit tag of dimensionless (normalized) signal samples.
DIMENSIONLESS = "1"


class UnitMismatchError(ValueError):
    """Battery and signal units disagree; convert explicitly first."""


@dataclass(frozen=True)
class GeneralizedBattery:
    """Four-parameter flexibility envelope of a fleet.

    energy_capacity   kWh-like (unit x hours)
    charge_limit      n-, max draw below baseline (power unit)
    discharge_limit   n+, max draw above baseline (power unit)
    dissipation       alpha (1/h)
    unit              power unit of the limits ("kW", "MW", "GW")
    saturated         True when the duty cycle pinned P_o at 0 or P_m,
                      degenerating one power limit to zero
    """

    energy_capacity: float
    charge_limit: float
    discharge_limit: float
    dissipation: float
    unit: str = "kW"
    saturated: bool = False

    def __post_init__(self):
        for name in ("energy_capacity", "charge_limit", "discharge_limit",
                     "dissipation"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if self.unit not in POWER_UNITS:
            raise ValueError(f"unknown power unit {self.unit!r}")

    def to(self, unit: str) -> GeneralizedBattery:
        """Same battery expressed in another power unit."""
        if unit not in POWER_UNITS:
            raise ValueError(f"unknown power unit {unit!r}")
        factor = POWER_UNITS[self.unit] / POWER_UNITS[unit]
        return replace(
            self,
            energy_capacity=self.energy_capacity * factor,
            charge_limit=self.charge_limit * factor,
            discharge_limit=self.discharge_limit * factor,
            unit=unit,
        )


@dataclass(frozen=True)
class SignalSeries:
    """Uniformly sampled power-deviation (or normalized) signal.

    values are sample-and-hold over each dt_hours interval. A normalized
    trace is dimensionless in [-1, 1] (unit "1") and must be scaled to a
    power unit before battery operations.
    """

    dt_hours: float
    values: np.ndarray = field(repr=False)
    unit: str = "kW"
    normalized: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("signal must be a non-empty 1-D series")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal contains non-finite samples")
        if not (math.isfinite(self.dt_hours) and self.dt_hours > 0):
            raise ValueError(f"dt_hours must be > 0, got {self.dt_hours!r}")
        if self.normalized and self.unit != DIMENSIONLESS:
            raise ValueError("normalized signals are dimensionless (unit '1')")
        if not self.normalized and self.unit not in POWER_UNITS:
            raise ValueError(f"unknown power unit {self.unit!r}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration_hours(self) -> float:
        return self.dt_hours * len(self.values)

    def scale(self, amplitude: float, unit: str = "kW") -> SignalSeries:
        """Power signal amplitude*values in the given unit."""
        if unit not in POWER_UNITS:
            raise ValueError(f"unknown power unit {unit!r}")
        return SignalSeries(self.dt_hours, self.values * amplitude, unit=unit,
                            normalized=False)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of an admissibility check.

    kind is "power" (sample outside [-n-, n+], index on the sample grid)
    or "energy" (|x| > capacity, index on the state grid where x[0] = x0)
    for the first violation; both None when admissible.
    """

    admissible: bool
    kind: Optional[str] = None
    index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.admissible


def _require_same_unit(batt: GeneralizedBattery, u: SignalSeries) -> None:
    if u.normalized:
        raise UnitMismatchError(
            "normalized signal is dimensionless; scale() it to a power first")
    if u.unit != batt.unit:
        raise UnitMismatchError(
            f"signal unit {u.unit!r} != battery unit {batt.unit!r}")


def _decay_and_gain(alpha: float, dt: float) -> tuple[float, float]:
    # x[k+1] = decay*x[k] - gain*u[k]; gain -> dt as alpha -> 0
    decay = math.exp(-alpha * dt)
    gain = dt if alpha == 0.0 else -math.expm1(-alpha * dt) / alpha
    return decay, gain


def soc_trajectory(batt: GeneralizedBattery, u: SignalSeries,
                   x0: float = 0.0) -> np.ndarray:
    """State of charge on the signal grid, length len(u) + 1, x[0] = x0."""
    _require_same_unit(batt, u)
    if not math.isfinite(x0):
        raise ValueError("x0 must be finite")
    decay, gain = _decay_and_gain(batt.dissipation, u.dt_hours)
    values = u.values
    x = np.empty(len(values) + 1)
    acc = float(x0)
    x[0] = acc
    for k in range(len(values)):
        acc = decay * acc - gain * values[k]
        x[k + 1] = acc
    return x


def is_admissible(batt: GeneralizedBattery, u: SignalSeries,
                  x0: float = 0.0) -> AdmissibilityReport:
    """Check power bounds and SoC containment; report the first violation.

    Power bounds are checked at each sample before the state update it
    drives, so a power violation at sample k precedes an energy violation
    at state index k + 1.
    """
    _require_same_unit(batt, u)
    if not math.isfinite(x0):
        raise ValueError("x0 must be finite")
    cap = batt.energy_capacity
    if abs(x0) > cap:
        return AdmissibilityReport(False, kind="energy", index=0)
    decay, gain = _decay_and_gain(batt.dissipation, u.dt_hours)
    lo = -batt.charge_limit
    hi = batt.discharge_limit
    acc = float(x0)
    for k, sample in enumerate(u.values):
        if sample < lo or sample > hi:
            return AdmissibilityReport(False, kind="power", index=k)
        acc = decay * acc - gain * sample
        if abs(acc) > cap:
            return AdmissibilityReport(False, kind="energy", index=k + 1)
    return AdmissibilityReport(True)


def linearized_baseline(params: TclParams, ambient_c) -> np.ndarray:
    """Linearized duty-cycle power a*|ambient - setpoint|/b, clamped to
    [0, rated_power]; vectorized over ambient temperatures."""
    ambient = np.asarray(ambient_c, dtype=float)
    po = params.sign * params.thermal_rate * (ambient - params.setpoint) \
        / params.heat_gain
    return np.clip(po, 0.0, params.rated_power)


def battery_from_fleet(params: TclParams, ambient_c: float,
                       n_units: float) -> GeneralizedBattery:
    """Battery parameters of a homogeneous cluster of n_units TCLs.

    Uses the linearized duty-cycle power, so capacity = N*deadband/b,
    n- = N*P_o, n+ = N*(P_m - P_o), alpha = a. Saturated ambients (P_o
    pinned at 0 or P_m) are flagged, not raised: one power limit is then
    legitimately zero.
    """
    if not (math.isfinite(n_units) and n_units >= 0):
        raise ValueError(f"n_units must be finite and >= 0, got {n_units!r}")
    duty = duty_cycle_power(params, ambient_c)
    po = duty.approx_kw
    saturated = po <= 0.0 or po >= params.rated_power
    return GeneralizedBattery(
        energy_capacity=n_units * params.deadband / params.heat_gain,
        charge_limit=n_units * po,
        discharge_limit=n_units * (params.rated_power - po),
        dissipation=params.thermal_rate,
        unit="kW",
        saturated=saturated,
    )


def max_energy_requirement(dissipation: float, amplitude: float,
                           r: SignalSeries) -> float:
    """Peak |SoC| needed to track amplitude*r under the given dissipation.

    r must be a normalized trace in [-1, 1]; the result carries
    amplitude's power unit times hours (MW amplitude -> MWh). Linear in
    amplitude exactly, since the SoC recursion is linear in u.
    """
    if not (math.isfinite(dissipation) and dissipation >= 0):
        raise ValueError(f"dissipation must be finite and >= 0")
    if not (math.isfinite(amplitude) and amplitude > 0):
        raise ValueError(f"amplitude must be finite and > 0, got {amplitude!r}")
    if not r.normalized:
        raise ValueError("r must be a normalized signal")
    bad = np.nonzero(np.abs(r.values) > 1.0)[0]
    if bad.size:
        raise ValueError(
            f"normalized sample out of [-1, 1] at index {int(bad[0])}")
    decay, gain = _decay_and_gain(dissipation, r.dt_hours)
    peak = 0.0
    acc = 0.0
    for sample in r.values:
        acc = decay * acc - gain * sample
        mag = abs(acc)
        if mag > peak:
            peak = mag
    return amplitude * peak


__all__ = [
    "AdmissibilityReport", "DIMENSIONLESS", "GeneralizedBattery",
    "POWER_UNITS", "SignalSeries", "UnitMismatchError",
    "battery_from_fleet", "is_admissible", "linearized_baseline",
    "max_energy_requirement", "soc_trajectory",
]
