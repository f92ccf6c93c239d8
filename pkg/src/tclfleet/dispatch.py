"""Priority-stack dispatch of a simulated TCL population.

The fleet's power deviation from baseline, sum(q*P_m) - sum(P_o), tracks
a 4-second setpoint stream by overriding unit ON/OFF states. At each
control step units are ranked by normalized temperature margin
(theta - band_low)/(band_high - band_low); to raise consumption the
hottest cooling units switch ON first, to lower it the coldest switch
OFF first (heating mirrored). The stack is walked only while a toggle
strictly shrinks the tracking error, and a unit sitting at the band edge
it would be driven past is excluded, so commanded toggles can never
create a comfort violation. Between control instants every unit follows
its own hysteresis control with the exact per-segment solution.

Tracking quality uses the regulation-market convention: per 15-minute
window, score = max(0, (sum|setpoint| - sum|error|)/sum|setpoint|),
with zero-setpoint windows scoring 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import _core
from .battery import GeneralizedBattery, SignalSeries
from .tcl import (
    BAND_TOL_C,
    TclParams,
    duty_cycle_power,
    limit_cycle_states,
    mode_asymptotes,
)

# Regulation products update on a 4 s cycle.
CONTROL_STEP_S = 4.0
CONTROL_STEP_H = CONTROL_STEP_S / 3600.0
WINDOW_MINUTES = 15.0


class SimFleet:
    """Mutable simulation state of a TCL population at fixed ambient.

    Parameter arrays are frozen at construction; theta and mode evolve as
    the fleet is stepped or tracked. Baseline power is the sum of exact
    duty-cycle averages, so an idle fleet hovers near zero deviation.
    """

    def __init__(self, params: Sequence[TclParams], ambient_c: float,
                 theta: np.ndarray, mode: np.ndarray):
        if len(params) == 0:
            raise ValueError("fleet must contain at least one unit")
        if not math.isfinite(ambient_c):
            raise ValueError("ambient_c must be finite")
        n = len(params)
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        mode = np.ascontiguousarray(mode, dtype=np.int8)
        if theta.shape != (n,) or mode.shape != (n,):
            raise ValueError("theta and mode must have one entry per unit")
        if not np.all((mode == 0) | (mode == 1)):
            raise ValueError("mode entries must be 0 or 1")

        self.params = tuple(params)
        self.ambient_c = float(ambient_c)
        self.theta = theta
        self.mode = mode

        self.a = np.array([p.thermal_rate for p in params])
        self.lo = np.array([p.band_low for p in params])
        self.hi = np.array([p.band_high for p in params])
        self.pm = np.array([p.rated_power for p in params])
        self.cooling = np.array([p.sign > 0 for p in params], dtype=np.uint8)
        asym = [mode_asymptotes(p, ambient_c) for p in params]
        self.th_on = np.array([t[0] for t in asym])
        self.th_off = np.array([t[1] for t in asym])
        self.po = np.array(
            [duty_cycle_power(p, ambient_c).power_kw for p in params])

    @classmethod
    def homogeneous(cls, params: TclParams, n_units: int, ambient_c: float,
                    rng: np.random.Generator) -> "SimFleet":
        """n_units identical TCLs initialized on their steady-state cycle."""
        if n_units <= 0:
            raise ValueError("n_units must be positive")
        theta, mode = limit_cycle_states(params, ambient_c, n_units, rng)
        return cls([params] * n_units, ambient_c, theta, mode)

    def __len__(self) -> int:
        return len(self.params)

    @property
    def baseline_kw(self) -> float:
        """Aggregate steady-state draw sum(P_o), exact duty-cycle form."""
        return float(self.po.sum())

    @property
    def deviation_kw(self) -> float:
        """Current deviation sum(q*P_m) - baseline."""
        return float(self.pm[self.mode == 1].sum()) - self.baseline_kw

    @property
    def envelope_kw(self) -> tuple[float, float]:
        """(all-OFF, all-ON) deviation bounds of the population."""
        return -self.baseline_kw, float(self.pm.sum()) - self.baseline_kw

    def battery(self) -> GeneralizedBattery:
        """Aggregate generalized-battery envelope of this fleet.

        Per-unit linearized duty-cycle powers summed componentwise;
        requires a uniform thermal rate (one dissipation per cluster).
        """
        if not np.allclose(self.a, self.a[0], rtol=0.0, atol=0.0):
            raise ValueError("mixed thermal rates; split into clusters first")
        po_lin = np.array(
            [duty_cycle_power(p, self.ambient_c).approx_kw for p in self.params])
        cap = sum(p.deadband / p.heat_gain for p in self.params)
        saturated = bool(np.any(po_lin <= 0.0) or
                         np.any(po_lin >= self.pm))
        return GeneralizedBattery(
            energy_capacity=float(cap),
            charge_limit=float(po_lin.sum()),
            discharge_limit=float((self.pm - po_lin).sum()),
            dissipation=float(self.a[0]),
            unit="kW",
            saturated=saturated,
        )

    def advance(self, dt_hours: float) -> tuple[np.ndarray, np.ndarray]:
        """Free-run every unit by dt_hours; returns (toggles, on_hours)."""
        if dt_hours <= 0:
            raise ValueError("dt_hours must be positive")
        return _core.advance_units(
            self.theta, self.mode, self.a, self.th_on, self.th_off,
            self.lo, self.hi, self.cooling, float(dt_hours))


@dataclass(frozen=True)
class DispatchStep:
    """One control instant: setpoint and achieved deviation in kW."""

    time_s: float
    setpoint_kw: float
    achieved_kw: float
    toggles: int

    @property
    def error_kw(self) -> float:
        return self.setpoint_kw - self.achieved_kw


@dataclass(frozen=True)
class TrackResult:
    """Outcome of tracking a setpoint stream with a fleet.

    violations[k] counts units outside their comfort band by more than
    band_tol_c after step k (zero for admissible signals by
    construction); unit_toggles includes commanded and thermostat
    switches.
    """

    dt_s: float
    setpoint_kw: np.ndarray = field(repr=False)
    achieved_kw: np.ndarray = field(repr=False)
    step_toggles: np.ndarray = field(repr=False)
    violations: np.ndarray = field(repr=False)
    unit_toggles: np.ndarray = field(repr=False)
    unit_on_hours: np.ndarray = field(repr=False)
    band_tol_c: float = BAND_TOL_C

    def __len__(self) -> int:
        return len(self.setpoint_kw)

    @property
    def error_kw(self) -> np.ndarray:
        return self.setpoint_kw - self.achieved_kw

    @property
    def total_violations(self) -> int:
        return int(self.violations.sum())

    @property
    def duration_hours(self) -> float:
        return len(self) * self.dt_s / 3600.0

    @property
    def cycles_per_unit_per_day(self) -> float:
        """Mean ON/OFF cycles per unit per day (two toggles = one cycle)."""
        days = self.duration_hours / 24.0
        return float(self.unit_toggles.mean()) / 2.0 / days

    def steps(self) -> Iterator[DispatchStep]:
        for k in range(len(self)):
            yield DispatchStep(
                time_s=k * self.dt_s,
                setpoint_kw=float(self.setpoint_kw[k]),
                achieved_kw=float(self.achieved_kw[k]),
                toggles=int(self.step_toggles[k]),
            )


def track(fleet: SimFleet, u: SignalSeries,
          min_dwell_s: float = 0.0) -> TrackResult:
    """Track the deviation signal u with the fleet, mutating its state.

    u must be a kW power signal; its sample step is the control step.
    min_dwell_s > 0 locks each unit out of commanded toggles for that
    long after a command (thermostat switches are never locked out).
    """
    if u.normalized or u.unit != "kW":
        raise ValueError("dispatch tracks kW power signals; scale() first")
    if min_dwell_s < 0:
        raise ValueError("min_dwell_s must be >= 0")
    dt_s = u.dt_hours * 3600.0
    dwell_steps = int(math.ceil(min_dwell_s / dt_s)) if min_dwell_s else 0
    achieved, cmd_toggles, violations, unit_toggles, on_hours = \
        _core.track_signal(
            fleet.theta, fleet.mode, fleet.a, fleet.th_on, fleet.th_off,
            fleet.lo, fleet.hi, fleet.cooling, fleet.pm, fleet.po,
            u.values, u.dt_hours,
            band_tol=BAND_TOL_C, dwell_steps=dwell_steps)
    return TrackResult(
        dt_s=dt_s,
        setpoint_kw=u.values.copy(),
        achieved_kw=achieved,
        step_toggles=cmd_toggles,
        violations=violations,
        unit_toggles=unit_toggles,
        unit_on_hours=on_hours,
    )


@dataclass(frozen=True)
class AccuracyWindow:
    """One scoring window of the pay-for-performance metric."""

    start_index: int
    setpoint_sum_kw: float
    error_sum_kw: float
    score: float


@dataclass(frozen=True)
class AccuracyReport:
    windows: tuple[AccuracyWindow, ...]
    aggregate: float

    @property
    def worst(self) -> float:
        return min(w.score for w in self.windows)


def _window_score(setpoint_sum: float, error_sum: float) -> float:
    if setpoint_sum == 0.0:
        return 1.0
    return max(0.0, (setpoint_sum - error_sum) / setpoint_sum)


def accuracy(result: TrackResult,
             window_minutes: float = WINDOW_MINUTES) -> AccuracyReport:
    """Per-window scores over full windows plus the horizon aggregate."""
    steps_per_window = int(round(window_minutes * 60.0 / result.dt_s))
    if steps_per_window <= 0:
        raise ValueError("window shorter than one control step")
    n_windows = len(result) // steps_per_window
    if n_windows == 0:
        raise ValueError(
            f"horizon covers no full {window_minutes:g}-minute window")
    abs_sp = np.abs(result.setpoint_kw)
    abs_err = np.abs(result.error_kw)
    windows = []
    for w in range(n_windows):
        sl = slice(w * steps_per_window, (w + 1) * steps_per_window)
        sp_sum = float(abs_sp[sl].sum())
        err_sum = float(abs_err[sl].sum())
        windows.append(AccuracyWindow(
            start_index=sl.start,
            setpoint_sum_kw=sp_sum,
            error_sum_kw=err_sum,
            score=_window_score(sp_sum, err_sum),
        ))
    aggregate = _window_score(float(abs_sp.sum()), float(abs_err.sum()))
    return AccuracyReport(windows=tuple(windows), aggregate=aggregate)


def ramp_check(fleet: SimFleet, target_kw: float,
               dt_s: float = CONTROL_STEP_S, max_steps: int = 150,
               fraction: float = 0.95) -> float:
    """Seconds for the achieved deviation to first reach fraction*target
    under a held step command; 0.0 for a zero target.

    Raises if the target lies outside the all-OFF/all-ON envelope.
    """
    if not math.isfinite(target_kw):
        raise ValueError("target_kw must be finite")
    low, high = fleet.envelope_kw
    if not (low <= target_kw <= high):
        raise ValueError(
            f"target {target_kw:.6g} kW outside fleet envelope "
            f"[{low:.6g}, {high:.6g}] kW")
    if target_kw == 0.0:
        return 0.0
    u = SignalSeries(dt_s / 3600.0, np.full(max_steps, target_kw), unit="kW")
    result = track(fleet, u)
    reached = np.nonzero(result.achieved_kw / target_kw >= fraction)[0]
    if reached.size == 0:
        raise ValueError(
            f"target not reached within {max_steps} control steps")
    # The first control action takes effect one step after command issue.
    return float((reached[0] + 1) * dt_s)


__all__ = [
    "AccuracyReport", "AccuracyWindow", "CONTROL_STEP_H", "CONTROL_STEP_S",
    "DispatchStep", "SimFleet", "TrackResult", "WINDOW_MINUTES",
    "accuracy", "ramp_check", "track",
]
