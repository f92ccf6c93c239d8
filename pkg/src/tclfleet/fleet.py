"""State-level fleet construction and hourly flexibility series.

Installed counts come from household totals times per-class saturation
rates (saturation may exceed 1 when homes own several units, as with
refrigerators). Weather-exposed classes scale further by a
temperature-dependent participation fraction

    p = p_min + (p_max - p_min)*(atan(+-k*(theta_a - theta_mid))/pi + 1/2)

evaluated against each city's hourly ambient series, and the per-city
batteries are combined with household-share weights. Classes with a
fixed ambient (water heaters, refrigerators indoors at a constant
temperature) bypass both and contribute constant series.

All series here are kW/kWh; GW appears only in reporting helpers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .battery import linearized_baseline
from .tcl import AmbientSeries, TclParams

INCREASING = "increasing"
DECREASING = "decreasing"

HOURS_PER_YEAR = 8760


@dataclass(frozen=True)
class ParticipationCurve:
    """Smooth fraction-of-units-available vs ambient temperature.

    Arctangent profile between p_min and p_max, centered at midpoint_c
    with slope_per_c controlling the transition width; increasing curves
    rise with temperature (cooling loads), decreasing curves fall
    (heating loads).
    """

    p_min: float
    p_max: float
    midpoint_c: float
    slope_per_c: float
    direction: str = INCREASING

    def __post_init__(self):
        if not (0.0 <= self.p_min <= self.p_max <= 1.0):
            raise ValueError(
                f"need 0 <= p_min <= p_max <= 1, got {self.p_min}, {self.p_max}")
        if not (math.isfinite(self.slope_per_c) and self.slope_per_c > 0):
            raise ValueError("slope_per_c must be finite and > 0")
        if not math.isfinite(self.midpoint_c):
            raise ValueError("midpoint_c must be finite")
        if self.direction not in (INCREASING, DECREASING):
            raise ValueError(
                f"direction must be '{INCREASING}' or '{DECREASING}'")


# Defaults are assumptions (the source curves are qualitative): cooling
# availability rises around 25 degC, heat-pump availability falls around
# 10 degC, both over the full [0, 1] range.
AC_PARTICIPATION = ParticipationCurve(0.0, 1.0, 25.0, 0.5, INCREASING)
HEAT_PUMP_PARTICIPATION = ParticipationCurve(0.0, 1.0, 10.0, 0.5, DECREASING)


def participation(curve: ParticipationCurve, ambient_c) -> np.ndarray:
    """Participating fraction at the given ambient(s); monotone, within
    [p_min, p_max], and exactly the midpoint average at midpoint_c."""
    ambient = np.asarray(ambient_c, dtype=float)
    if not np.all(np.isfinite(ambient)):
        raise ValueError("ambient_c must be finite")
    sign = 1.0 if curve.direction == INCREASING else -1.0
    shape = np.arctan(sign * curve.slope_per_c * (ambient - curve.midpoint_c))
    return curve.p_min + (curve.p_max - curve.p_min) * (shape / np.pi + 0.5)


@dataclass(frozen=True)
class DeviceClass:
    """One appliance class of a state-level fleet."""

    name: str
    params: TclParams
    saturation_rate: float
    fixed_ambient_c: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.saturation_rate) and
                self.saturation_rate >= 0):
            raise ValueError("saturation_rate must be finite and >= 0")
        if self.fixed_ambient_c is not None and \
                not math.isfinite(self.fixed_ambient_c):
            raise ValueError("fixed_ambient_c must be finite")


@dataclass(frozen=True)
class CityProfile:
    """A city's household count and hourly ambient series."""

    name: str
    households: float
    ambient: AmbientSeries

    def __post_init__(self):
        if not (math.isfinite(self.households) and self.households > 0):
            raise ValueError("households must be finite and > 0")


@dataclass(frozen=True)
class FlexibilitySeries:
    """Hourly battery limits per device class, kW/kWh internally.

    Row i of each array is class class_names[i]; totals are exact sums
    over classes at every hour.
    """

    class_names: tuple[str, ...]
    up_kw: np.ndarray = field(repr=False)        # charge limit n-
    down_kw: np.ndarray = field(repr=False)      # discharge limit n+
    energy_kwh: np.ndarray = field(repr=False)   # capacity

    def __post_init__(self):
        n = len(self.class_names)
        for name in ("up_kw", "down_kw", "energy_kwh"):
            arr = getattr(self, name)
            if arr.ndim != 2 or arr.shape[0] != n:
                raise ValueError(f"{name} must be (n_classes, hours)")
            if arr.shape[1] != self.up_kw.shape[1]:
                raise ValueError("class series lengths differ")

    @property
    def hours(self) -> int:
        return self.up_kw.shape[1]

    @property
    def total_up_kw(self) -> np.ndarray:
        return self.up_kw.sum(axis=0)

    @property
    def total_down_kw(self) -> np.ndarray:
        return self.down_kw.sum(axis=0)

    @property
    def total_energy_kwh(self) -> np.ndarray:
        return self.energy_kwh.sum(axis=0)

    def class_row(self, name: str) -> int:
        try:
            return self.class_names.index(name)
        except ValueError:
            raise KeyError(f"no class named {name!r}") from None


def city_weights(cities: Sequence[CityProfile]) -> np.ndarray:
    """Household-share weights, summing to 1."""
    if not cities:
        raise ValueError("city list must be non-empty")
    counts = np.array([c.households for c in cities], dtype=float)
    return counts / counts.sum()


def hourly_flexibility(classes: Sequence[DeviceClass],
                       cities: Sequence[CityProfile],
                       curves: Mapping[str, ParticipationCurve],
                       households_total: float) -> FlexibilitySeries:
    """Hourly flexibility of every class, weighted across cities.

    Installed count per class is households_total * saturation_rate.
    Weather-exposed classes (fixed_ambient_c None) use each city's
    ambient and their participation curve (full participation when no
    curve is given); fixed-ambient classes yield constant series. All
    city ambient series must share one length.
    """
    if not classes:
        raise ValueError("class list must be non-empty")
    names = [cls.name for cls in classes]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate class names: {names}")
    weights = city_weights(cities)
    if not (math.isfinite(households_total) and households_total >= 0):
        raise ValueError("households_total must be finite and >= 0")

    lengths = {len(c.ambient) for c in cities}
    if len(lengths) != 1:
        raise ValueError(f"city ambient series lengths differ: {sorted(lengths)}")
    hours = lengths.pop()

    up = np.empty((len(classes), hours))
    down = np.empty((len(classes), hours))
    energy = np.empty((len(classes), hours))

    for i, cls in enumerate(classes):
        p = cls.params
        n_installed = households_total * cls.saturation_rate
        per_unit_cap = p.deadband / p.heat_gain
        if cls.fixed_ambient_c is not None:
            po = float(linearized_baseline(p, cls.fixed_ambient_c))
            up[i, :] = n_installed * po
            down[i, :] = n_installed * (p.rated_power - po)
            energy[i, :] = n_installed * per_unit_cap
            continue
        curve = curves.get(cls.name)
        up_i = np.zeros(hours)
        down_i = np.zeros(hours)
        energy_i = np.zeros(hours)
        for w, city in zip(weights, cities):
            ambient = city.ambient.values
            frac = participation(curve, ambient) if curve is not None else 1.0
            n_eff = n_installed * frac
            po = linearized_baseline(p, ambient)
            up_i += w * n_eff * po
            down_i += w * n_eff * (p.rated_power - po)
            energy_i += w * n_eff * per_unit_cap
        up[i, :] = up_i
        down[i, :] = down_i
        energy[i, :] = energy_i

    return FlexibilitySeries(
        class_names=tuple(cls.name for cls in classes),
        up_kw=up, down_kw=down, energy_kwh=energy)


@dataclass(frozen=True)
class ClassPeak:
    """Per-class maxima over the horizon (kW/kWh)."""

    name: str
    up_kw: float
    down_kw: float
    energy_kwh: float


@dataclass(frozen=True)
class FleetSummary:
    """Per-class peaks and the minima of the combined series."""

    class_peaks: tuple[ClassPeak, ...]
    min_total_up_kw: float
    min_total_down_kw: float
    min_total_energy_kwh: float


def summary_stats(series: FlexibilitySeries) -> FleetSummary:
    """Headline figures: what each class can offer at best, and the worst
    hour of the combined fleet."""
    if series.hours == 0:
        raise ValueError("empty series")
    peaks = tuple(
        ClassPeak(
            name=name,
            up_kw=float(series.up_kw[i].max()),
            down_kw=float(series.down_kw[i].max()),
            energy_kwh=float(series.energy_kwh[i].max()),
        )
        for i, name in enumerate(series.class_names)
    )
    return FleetSummary(
        class_peaks=peaks,
        min_total_up_kw=float(series.total_up_kw.min()),
        min_total_down_kw=float(series.total_down_kw.min()),
        min_total_energy_kwh=float(series.total_energy_kwh.min()),
    )


__all__ = [
    "AC_PARTICIPATION", "CityProfile", "ClassPeak", "DECREASING",
    "DeviceClass", "FleetSummary", "FlexibilitySeries",
    "HEAT_PUMP_PARTICIPATION", "HOURS_PER_YEAR", "INCREASING",
    "ParticipationCurve", "city_weights", "hourly_flexibility",
    "participation", "summary_stats",
]
