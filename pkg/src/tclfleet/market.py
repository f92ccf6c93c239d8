"""Regulation-market revenue from hourly prices and awarded capability.

Hourly revenue per direction is

    capacity_price * awarded_capacity
  + mileage_price * awarded_mileage * accuracy

with up and down settled separately. Awards derive from the fleet's
hourly flexibility: capacity equals the offered limit and mileage is a
configurable multiple of capacity (dispatch data fixing the true ratio
is not public, so every mileage figure is assumption-dependent).
Prices are $/MW per hour; awards are MW. Per-unit figures divide fleet
revenue by the installed unit count, not the hourly participating count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping, Optional, Sequence

import numpy as np

from .fleet import FlexibilitySeries

KW_PER_MW = 1000.0

DEFAULT_ACCURACY = 0.95
DEFAULT_MILEAGE_MULTIPLIER = 2.5


@dataclass(frozen=True)
class PriceSeries:
    """Hourly market clearing prices, $/MW per hour."""

    ru_cap: np.ndarray = field(repr=False)
    rd_cap: np.ndarray = field(repr=False)
    ru_mil: np.ndarray = field(repr=False)
    rd_mil: np.ndarray = field(repr=False)
    start: Optional[datetime] = None

    def __post_init__(self):
        arrays = {}
        length = None
        for name in ("ru_cap", "rd_cap", "ru_mil", "rd_mil"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise ValueError(f"{name} must be a non-empty 1-D series")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            if np.any(arr < 0):
                raise ValueError(f"{name} contains negative prices")
            if length is None:
                length = arr.size
            elif arr.size != length:
                raise ValueError("price columns have different lengths")
            arrays[name] = arr
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.ru_cap)

    @classmethod
    def flat(cls, hours: int, ru_cap: float, rd_cap: float,
             ru_mil: float, rd_mil: float) -> "PriceSeries":
        """Constant prices for every hour."""
        return cls(
            ru_cap=np.full(hours, float(ru_cap)),
            rd_cap=np.full(hours, float(rd_cap)),
            ru_mil=np.full(hours, float(ru_mil)),
            rd_mil=np.full(hours, float(rd_mil)),
        )


@dataclass(frozen=True)
class Award:
    """One class's hourly awarded capacity and mileage, MW."""

    name: str
    cap_up_mw: np.ndarray = field(repr=False)
    cap_down_mw: np.ndarray = field(repr=False)
    mil_up_mw: np.ndarray = field(repr=False)
    mil_down_mw: np.ndarray = field(repr=False)
    accuracy: float = DEFAULT_ACCURACY

    def __post_init__(self):
        if not (0.0 <= self.accuracy <= 1.0):
            raise ValueError(f"accuracy must be in [0, 1], got {self.accuracy!r}")
        length = None
        for attr in ("cap_up_mw", "cap_down_mw", "mil_up_mw", "mil_down_mw"):
            arr = np.asarray(getattr(self, attr), dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise ValueError(f"{attr} must be a non-empty 1-D series")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{attr} contains non-finite values")
            if np.any(arr < 0):
                raise ValueError(f"{attr} contains negative awards")
            if length is None:
                length = arr.size
            elif arr.size != length:
                raise ValueError("award columns have different lengths")
            object.__setattr__(self, attr, arr)

    def __len__(self) -> int:
        return len(self.cap_up_mw)


def award_from_flexibility(
        flex: FlexibilitySeries,
        mileage_multiplier: float = DEFAULT_MILEAGE_MULTIPLIER,
        accuracy: float = DEFAULT_ACCURACY) -> list[Award]:
    """Full-capability awards per class: capacity = offered hourly limit,
    mileage = mileage_multiplier * capacity."""
    if not (math.isfinite(mileage_multiplier) and mileage_multiplier >= 0):
        raise ValueError("mileage_multiplier must be finite and >= 0")
    awards = []
    for i, name in enumerate(flex.class_names):
        cap_up = flex.up_kw[i] / KW_PER_MW
        cap_down = flex.down_kw[i] / KW_PER_MW
        awards.append(Award(
            name=name,
            cap_up_mw=cap_up,
            cap_down_mw=cap_down,
            mil_up_mw=mileage_multiplier * cap_up,
            mil_down_mw=mileage_multiplier * cap_down,
            accuracy=accuracy,
        ))
    return awards


@dataclass(frozen=True)
class ClassRevenue:
    """Annual revenue of one class, split four ways ($)."""

    name: str
    cap_up: float
    cap_down: float
    mil_up: float
    mil_down: float
    installed_units: Optional[float] = None

    @property
    def total(self) -> float:
        return self.cap_up + self.cap_down + self.mil_up + self.mil_down

    def _per_unit(self, value: float) -> float:
        if not self.installed_units:
            raise ValueError(f"no installed count given for {self.name!r}")
        return value / self.installed_units

    @property
    def per_unit_cap_up(self) -> float:
        return self._per_unit(self.cap_up)

    @property
    def per_unit_cap_down(self) -> float:
        return self._per_unit(self.cap_down)

    @property
    def per_unit_mil_up(self) -> float:
        return self._per_unit(self.mil_up)

    @property
    def per_unit_mil_down(self) -> float:
        return self._per_unit(self.mil_down)

    @property
    def per_unit_total(self) -> float:
        return self._per_unit(self.total)


@dataclass(frozen=True)
class RevenueReport:
    """Revenue per class plus hourly fleet totals."""

    classes: tuple[ClassRevenue, ...]
    hourly_total: np.ndarray = field(repr=False)

    @property
    def annual_total(self) -> float:
        return float(sum(c.total for c in self.classes))

    def class_named(self, name: str) -> ClassRevenue:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(f"no class named {name!r}")


def revenue(awards: Sequence[Award], prices: PriceSeries,
            installed_counts: Optional[Mapping[str, float]] = None
            ) -> RevenueReport:
    """Settle awards against prices hour by hour.

    installed_counts (units per class name) enables the per-unit figures;
    classes absent from the mapping simply lack them.
    """
    if not awards:
        raise ValueError("award list must be non-empty")
    n_hours = len(prices)
    hourly_total = np.zeros(n_hours)
    rows = []
    for award in awards:
        if len(award) != n_hours:
            raise ValueError(
                f"award horizon {len(award)} != price horizon {n_hours}"
                f" for class {award.name!r}")
        cap_up_h = prices.ru_cap * award.cap_up_mw
        cap_down_h = prices.rd_cap * award.cap_down_mw
        mil_up_h = prices.ru_mil * award.mil_up_mw * award.accuracy
        mil_down_h = prices.rd_mil * award.mil_down_mw * award.accuracy
        hourly_total += cap_up_h + cap_down_h + mil_up_h + mil_down_h
        count = None
        if installed_counts is not None:
            count = installed_counts.get(award.name)
        rows.append(ClassRevenue(
            name=award.name,
            cap_up=float(cap_up_h.sum()),
            cap_down=float(cap_down_h.sum()),
            mil_up=float(mil_up_h.sum()),
            mil_down=float(mil_down_h.sum()),
            installed_units=count,
        ))
    return RevenueReport(classes=tuple(rows), hourly_total=hourly_total)


__all__ = [
    "Award", "ClassRevenue", "DEFAULT_ACCURACY",
    "DEFAULT_MILEAGE_MULTIPLIER", "KW_PER_MW", "PriceSeries",
    "RevenueReport", "award_from_flexibility", "revenue",
]
