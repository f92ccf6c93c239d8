"""Loading, validation, and synthesis of external inputs.

Three CSV kinds are understood, each with a fixed header:

    temperature        timestamp_utc,temp_c          hourly
    prices             timestamp_utc,ru_cap,rd_cap,ru_mil,rd_mil   hourly
    regulation_signal  t_seconds,value               uniform step

Leading ``# key=value`` comment lines carry metadata (a normalized trace
declares ``# normalized=true``). Every validation failure carries the
file path and 1-based row number. Fleet configuration is JSON.

Synthetic fixtures (city temperatures from annual+diurnal sinusoids,
flat average prices, a seeded zero-mean band-limited regulation trace)
are written under a ``synthetic/`` directory so they cannot be mistaken
for historical data, and are byte-deterministic given the seed.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .battery import SignalSeries
from .economics import CapitalCost
from .fleet import (
    CityProfile,
    DeviceClass,
    HOURS_PER_YEAR,
    ParticipationCurve,
)
from .market import PriceSeries
from .tcl import AmbientSeries, TclParams

TEMPERATURE = "temperature"
PRICES = "prices"
REGULATION_SIGNAL = "regulation_signal"

_HEADERS = {
    TEMPERATURE: ["timestamp_utc", "temp_c"],
    PRICES: ["timestamp_utc", "ru_cap", "rd_cap", "ru_mil", "rd_mil"],
    REGULATION_SIGNAL: ["t_seconds", "value"],
}

# Study epoch for synthetic hourly series; any non-leap year works.
FIXTURE_START = datetime(2018, 1, 1, tzinfo=timezone.utc)

SECONDS_PER_HOUR = 3600.0


class ValidationError(ValueError):
    """Input rejected; str() carries path and 1-based row number."""

    def __init__(self, message: str, path: Optional[Path] = None,
                 row: Optional[int] = None):
        self.path = path
        self.row = row
        where = str(path) if path is not None else "<input>"
        if row is not None:
            where += f", row {row}"
        super().__init__(f"{where}: {message}")


def _read_rows(path: Path, kind: str):
    """(metadata, header_row_number, data rows with row numbers)."""
    expected = _HEADERS[kind]
    meta: dict[str, str] = {}
    rows: list[tuple[int, list[str]]] = []
    header_seen = False
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read file: {exc}", path) from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if header_seen:
                raise ValidationError(
                    "comment lines are only allowed before the header",
                    path, lineno)
            body = line.lstrip("#").strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        cells = next(csv.reader([line]))
        if not header_seen:
            if [c.strip() for c in cells] != expected:
                raise ValidationError(
                    f"header must be {','.join(expected)!r}, "
                    f"got {line.strip()!r}", path, lineno)
            header_seen = True
            continue
        if len(cells) != len(expected):
            raise ValidationError(
                f"expected {len(expected)} columns, got {len(cells)}",
                path, lineno)
        rows.append((lineno, cells))
    if not header_seen:
        raise ValidationError("missing header row", path)
    if not rows:
        raise ValidationError("no data rows", path)
    return meta, rows


def _parse_float(cell: str, column: str, path: Path, row: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ValidationError(
            f"column {column!r}: not a number: {cell!r}", path, row) from None
    if not math.isfinite(value):
        raise ValidationError(
            f"column {column!r}: non-finite value {cell!r}", path, row)
    return value


def _parse_timestamp(cell: str, path: Path, row: int) -> datetime:
    text = cell.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError:
        raise ValidationError(
            f"bad ISO-8601 timestamp {cell!r}", path, row) from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc)


def _check_hourly(stamps: Sequence[datetime], rows, path: Path) -> None:
    step = timedelta(hours=1)
    for i in range(1, len(stamps)):
        gap = stamps[i] - stamps[i - 1]
        if gap == step:
            continue
        row = rows[i][0]
        if gap == timedelta(0):
            raise ValidationError(
                f"duplicate timestamp {_fmt_ts(stamps[i])}", path, row)
        if gap > step:
            missing = stamps[i - 1] + step
            raise ValidationError(
                f"gap: missing hour {_fmt_ts(missing)}", path, row)
        raise ValidationError(
            f"timestamps not monotone hourly at {_fmt_ts(stamps[i])}",
            path, row)


def _fmt_ts(stamp: datetime) -> str:
    return stamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def load_temperature_csv(path) -> AmbientSeries:
    """Hourly ambient series from a temperature CSV."""
    path = Path(path)
    _, rows = _read_rows(path, TEMPERATURE)
    stamps = []
    values = []
    for row, cells in rows:
        stamps.append(_parse_timestamp(cells[0], path, row))
        values.append(_parse_float(cells[1], "temp_c", path, row))
    _check_hourly(stamps, rows, path)
    return AmbientSeries(start=stamps[0], step_hours=1.0,
                         values=np.array(values))


def load_prices_csv(path) -> PriceSeries:
    """Hourly four-product price series from a prices CSV."""
    path = Path(path)
    _, rows = _read_rows(path, PRICES)
    stamps = []
    columns = {name: [] for name in ("ru_cap", "rd_cap", "ru_mil", "rd_mil")}
    for row, cells in rows:
        stamps.append(_parse_timestamp(cells[0], path, row))
        for cell, name in zip(cells[1:], columns):
            value = _parse_float(cell, name, path, row)
            if value < 0:
                raise ValidationError(
                    f"column {name!r}: negative price {value!r}", path, row)
            columns[name].append(value)
    _check_hourly(stamps, rows, path)
    return PriceSeries(
        ru_cap=np.array(columns["ru_cap"]),
        rd_cap=np.array(columns["rd_cap"]),
        ru_mil=np.array(columns["ru_mil"]),
        rd_mil=np.array(columns["rd_mil"]),
        start=stamps[0],
    )


def load_signal_csv(path) -> SignalSeries:
    """Uniform-step regulation signal; ``# normalized=true`` marks a
    dimensionless trace in [-1, 1] (checked per row)."""
    path = Path(path)
    meta, rows = _read_rows(path, REGULATION_SIGNAL)
    normalized = meta.get("normalized", "false").lower() == "true"
    times = []
    values = []
    for row, cells in rows:
        times.append(_parse_float(cells[0], "t_seconds", path, row))
        values.append(_parse_float(cells[1], "value", path, row))
    if len(times) < 2:
        raise ValidationError("need at least two samples", path)
    dt = times[1] - times[0]
    if dt <= 0:
        raise ValidationError("t_seconds must be strictly increasing",
                              path, rows[1][0])
    tol = max(1e-9, 1e-9 * abs(dt))
    for i in range(1, len(times)):
        if abs(times[i] - times[i - 1] - dt) > tol:
            raise ValidationError(
                f"non-uniform step at t={times[i]!r} "
                f"(expected spacing {dt!r})", path, rows[i][0])
    if normalized:
        for (row, _), value in zip(rows, values):
            if abs(value) > 1.0:
                raise ValidationError(
                    f"normalized sample {value!r} outside [-1, 1]",
                    path, row)
    unit = "1" if normalized else "kW"
    return SignalSeries(dt_hours=dt / SECONDS_PER_HOUR,
                        values=np.array(values), unit=unit,
                        normalized=normalized)


_LOADERS = {
    TEMPERATURE: load_temperature_csv,
    PRICES: load_prices_csv,
    REGULATION_SIGNAL: load_signal_csv,
}


def load_csv(kind: str, path):
    """Dispatch to the loader for the given dataset kind."""
    try:
        loader = _LOADERS[kind]
    except KeyError:
        raise ValueError(
            f"unknown dataset kind {kind!r}; expected one of "
            f"{sorted(_LOADERS)}") from None
    return loader(path)


def _write_lines(path: Path, lines: Sequence[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_temperature_csv(path, series: AmbientSeries,
                          comments: Sequence[str] = ()) -> None:
    path = Path(path)
    lines = [f"# {c}" for c in comments]
    lines.append("timestamp_utc,temp_c")
    stamp = series.start
    step = timedelta(hours=series.step_hours)
    for value in series.values:
        lines.append(f"{_fmt_ts(stamp)},{float(value)!r}")
        stamp += step
    _write_lines(path, lines)


def write_prices_csv(path, prices: PriceSeries,
                     comments: Sequence[str] = ()) -> None:
    path = Path(path)
    start = prices.start or FIXTURE_START
    lines = [f"# {c}" for c in comments]
    lines.append("timestamp_utc,ru_cap,rd_cap,ru_mil,rd_mil")
    stamp = start
    for k in range(len(prices)):
        lines.append(
            f"{_fmt_ts(stamp)},{float(prices.ru_cap[k])!r},"
            f"{float(prices.rd_cap[k])!r},{float(prices.ru_mil[k])!r},"
            f"{float(prices.rd_mil[k])!r}")
        stamp += timedelta(hours=1)
    _write_lines(path, lines)


def write_signal_csv(path, signal: SignalSeries,
                     comments: Sequence[str] = ()) -> None:
    path = Path(path)
    lines = [f"# {c}" for c in comments]
    if signal.normalized:
        lines.append("# normalized=true")
    lines.append("t_seconds,value")
    dt_s = signal.dt_hours * SECONDS_PER_HOUR
    for k, value in enumerate(signal.values):
        t = k * dt_s
        t_txt = f"{t:.6f}".rstrip("0").rstrip(".")
        lines.append(f"{t_txt},{float(value)!r}")
    _write_lines(path, lines)


# --- fleet configuration -------------------------------------------------

@dataclass(frozen=True)
class ClassSpec:
    """One configured device class with its economic annotations."""

    device: DeviceClass
    participation: Optional[ParticipationCurve]
    capital_cost: CapitalCost
    cycles_note: str


@dataclass(frozen=True)
class FleetConfig:
    """Parsed fleet configuration."""

    households_total: float
    classes: tuple[ClassSpec, ...]
    city_households: tuple[tuple[str, float], ...]

    def device_classes(self) -> list[DeviceClass]:
        return [spec.device for spec in self.classes]

    def curves(self) -> dict[str, ParticipationCurve]:
        return {spec.device.name: spec.participation
                for spec in self.classes if spec.participation is not None}

    def installed_units(self, name: str) -> float:
        for spec in self.classes:
            if spec.device.name == name:
                return self.households_total * spec.device.saturation_rate
        raise KeyError(f"no class named {name!r}")

    def class_spec(self, name: str) -> ClassSpec:
        for spec in self.classes:
            if spec.device.name == name:
                return spec
        raise KeyError(f"no class named {name!r}")


def _cfg_get(mapping, key, context, path):
    if key not in mapping:
        raise ValidationError(f"missing key {context}.{key}", path)
    return mapping[key]


def load_fleet_config(path) -> FleetConfig:
    """Parse and validate a fleet configuration JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read file: {exc}", path) from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", path) from exc

    households_total = _cfg_get(raw, "households_total", "$", path)
    classes_raw = _cfg_get(raw, "classes", "$", path)
    cities_raw = _cfg_get(raw, "cities", "$", path)
    if not isinstance(classes_raw, list) or not classes_raw:
        raise ValidationError("classes must be a non-empty list", path)
    if not isinstance(cities_raw, list) or not cities_raw:
        raise ValidationError("cities must be a non-empty list", path)

    specs = []
    for i, cls in enumerate(classes_raw):
        ctx = f"classes[{i}]"
        name = _cfg_get(cls, "name", ctx, path)
        try:
            params = TclParams(
                thermal_capacitance=_cfg_get(cls, "thermal_capacitance", ctx, path),
                thermal_resistance=_cfg_get(cls, "thermal_resistance", ctx, path),
                rated_power=_cfg_get(cls, "rated_power", ctx, path),
                cop=_cfg_get(cls, "cop", ctx, path),
                setpoint=_cfg_get(cls, "setpoint", ctx, path),
                deadband=_cfg_get(cls, "deadband", ctx, path),
                load_kind=_cfg_get(cls, "load_kind", ctx, path),
            )
            device = DeviceClass(
                name=name,
                params=params,
                saturation_rate=_cfg_get(cls, "saturation_rate", ctx, path),
                fixed_ambient_c=cls.get("fixed_ambient_c"),
            )
            curve = None
            if "participation" in cls:
                p = cls["participation"]
                curve = ParticipationCurve(
                    p_min=_cfg_get(p, "p_min", f"{ctx}.participation", path),
                    p_max=_cfg_get(p, "p_max", f"{ctx}.participation", path),
                    midpoint_c=_cfg_get(p, "midpoint_c", f"{ctx}.participation", path),
                    slope_per_c=_cfg_get(p, "slope_per_c", f"{ctx}.participation", path),
                    direction=_cfg_get(p, "direction", f"{ctx}.participation", path),
                )
            cost_raw = _cfg_get(cls, "capital_cost", ctx, path)
            cost = CapitalCost(low=float(cost_raw[0]), high=float(cost_raw[1]))
        except ValidationError:
            raise
        except (TypeError, ValueError, IndexError) as exc:
            raise ValidationError(f"{ctx}: {exc}", path) from exc
        specs.append(ClassSpec(
            device=device,
            participation=curve,
            capital_cost=cost,
            cycles_note=cls.get("cycles_note", "a few x nominal"),
        ))

    names = [s.device.name for s in specs]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate class names", path)

    cities = []
    for i, city in enumerate(cities_raw):
        ctx = f"cities[{i}]"
        name = _cfg_get(city, "name", ctx, path)
        households = _cfg_get(city, "households", ctx, path)
        if not (isinstance(households, (int, float)) and households > 0):
            raise ValidationError(f"{ctx}.households must be > 0", path)
        cities.append((str(name), float(households)))

    if not (isinstance(households_total, (int, float)) and
            households_total >= 0):
        raise ValidationError("households_total must be >= 0", path)

    return FleetConfig(
        households_total=float(households_total),
        classes=tuple(specs),
        city_households=tuple(cities),
    )


def city_profiles(config: FleetConfig, temps_dir,
                  loader=load_temperature_csv) -> list[CityProfile]:
    """Pair configured cities with ``<temps_dir>/<name>.csv`` series."""
    temps_dir = Path(temps_dir)
    profiles = []
    for name, households in config.city_households:
        csv_path = temps_dir / f"{name}.csv"
        if not csv_path.exists():
            raise ValidationError(
                f"missing temperature file for city {name!r}", csv_path)
        profiles.append(CityProfile(
            name=name, households=households, ambient=loader(csv_path)))
    return profiles


# --- synthetic fixtures --------------------------------------------------

# (annual mean degC, annual swing, diurnal swing); invented smooth
# profiles for testing, not historical weather.
SYNTH_CITY_CLIMATE: Mapping[str, tuple[float, float, float]] = {
    "SA": (16.0, 10.0, 6.0),
    "SF": (14.0, 4.0, 3.0),
    "BF": (18.0, 11.0, 7.0),
    "LA": (17.0, 6.0, 4.0),
    "SD": (17.0, 5.0, 4.0),
}

SYNTH_CITY_HOUSEHOLDS: Mapping[str, float] = {
    "SA": 558807,
    "SF": 380971,
    "BF": 288342,
    "LA": 3462202,
    "SD": 1176718,
}

FLAT_PRICES = (4.61, 3.43, 0.069, 0.130)  # ru_cap, rd_cap, ru_mil, rd_mil


def synth_temperature(city: str, hours: int = HOURS_PER_YEAR) -> AmbientSeries:
    """Smooth synthetic hourly temperatures for a named city."""
    mean, annual, diurnal = SYNTH_CITY_CLIMATE[city]
    h = np.arange(hours)
    # Annual peak near mid-July, diurnal peak at 15:00.
    annual_part = annual * np.cos(2 * np.pi * (h - 4704.0) / 8760.0)
    diurnal_part = diurnal * np.cos(2 * np.pi * ((h % 24) - 15.0) / 24.0)
    values = np.round(mean + annual_part + diurnal_part, 3)
    return AmbientSeries(start=FIXTURE_START, step_hours=1.0, values=values)


def synth_regulation_trace(seed: int, hours: float = 24.0,
                           dt_s: float = 4.0) -> SignalSeries:
    """Zero-mean band-limited normalized trace, deterministic per seed.

    A seeded mix of sinusoids with periods from a few minutes to a few
    hours, mean-removed and scaled to peak 0.95; stands in for an
    unpublished AGC test trace.
    """
    rng = np.random.default_rng(seed)
    n = int(round(hours * SECONDS_PER_HOUR / dt_s))
    t = np.arange(n) * dt_s
    signal = np.zeros(n)
    # Fast band: regulation-like wiggle, periods 3-60 min.
    for _ in range(12):
        period = np.exp(rng.uniform(np.log(180.0), np.log(3600.0)))
        amp = rng.uniform(0.3, 1.0)
        phase = rng.uniform(0.0, 2 * np.pi)
        signal += amp * np.sin(2 * np.pi * t / period + phase)
    # Slow band: the energy-hungry excursions, periods 1.5-5 h.
    for _ in range(4):
        period = np.exp(rng.uniform(np.log(5400.0), np.log(18000.0)))
        amp = rng.uniform(0.9, 1.5)
        phase = rng.uniform(0.0, 2 * np.pi)
        signal += amp * np.sin(2 * np.pi * t / period + phase)
    signal -= signal.mean()
    signal *= 0.95 / np.max(np.abs(signal))
    values = np.round(signal, 6)
    return SignalSeries(dt_hours=dt_s / SECONDS_PER_HOUR, values=values,
                       unit="1", normalized=True)


def default_fleet_config_dict() -> dict:
    """Built-in fleet description: per-class means, saturation rates,
    capital costs, participation defaults, and city household counts."""
    return {
        "households_total": 13700000,
        "classes": [
            {
                "name": "ac",
                "thermal_capacitance": 2.0,
                "thermal_resistance": 2.0,
                "rated_power": 5.6,
                "cop": 2.5,
                "setpoint": 22.5,
                "deadband": 0.3125,
                "load_kind": "cooling",
                "saturation_rate": 0.465,
                "capital_cost": [100, 250],
                "cycles_note": "2-3x nominal",
                "participation": {
                    "p_min": 0.0, "p_max": 1.0, "midpoint_c": 25.0,
                    "slope_per_c": 0.5, "direction": "increasing",
                },
            },
            {
                "name": "heat_pump",
                "thermal_capacitance": 2.0,
                "thermal_resistance": 2.0,
                "rated_power": 5.6,
                "cop": 3.5,
                "setpoint": 19.5,
                "deadband": 0.3125,
                "load_kind": "heating",
                "saturation_rate": 0.01,
                "capital_cost": [100, 250],
                "cycles_note": "2-3x nominal",
                "participation": {
                    "p_min": 0.0, "p_max": 1.0, "midpoint_c": 10.0,
                    "slope_per_c": 0.5, "direction": "decreasing",
                },
            },
            {
                "name": "water_heater",
                "thermal_capacitance": 0.4,
                "thermal_resistance": 120.0,
                "rated_power": 4.5,
                "cop": 1.0,
                "setpoint": 48.5,
                "deadband": 1.5,
                "load_kind": "heating",
                "saturation_rate": 0.065,
                "fixed_ambient_c": 20.0,
                "capital_cost": [50, 100],
                "cycles_note": "4-6x nominal",
            },
            {
                "name": "refrigerator",
                "thermal_capacitance": 0.6,
                "thermal_resistance": 90.0,
                "rated_power": 0.3,
                "cop": 2.0,
                "setpoint": 2.5,
                "deadband": 0.75,
                "load_kind": "cooling",
                "saturation_rate": 1.223,
                "fixed_ambient_c": 20.0,
                "capital_cost": [50, 100],
                "cycles_note": "2-3x nominal",
            },
        ],
        "cities": [
            {"name": name, "households": count}
            for name, count in SYNTH_CITY_HOUSEHOLDS.items()
        ],
    }


@dataclass(frozen=True)
class FixtureSet:
    """Paths of one generated fixture family."""

    root: Path
    fleet_config: Path
    temps_dir: Path
    prices: Path
    signal: Path


def synth_fixtures(seed: int, out_dir,
                   hours: int = HOURS_PER_YEAR) -> FixtureSet:
    """Write the full synthetic fixture family under out_dir/synthetic."""
    root = Path(out_dir) / "synthetic"
    temps_dir = root / "temps"
    note = f"synthetic fixture, seed={seed}"

    for city in SYNTH_CITY_CLIMATE:
        write_temperature_csv(temps_dir / f"{city}.csv",
                              synth_temperature(city, hours),
                              comments=[note])

    prices_path = root / "prices.csv"
    write_prices_csv(prices_path, PriceSeries.flat(hours, *FLAT_PRICES),
                     comments=[note])

    signal_path = root / "signal.csv"
    write_signal_csv(signal_path, synth_regulation_trace(seed),
                     comments=[note])

    fleet_path = root / "fleet.json"
    fleet_path.parent.mkdir(parents=True, exist_ok=True)
    fleet_path.write_text(
        json.dumps(default_fleet_config_dict(), indent=2, sort_keys=True)
        + "\n", encoding="utf-8")

    return FixtureSet(root=root, fleet_config=fleet_path,
                      temps_dir=temps_dir, prices=prices_path,
                      signal=signal_path)


__all__ = [
    "ClassSpec", "FIXTURE_START", "FLAT_PRICES", "FixtureSet",
    "FleetConfig", "PRICES", "REGULATION_SIGNAL", "SYNTH_CITY_CLIMATE",
    "SYNTH_CITY_HOUSEHOLDS", "TEMPERATURE", "ValidationError",
    "city_profiles", "default_fleet_config_dict", "load_csv",
    "load_fleet_config", "load_prices_csv", "load_signal_csv",
    "load_temperature_csv", "synth_fixtures", "synth_regulation_trace",
    "synth_temperature", "write_prices_csv", "write_signal_csv",
    "write_temperature_csv",
]
