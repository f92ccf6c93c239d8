"""Command-line entry point wiring the library into reproducible runs.

Subcommands: capacity, track, revenue, energy-requirement, compare,
validate, fixtures. Every run is deterministic given its inputs and
``--seed``; output files carry no timestamps and embed the seed plus a
hash over the input file bytes in leading ``#`` comments, so identical
invocations are byte-identical.

Exit codes: 0 success, 2 input validation failure, 3 numerical failure
(non-finite intermediate).
"""
from __future__ import annotations

import functools
import hashlib
import sys
from pathlib import Path
from typing import Optional, Sequence

import click
import numpy as np

from . import ingest
from .battery import (
    SignalSeries,
    UnitMismatchError,
    is_admissible,
    max_energy_requirement,
)
from .dispatch import SimFleet, accuracy, track
from .economics import comparison_table, load_reference_techs, tcl_cost_figures
from .fleet import hourly_flexibility, summary_stats
from .ingest import FleetConfig, ValidationError
from .market import award_from_flexibility, revenue

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

KW_PER_GW = 1e6
SECONDS_PER_HOUR = 3600.0


class NumericalError(RuntimeError):
    """A computation produced a non-finite intermediate."""


def _checked(values, label: str):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite values in {label}")
    return values


def _guarded(func):
    """Map library errors onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ValidationError, UnitMismatchError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except (ValueError, KeyError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except (NumericalError, FloatingPointError) as exc:
            click.echo(f"numerical error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)

    return wrapper


def _config_hash(*paths: Optional[Path]) -> str:
    digest = hashlib.sha256()
    for path in paths:
        if path is None:
            continue
        path = Path(path)
        if path.is_dir():
            for child in sorted(path.glob("*.csv")):
                digest.update(child.name.encode())
                digest.update(child.read_bytes())
        else:
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()[:16]


def _header_comments(seed: int, *paths: Optional[Path]) -> list[str]:
    return [f"config_sha256={_config_hash(*paths)}", f"seed={seed}"]


def _write_csv(path: Path, comments: Sequence[str], columns: Sequence[str],
               rows) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                # np.float64 passes the isinstance check but reprs with a
                # type prefix; force the plain Python repr.
                cells.append(repr(float(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_fleet_inputs(fleet: Path, temps: Path):
    config = ingest.load_fleet_config(fleet)
    profiles = ingest.city_profiles(config, temps)
    flex = hourly_flexibility(config.device_classes(), profiles,
                              config.curves(), config.households_total)
    _checked(flex.up_kw, "hourly flexibility (up)")
    _checked(flex.down_kw, "hourly flexibility (down)")
    _checked(flex.energy_kwh, "hourly flexibility (energy)")
    return config, flex


_fleet_opt = click.option(
    "--fleet", type=click.Path(path_type=Path), required=True,
    help="Fleet configuration JSON (classes, cities, costs).")
_temps_opt = click.option(
    "--temps", type=click.Path(path_type=Path), required=True,
    help="Directory of per-city hourly temperature CSVs (<name>.csv).")
_prices_opt = click.option(
    "--prices", type=click.Path(path_type=Path), required=True,
    help="Hourly price CSV: timestamp_utc,ru_cap,rd_cap,ru_mil,rd_mil.")
_signal_opt = click.option(
    "--signal", type=click.Path(path_type=Path), required=True,
    help="Regulation signal CSV: t_seconds,value (uniform step).")
_seed_opt = click.option(
    "--seed", type=click.IntRange(min=0), default=42, show_default=True,
    help="Seed for every stochastic choice in the run.")
_out_opt = click.option(
    "--out", type=click.Path(path_type=Path), required=True,
    help="Output directory (created if missing).")


@click.group()
@click.version_option(package_name="tclfleet")
def main() -> None:
    """Aggregate-flexibility analyses for thermostatic load fleets."""


@main.command()
@_fleet_opt
@_temps_opt
@_seed_opt
@_out_opt
@_guarded
def capacity(fleet: Path, temps: Path, seed: int, out: Path) -> None:
    """Hourly fleet flexibility plus per-class peaks and fleet minima."""
    config, flex = _load_fleet_inputs(fleet, temps)
    summary = summary_stats(flex)
    comments = _header_comments(seed, fleet, temps)

    columns = ["hour"]
    for name in flex.class_names:
        columns += [f"{name}_up_gw", f"{name}_down_gw", f"{name}_energy_gwh"]
    columns += ["total_up_gw", "total_down_gw", "total_energy_gwh"]

    def hourly_rows():
        for h in range(flex.hours):
            row: list[object] = [h]
            for i in range(len(flex.class_names)):
                row += [flex.up_kw[i, h] / KW_PER_GW,
                        flex.down_kw[i, h] / KW_PER_GW,
                        flex.energy_kwh[i, h] / KW_PER_GW]
            row += [flex.total_up_kw[h] / KW_PER_GW,
                    flex.total_down_kw[h] / KW_PER_GW,
                    flex.total_energy_kwh[h] / KW_PER_GW]
            yield row

    _write_csv(out / "capacity_hourly.csv", comments, columns, hourly_rows())

    summary_rows = [
        [peak.name, peak.up_kw / KW_PER_GW, peak.down_kw / KW_PER_GW,
         peak.energy_kwh / KW_PER_GW]
        for peak in summary.class_peaks
    ]
    summary_rows.append([
        "fleet_minimum", summary.min_total_up_kw / KW_PER_GW,
        summary.min_total_down_kw / KW_PER_GW,
        summary.min_total_energy_kwh / KW_PER_GW,
    ])
    _write_csv(out / "capacity_summary.csv", comments,
               ["name", "up_gw", "down_gw", "energy_gwh"], summary_rows)

    click.echo(f"wrote {out / 'capacity_hourly.csv'}")
    click.echo(f"wrote {out / 'capacity_summary.csv'}")
    for peak in summary.class_peaks:
        click.echo(
            f"  {peak.name}: peak up {peak.up_kw / KW_PER_GW:.3f} GW, "
            f"down {peak.down_kw / KW_PER_GW:.3f} GW, "
            f"energy {peak.energy_kwh / KW_PER_GW:.3f} GWh")
    click.echo(
        f"  fleet minimum: up {summary.min_total_up_kw / KW_PER_GW:.3f} GW, "
        f"down {summary.min_total_down_kw / KW_PER_GW:.3f} GW, "
        f"energy {summary.min_total_energy_kwh / KW_PER_GW:.3f} GWh")


@main.command(name="track")
@_fleet_opt
@_signal_opt
@_seed_opt
@_out_opt
@click.option("--tcl-class", "tcl_class", default="ac", show_default=True,
              help="Fleet class to simulate.")
@click.option("--units", type=click.IntRange(min=1), default=200,
              show_default=True, help="Number of simulated units.")
@click.option("--ambient", type=float, default=32.0, show_default=True,
              help="Ambient temperature held during the run (degC).")
@click.option("--amplitude-fraction", type=click.FloatRange(0.0, 1.0),
              default=0.4, show_default=True,
              help="Normalized signals are scaled to this fraction of the "
                   "tighter battery power limit.")
@_guarded
def track_cmd(fleet: Path, signal: Path, seed: int, out: Path,
              tcl_class: str, units: int, ambient: float,
              amplitude_fraction: float) -> None:
    """Dispatch a simulated fleet against a regulation signal."""
    config = ingest.load_fleet_config(fleet)
    spec = config.class_spec(tcl_class)
    rng = np.random.default_rng(seed)
    sim = SimFleet.homogeneous(spec.device.params, units, ambient, rng)

    raw = ingest.load_signal_csv(signal)
    batt = sim.battery()
    if raw.normalized:
        amplitude = amplitude_fraction * min(batt.charge_limit,
                                             batt.discharge_limit)
        u = raw.scale(amplitude)
    else:
        u = raw
    report = is_admissible(batt, u)
    if not report:
        click.echo(f"note: signal exceeds the battery envelope "
                   f"({report.kind} limit at sample {report.index}); "
                   f"tracking will degrade", err=False)

    result = track(sim, u)
    _checked(result.achieved_kw, "achieved power")
    acc = accuracy(result)

    comments = _header_comments(seed, fleet, signal)
    dt_s = result.dt_s

    def trace_rows():
        for k in range(len(result)):
            yield [k * dt_s, float(result.setpoint_kw[k]),
                   float(result.achieved_kw[k]),
                   int(result.step_toggles[k]), int(result.violations[k])]

    _write_csv(out / "track_trace.csv", comments,
               ["t_seconds", "setpoint_kw", "achieved_kw", "toggles",
                "violations"], trace_rows())
    _write_csv(out / "track_windows.csv", comments,
               ["start_index", "setpoint_sum_kw", "error_sum_kw", "score"],
               ([w.start_index, w.setpoint_sum_kw, w.error_sum_kw, w.score]
                for w in acc.windows))

    click.echo(f"wrote {out / 'track_trace.csv'}")
    click.echo(f"wrote {out / 'track_windows.csv'}")
    click.echo(f"  admissible: {bool(report)}")
    click.echo(f"  accuracy: aggregate {acc.aggregate:.4f}, "
               f"worst window {acc.worst:.4f}")
    click.echo(f"  band violations: {result.total_violations}")
    click.echo(f"  switching: {result.cycles_per_unit_per_day:.1f} "
               f"cycles/unit/day")


@main.command(name="revenue")
@_fleet_opt
@_temps_opt
@_prices_opt
@_seed_opt
@_out_opt
@_guarded
def revenue_cmd(fleet: Path, temps: Path, prices: Path, seed: int,
                out: Path) -> None:
    """Annual regulation revenue by class, total and per installed unit."""
    config, flex = _load_fleet_inputs(fleet, temps)
    price_series = ingest.load_prices_csv(prices)
    if len(price_series) != flex.hours:
        raise ValidationError(
            f"price series has {len(price_series)} hours but the fleet "
            f"horizon has {flex.hours}", Path(prices))
    awards = award_from_flexibility(flex)
    counts = {name: config.installed_units(name)
              for name in flex.class_names}
    report = revenue(awards, price_series, installed_counts=counts)

    comments = _header_comments(seed, fleet, temps, prices)
    rows = []
    for cls in report.classes:
        rows.append([
            cls.name, float(cls.installed_units or 0.0),
            cls.per_unit_cap_up, cls.per_unit_cap_down,
            cls.per_unit_mil_up, cls.per_unit_mil_down,
            cls.cap_up, cls.cap_down, cls.mil_up, cls.mil_down, cls.total,
        ])
    _write_csv(out / "revenue.csv", comments,
               ["class", "installed_units", "per_unit_cap_up_usd",
                "per_unit_cap_down_usd", "per_unit_mil_up_usd",
                "per_unit_mil_down_usd", "cap_up_usd", "cap_down_usd",
                "mil_up_usd", "mil_down_usd", "total_usd"], rows)

    click.echo(f"wrote {out / 'revenue.csv'}")
    for cls in report.classes:
        click.echo(
            f"  {cls.name}: per-unit capacity "
            f"${cls.per_unit_cap_up:.2f} up / "
            f"${cls.per_unit_cap_down:.2f} down, "
            f"class total ${cls.total:,.0f}/yr")
    click.echo(f"  fleet total ${report.annual_total:,.0f}/yr")


@main.command(name="energy-requirement")
@_signal_opt
@_seed_opt
@_out_opt
@click.option("--alphas", default="0.02,0.1,0.25", show_default=True,
              help="Comma-separated dissipation rates (1/h).")
@click.option("--amplitudes", default="100,300,600,900", show_default=True,
              help="Comma-separated signal amplitudes (MW).")
@_guarded
def energy_requirement(signal: Path, seed: int, out: Path, alphas: str,
                       amplitudes: str) -> None:
    """Worst-case stored-energy need over a grid of (alpha, amplitude)."""
    sig = ingest.load_signal_csv(signal)
    if not sig.normalized:
        raise ValidationError(
            "energy-requirement needs a normalized signal "
            "(# normalized=true)", Path(signal))
    try:
        alpha_grid = [float(x) for x in alphas.split(",") if x.strip()]
        amp_grid = [float(x) for x in amplitudes.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(
            "alphas/amplitudes must be comma-separated numbers") from None
    if not alpha_grid or not amp_grid:
        raise ValidationError("empty alpha or amplitude grid")

    rows = []
    for alpha in alpha_grid:
        for amp_mw in amp_grid:
            req_kwh = max_energy_requirement(alpha, amp_mw * 1000.0, sig)
            _checked(req_kwh, "energy requirement")
            rows.append([alpha, amp_mw, req_kwh / 1000.0])

    comments = _header_comments(seed, signal)
    _write_csv(out / "energy_requirement.csv", comments,
               ["alpha_per_h", "amplitude_mw", "energy_mwh"], rows)

    click.echo(f"wrote {out / 'energy_requirement.csv'}")
    for alpha, amp_mw, mwh in rows:
        click.echo(f"  alpha={alpha:g}/h amplitude={amp_mw:g} MW "
                   f"-> {mwh:.1f} MWh")


@main.command()
@_fleet_opt
@_temps_opt
@_seed_opt
@_out_opt
@_guarded
def compare(fleet: Path, temps: Path, seed: int, out: Path) -> None:
    """Cost-per-kW and cost-per-kWh comparison against storage options."""
    config, flex = _load_fleet_inputs(fleet, temps)
    figures = []
    for spec in config.classes:
        note = "" if spec.device.fixed_ambient_c is not None \
            else "weather-dependent"
        figures.append(tcl_cost_figures(
            spec.device.name, flex, spec.capital_cost,
            config.installed_units(spec.device.name),
            cycles_note=spec.cycles_note, ambient_note=note))
    report = comparison_table(figures, load_reference_techs())

    comments = _header_comments(seed, fleet, temps)
    csv_path = out / "comparison.csv"
    txt_path = out / "comparison.txt"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    header = "".join(f"# {c}\n" for c in comments)
    csv_path.write_text(header + report.to_csv(), encoding="utf-8")
    txt_path.write_text(header + report.to_text(), encoding="utf-8")

    click.echo(f"wrote {csv_path}")
    click.echo(f"wrote {txt_path}")
    click.echo(report.to_text())


@main.command()
@click.option("--fleet", type=click.Path(path_type=Path), default=None,
              help="Fleet configuration JSON to check.")
@click.option("--temps", type=click.Path(path_type=Path), default=None,
              help="Directory of temperature CSVs to check.")
@click.option("--prices", type=click.Path(path_type=Path), default=None,
              help="Price CSV to check.")
@click.option("--signal", type=click.Path(path_type=Path), default=None,
              help="Signal CSV to check.")
def validate(fleet: Optional[Path], temps: Optional[Path],
             prices: Optional[Path], signal: Optional[Path]) -> None:
    """Check inputs against their schemas; report every failure."""
    if fleet is None and temps is None and prices is None and signal is None:
        click.echo("error: nothing to validate; pass at least one input",
                   err=True)
        sys.exit(EXIT_VALIDATION)

    failures = 0

    def check(label: str, loader) -> None:
        nonlocal failures
        try:
            loaded = loader()
        except (ValidationError, ValueError, OSError) as exc:
            failures += 1
            click.echo(f"FAIL {label}: {exc}")
        else:
            click.echo(f"OK   {label}: {_describe(loaded)}")

    if fleet is not None:
        check(str(fleet), lambda: ingest.load_fleet_config(fleet))
    if temps is not None:
        temp_files = sorted(Path(temps).glob("*.csv"))
        if not temp_files:
            failures += 1
            click.echo(f"FAIL {temps}: no *.csv files")
        for path in temp_files:
            check(str(path), lambda p=path: ingest.load_temperature_csv(p))
    if prices is not None:
        check(str(prices), lambda: ingest.load_prices_csv(prices))
    if signal is not None:
        check(str(signal), lambda: ingest.load_signal_csv(signal))

    if failures:
        click.echo(f"{failures} input(s) failed validation", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo("all inputs valid")


def _describe(loaded) -> str:
    if isinstance(loaded, FleetConfig):
        return (f"{len(loaded.classes)} classes, "
                f"{len(loaded.city_households)} cities")
    if isinstance(loaded, SignalSeries):
        kind = "normalized" if loaded.normalized else loaded.unit
        return f"{len(loaded)} samples ({kind})"
    try:
        n = len(loaded.values)
    except AttributeError:
        n = len(loaded)
    return f"{n} rows"


@main.command()
@_seed_opt
@_out_opt
@_guarded
def fixtures(seed: int, out: Path) -> None:
    """Generate the synthetic fixture family (temps, prices, signal,
    fleet config) under <out>/synthetic."""
    fixture_set = ingest.synth_fixtures(seed, out)
    click.echo(f"wrote {fixture_set.fleet_config}")
    click.echo(f"wrote {fixture_set.temps_dir}/ "
               f"({len(ingest.SYNTH_CITY_CLIMATE)} cities)")
    click.echo(f"wrote {fixture_set.prices}")
    click.echo(f"wrote {fixture_set.signal}")


if __name__ == "__main__":
    main()
