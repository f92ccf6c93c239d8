"""Cost-effectiveness of TCL fleets versus dedicated storage.

TCL figures divide the per-unit instrumentation cost range by the
fleet's average per-unit power limits ($/kW, up and down separately) and
average per-unit energy capacity ($/kWh) over the study horizon. A class
whose average flexibility is zero is reported as unavailable rather than
infinite. Reference storage technologies ship as a versioned data file;
they are citations, not computed results.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

from .fleet import FlexibilitySeries

Range = tuple[float, float]


@dataclass(frozen=True)
class CapitalCost:
    """Per-unit instrumentation cost range, $/unit."""

    low: float
    high: float

    def __post_init__(self):
        if not (0 <= self.low <= self.high and math.isfinite(self.high)):
            raise ValueError(
                f"need 0 <= low <= high, got {self.low!r}, {self.high!r}")


@dataclass(frozen=True)
class StorageTech:
    """One reference storage technology row."""

    name: str
    maturity: str
    cycles_per_year: str
    efficiency: Range
    cost_per_kwh: Range
    cost_per_kw: Range

    def __post_init__(self):
        for attr in ("efficiency", "cost_per_kwh", "cost_per_kw"):
            lo, hi = getattr(self, attr)
            if not (lo <= hi):
                raise ValueError(f"{attr} range out of order: {lo}, {hi}")
        lo, hi = self.efficiency
        if not (0.0 < lo and hi <= 1.1):
            raise ValueError(f"efficiency must lie in (0, 1.1], got {lo}, {hi}")


def load_reference_techs() -> list[StorageTech]:
    """Reference technologies from the packaged data file."""
    text = resources.files("tclfleet").joinpath(
        "data/storage_techs.csv").read_text(encoding="utf-8")
    techs = []
    for row in csv.DictReader(io.StringIO(text)):
        techs.append(StorageTech(
            name=row["name"],
            maturity=row["maturity"],
            cycles_per_year=row["cycles_per_year"],
            efficiency=(float(row["efficiency_lo"]),
                        float(row["efficiency_hi"])),
            cost_per_kwh=(float(row["cost_per_kwh_lo"]),
                          float(row["cost_per_kwh_hi"])),
            cost_per_kw=(float(row["cost_per_kw_lo"]),
                         float(row["cost_per_kw_hi"])),
        ))
    return techs


@dataclass(frozen=True)
class TclCostFigures:
    """Computed cost ranges of one TCL class; None = unavailable."""

    name: str
    cost_per_kwh: Optional[Range]
    cost_per_kw_up: Optional[Range]
    cost_per_kw_down: Optional[Range]
    cycles_note: str = "a few x nominal"
    ambient_note: str = ""


def _ratio_range(cost: CapitalCost, denom: float) -> Optional[Range]:
    if denom <= 0.0:
        return None
    return (cost.low / denom, cost.high / denom)


def tcl_cost_figures(class_name: str, flex: FlexibilitySeries,
                     cost: CapitalCost, installed_units: float,
                     cycles_note: str = "a few x nominal",
                     ambient_note: str = "") -> TclCostFigures:
    """Dollars per average kW (up/down) and per average kWh for a class.

    installed_units is the full installed count the flexibility series
    was built with; averages are over the whole horizon.
    """
    if not (math.isfinite(installed_units) and installed_units > 0):
        raise ValueError("installed_units must be finite and > 0")
    row = flex.class_row(class_name)
    avg_up = float(flex.up_kw[row].mean()) / installed_units
    avg_down = float(flex.down_kw[row].mean()) / installed_units
    avg_energy = float(flex.energy_kwh[row].mean()) / installed_units
    return TclCostFigures(
        name=class_name,
        cost_per_kwh=_ratio_range(cost, avg_energy),
        cost_per_kw_up=_ratio_range(cost, avg_up),
        cost_per_kw_down=_ratio_range(cost, avg_down),
        cycles_note=cycles_note,
        ambient_note=ambient_note,
    )


@dataclass(frozen=True)
class CostRow:
    """One line of the comparison report."""

    name: str
    kind: str  # "reference" | "tcl"
    maturity: str
    cycles: str
    efficiency: str
    cost_per_kwh: Optional[Range]
    cost_per_kw_up: Optional[Range]
    cost_per_kw_down: Optional[Range]
    note: str = ""


@dataclass(frozen=True)
class CostReport:
    rows: tuple[CostRow, ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow([
            "name", "kind", "maturity", "cycles_per_year",
            "efficiency", "cost_per_kwh_lo", "cost_per_kwh_hi",
            "cost_per_kw_up_lo", "cost_per_kw_up_hi",
            "cost_per_kw_down_lo", "cost_per_kw_down_hi", "note",
        ])
        for r in self.rows:
            writer.writerow([
                r.name, r.kind, r.maturity, r.cycles, r.efficiency,
                *_csv_range(r.cost_per_kwh),
                *_csv_range(r.cost_per_kw_up),
                *_csv_range(r.cost_per_kw_down),
                r.note,
            ])
        return out.getvalue()

    def to_text(self) -> str:
        header = ("Technology", "Maturity", "Cycles/yr", "Efficiency",
                  "$/kWh", "$/kW (up)", "$/kW (down)", "Note")
        table = [header]
        for r in self.rows:
            table.append((
                r.name, r.maturity, r.cycles, r.efficiency,
                _fmt_range(r.cost_per_kwh),
                _fmt_range(r.cost_per_kw_up),
                _fmt_range(r.cost_per_kw_down),
                r.note,
            ))
        widths = [max(len(row[i]) for row in table)
                  for i in range(len(header))]
        lines = []
        for j, row in enumerate(table):
            lines.append("  ".join(
                cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
            if j == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _fmt_range(rng: Optional[Range]) -> str:
    if rng is None:
        return "n/a"
    lo, hi = rng
    if lo == hi:
        return f"{round(lo):,}"
    return f"{round(lo):,}-{round(hi):,}"


def _csv_range(rng: Optional[Range]) -> tuple[str, str]:
    if rng is None:
        return ("", "")
    return (f"{rng[0]:.6g}", f"{rng[1]:.6g}")


def _fmt_efficiency(rng: Range) -> str:
    lo, hi = (round(100 * v) for v in rng)
    return f"{lo}%" if lo == hi else f"{lo}-{hi}%"


def _sort_key(row: CostRow):
    # Expensive storage first, mirrors the usual comparison layout;
    # unavailable rows sink to the bottom.
    kwh = row.cost_per_kwh
    return (-(kwh[0]) if kwh is not None else math.inf, row.name)


def comparison_table(tcl_figures: Sequence[TclCostFigures],
                     techs: Sequence[StorageTech]) -> CostReport:
    """Merge reference and TCL rows into one deterministic report."""
    if not techs:
        raise ValueError("need at least one reference technology")
    rows = [
        CostRow(
            name=t.name, kind="reference", maturity=t.maturity,
            cycles=t.cycles_per_year,
            efficiency=_fmt_efficiency(t.efficiency),
            cost_per_kwh=t.cost_per_kwh,
            cost_per_kw_up=t.cost_per_kw,
            cost_per_kw_down=t.cost_per_kw,
        )
        for t in techs
    ]
    for f in tcl_figures:
        rows.append(CostRow(
            name=f.name, kind="tcl", maturity="R&D",
            cycles=f.cycles_note,
            efficiency="100%",
            cost_per_kwh=f.cost_per_kwh,
            cost_per_kw_up=f.cost_per_kw_up,
            cost_per_kw_down=f.cost_per_kw_down,
            note=f.ambient_note,
        ))
    rows.sort(key=_sort_key)
    return CostReport(rows=tuple(rows))


__all__ = [
    "CapitalCost", "CostReport", "CostRow", "StorageTech",
    "TclCostFigures", "comparison_table", "load_reference_techs",
    "tcl_cost_figures",
]
