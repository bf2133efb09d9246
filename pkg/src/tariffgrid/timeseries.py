"""Time grid definition and ingestion of per-timestep data.

Every series entering a scenario (building loads, per-module PV generation,
dynamic prices) is validated here, once, against a shared :class:`TimeGrid`.
All powers are kW, energies kWh, money CHF. Tariffs quoted in cts/kWh are
converted to CHF/kWh at ingestion.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import SeriesError

KIND_LOAD = "load"
KIND_PV_UNIT = "pv-unit"
KIND_IMPORT_PRICE = "import-price"
KIND_EXPORT_PRICE = "export-price"

SERIES_KINDS = (KIND_LOAD, KIND_PV_UNIT, KIND_IMPORT_PRICE, KIND_EXPORT_PRICE)
# loads and per-module generation are physical powers; prices may go negative
NONNEGATIVE_KINDS = frozenset({KIND_LOAD, KIND_PV_UNIT})

# default calendar: a non-leap year starting January 1
DEFAULT_START = date(2018, 1, 1)

SECONDS_PER_YEAR = 365 * 86400


def _month_spans(step_seconds: float, step_count: int, start: date) -> dict[int, range]:
    """Assign contiguous step ranges to calendar months.

    A step belongs to the month containing its start instant. Months are
    numbered 1..M in order of first appearance.
    """
    t0 = datetime(start.year, start.month, start.day)
    spans: dict[int, range] = {}
    month = 0
    current_key = None
    begin = 0
    for t in range(step_count):
        stamp = t0 + timedelta(seconds=t * step_seconds)
        key = (stamp.year, stamp.month)
        if key != current_key:
            if current_key is not None:
                spans[month] = range(begin, t)
            month += 1
            current_key = key
            begin = t
    spans[month] = range(begin, step_count)
    return spans


def _days_in_month(year: int, month: int) -> int:
    nxt = datetime(year + (month == 12), month % 12 + 1, 1)
    return (nxt - datetime(year, month, 1)).days


@dataclass(frozen=True)
class TimeGrid:
    """Temporal backbone shared by all series and optimizations.

    ``month_of_step`` maps step index to month index 1..months and must be
    non-decreasing. ``month_weight`` is the fraction of each calendar month
    covered by the horizon; it prorates monthly demand charges when running
    a shortened horizon.
    """

    step_seconds: float
    step_count: int
    month_of_step: np.ndarray
    months: int
    month_weight: np.ndarray = field(default=None)  # type: ignore[assignment]
    start: date = DEFAULT_START

    def __post_init__(self):
        if self.step_seconds <= 0:
            raise SeriesError(f"step_seconds must be positive, got {self.step_seconds}")
        if self.step_count <= 0:
            raise SeriesError(f"step_count must be positive, got {self.step_count}")
        mos = np.asarray(self.month_of_step, dtype=np.int64)
        if mos.shape != (self.step_count,):
            raise SeriesError("month_of_step length does not match step_count")
        if np.any(np.diff(mos) < 0):
            raise SeriesError("month_of_step must be non-decreasing")
        present = np.unique(mos)
        if not np.array_equal(present, np.arange(1, self.months + 1)):
            raise SeriesError("month_of_step must cover exactly 1..months")
        object.__setattr__(self, "month_of_step", mos)
        if self.month_weight is None:
            object.__setattr__(self, "month_weight", np.ones(self.months))
        else:
            w = np.asarray(self.month_weight, dtype=float)
            if w.shape != (self.months,):
                raise SeriesError("month_weight length does not match months")
            object.__setattr__(self, "month_weight", w)
        self.month_of_step.flags.writeable = False
        self.month_weight.flags.writeable = False

    @classmethod
    def from_calendar(
        cls,
        step_seconds: float,
        step_count: int,
        start: date = DEFAULT_START,
    ) -> "TimeGrid":
        """Build a grid with months taken from the real calendar at ``start``."""
        spans = _month_spans(step_seconds, step_count, start)
        mos = np.empty(step_count, dtype=np.int64)
        weights = np.empty(len(spans))
        t0 = datetime(start.year, start.month, start.day)
        for m, span in spans.items():
            mos[span.start : span.stop] = m
            stamp = t0 + timedelta(seconds=span.start * step_seconds)
            full = _days_in_month(stamp.year, stamp.month) * 86400.0
            weights[m - 1] = len(span) * step_seconds / full
        return cls(
            step_seconds=step_seconds,
            step_count=step_count,
            month_of_step=mos,
            months=len(spans),
            month_weight=weights,
            start=start,
        )

    @property
    def step_hours(self) -> float:
        return self.step_seconds / 3600.0

    @property
    def horizon_hours(self) -> float:
        return self.step_count * self.step_seconds / 3600.0

    @property
    def annualization_factor(self) -> float:
        """Scale from horizon operating cost/energy to one 365-day year."""
        return SECONDS_PER_YEAR / (self.step_seconds * self.step_count)

    def timestamp(self, step: int) -> datetime:
        t0 = datetime(self.start.year, self.start.month, self.start.day)
        return t0 + timedelta(seconds=step * self.step_seconds)

    def hour_of_day(self) -> np.ndarray:
        """Hour-of-day (0..23) of each step's start instant."""
        seconds = np.arange(self.step_count) * self.step_seconds
        return (seconds // 3600).astype(np.int64) % 24


def month_partition(grid: TimeGrid, calendar_start: date) -> dict[int, range]:
    """Contiguous step range per month for a grid anchored at ``calendar_start``."""
    spans = _month_spans(grid.step_seconds, grid.step_count, calendar_start)
    total = sum(len(r) for r in spans.values())
    assert total == grid.step_count
    return spans


@dataclass(frozen=True)
class PowerSeries:
    """One value per step: a power (kW) or a price (CHF/kWh)."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if self.kind not in SERIES_KINDS:
            raise SeriesError(f"unknown series kind {self.kind!r}")
        if vals.ndim != 1:
            raise SeriesError("series values must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise SeriesError(f"non-finite value at step {bad} in {self.kind} series")
        if self.kind in NONNEGATIVE_KINDS and np.any(vals < 0):
            bad = int(np.flatnonzero(vals < 0)[0])
            raise SeriesError(
                f"negative value {vals[bad]} at step {bad} not allowed for kind {self.kind!r}"
            )
        object.__setattr__(self, "values", vals)
        vals.flags.writeable = False

    def __len__(self) -> int:
        return len(self.values)


def check_aligned(series: PowerSeries, grid: TimeGrid) -> PowerSeries:
    if len(series) != grid.step_count:
        raise SeriesError(
            f"series of length {len(series)} does not match grid with {grid.step_count} steps"
        )
    return series


def load_series(
    path: str | Path,
    grid: TimeGrid,
    kind: str,
    *,
    allow_longer: bool = False,
) -> PowerSeries:
    """Read a single-column CSV (header row, one value per line).

    ``allow_longer`` truncates a longer file to the grid horizon; used when a
    run subsamples a full-year dataset. Length mismatches are otherwise
    rejected.
    """
    path = Path(path)
    if not path.exists():
        raise SeriesError(f"series file not found: {path}")
    values: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SeriesError(f"{path}: empty file")
        for lineno, row in enumerate(reader, start=2):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError as exc:
                raise SeriesError(f"{path}:{lineno}: unparseable value {row[0]!r}") from exc
            if allow_longer and len(values) == grid.step_count:
                break
    if len(values) != grid.step_count:
        raise SeriesError(
            f"{path}: expected {grid.step_count} values, found {len(values)}"
        )
    return PowerSeries(values=np.array(values), kind=kind)


def save_series(path: str | Path, series: PowerSeries, name: str | None = None) -> None:
    """Write a series back out in the same one-column CSV format.

    Values are written with shortest round-trip float formatting so a
    save/load cycle reproduces them bit-exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"{name or series.kind}\n")
        for v in series.values:
            fh.write(f"{float(v)!r}\n")
