"""Aggregate power-flow results into grid-impact statistics.

Voltage deviations are split by sign (above/below 1 p.u) and summarized by
their 95th percentile per bus; line loading is current over ampacity; the
load duration curve is the descending-sorted slack power. Percentiles use the
nearest-rank convention on the sorted sample, which is deterministic and free
of interpolation ambiguity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .network import Network, Transformer
from .powerflow import PowerFlowResult
from .timeseries import TimeGrid

EN50160_BAND_PU = 0.10
EN50160_MIN_FRACTION_NUM = 19  # >= 95% of each week, as the ratio 19/20
EN50160_MIN_FRACTION_DEN = 20


def nearest_rank_percentile(samples: np.ndarray, percentile: float) -> float:
    """Value at rank ceil(p/100 * n) of the ascending-sorted sample."""
    data = np.sort(np.asarray(samples, dtype=float))
    if data.size == 0:
        raise ValueError("percentile of an empty sample")
    rank = max(1, math.ceil(percentile / 100.0 * data.size))
    return float(data[rank - 1])


@dataclass(frozen=True)
class DurationCurveStats:
    duration_curve_kw: np.ndarray  # slack power sorted descending
    max_reverse_power_kw: float  # peak LV-to-HV flow
    hours_above_rating_h: float  # either direction beyond the transformer rating


@dataclass(frozen=True)
class WeeklyViolation:
    week: str  # ISO year-week label
    bus: str
    in_band_fraction: float


@dataclass(frozen=True)
class GridReport:
    bus_ids: list[str]
    line_ids: list[str]
    v_dev_above_p95: dict[str, float | None]
    v_dev_below_p95: dict[str, float | None]
    line_loading_p95: dict[str, float]
    duration: DurationCurveStats
    en50160_pass: bool
    en50160_violations: list[WeeklyViolation]


class GridAccumulator:
    """Single-pass, mergeable collector over a stream of power-flow results."""

    def __init__(self):
        self.voltages: list[np.ndarray] = []
        self.currents: list[np.ndarray] = []
        self.slack: list[float] = []
        self.steps: list[int] = []

    def update(self, result: PowerFlowResult) -> None:
        self.voltages.append(result.bus_voltage_pu)
        self.currents.append(result.line_current_a)
        self.slack.append(result.slack_power_kw)
        self.steps.append(result.step)

    def extend(self, results) -> "GridAccumulator":
        for result in results:
            self.update(result)
        return self

    def merge(self, other: "GridAccumulator") -> "GridAccumulator":
        self.voltages.extend(other.voltages)
        self.currents.extend(other.currents)
        self.slack.extend(other.slack)
        self.steps.extend(other.steps)
        return self

    def voltage_matrix(self) -> np.ndarray:
        return np.vstack(self.voltages)

    def current_matrix(self) -> np.ndarray:
        return np.vstack(self.currents)

    def slack_series(self) -> np.ndarray:
        return np.asarray(self.slack)


def _split_deviation_p95(voltages: np.ndarray):
    above: float | None = None
    below: float | None = None
    pos = voltages[voltages > 1.0] - 1.0
    neg = 1.0 - voltages[voltages < 1.0]
    if pos.size:
        above = nearest_rank_percentile(pos, 95.0)
    if neg.size:
        below = nearest_rank_percentile(neg, 95.0)
    return above, below


def voltage_deviation_stats(results, net: Network):
    """95th percentile of |v - 1| per bus, split by sign of the deviation.

    A bus that never leaves 1.0 p.u on one side reports None for that side.
    """
    acc = results if isinstance(results, GridAccumulator) else GridAccumulator().extend(results)
    matrix = acc.voltage_matrix()
    above: dict[str, float | None] = {}
    below: dict[str, float | None] = {}
    for i, bus_id in enumerate(net.bus_ids):
        above[bus_id], below[bus_id] = _split_deviation_p95(matrix[:, i])
    return above, below


def line_loading_stats(results, net: Network) -> dict[str, float]:
    """95th percentile of current over ampacity per line."""
    acc = results if isinstance(results, GridAccumulator) else GridAccumulator().extend(results)
    matrix = acc.current_matrix()
    out: dict[str, float] = {}
    for k, line in enumerate(net.lines):
        out[line.id] = nearest_rank_percentile(matrix[:, k] / line.max_current, 95.0)
    return out


def load_duration_curve(results, transformer: Transformer,
                        step_hours: float = 0.25) -> DurationCurveStats:
    """Slack power sorted descending, plus reverse-flow statistics.

    Positive slack power feeds the LV side; reverse flow is its negative
    part. Hours above the rating count both directions.
    """
    acc = results if isinstance(results, GridAccumulator) else GridAccumulator().extend(results)
    slack = acc.slack_series()
    curve = np.sort(slack)[::-1]
    reverse = np.maximum(-slack, 0.0)
    above = np.abs(slack) > transformer.rated_power_kw
    return DurationCurveStats(
        duration_curve_kw=curve,
        max_reverse_power_kw=float(reverse.max(initial=0.0)),
        hours_above_rating_h=float(above.sum()) * step_hours,
    )


def en50160_check(results, grid: TimeGrid, net: Network | None = None):
    """Weekly voltage-band criterion: |v - 1| <= 10% for >= 95% of each week.

    Weeks are ISO weeks of the configured calendar. Returns the overall pass
    flag and the failing (week, bus) pairs with their in-band fractions.
    """
    acc = results if isinstance(results, GridAccumulator) else GridAccumulator().extend(results)
    matrix = acc.voltage_matrix()
    steps = np.asarray(acc.steps)
    if grid.horizon_hours < 7 * 24:
        warnings.warn(
            "horizon shorter than one week; EN50160 evaluated on the available span",
            stacklevel=2,
        )
    bus_ids = net.bus_ids if net is not None else [
        f"bus{i}" for i in range(matrix.shape[1])
    ]

    week_keys = np.empty(len(steps), dtype=object)
    for k, step in enumerate(steps):
        iso = grid.timestamp(int(step)).isocalendar()
        week_keys[k] = f"{iso[0]}-W{iso[1]:02d}"

    in_band = np.abs(matrix - 1.0) <= EN50160_BAND_PU
    violations: list[WeeklyViolation] = []
    for week in sorted(set(week_keys)):
        rows = week_keys == week
        total = int(rows.sum())
        ok_counts = in_band[rows].sum(axis=0)
        for i, ok in enumerate(ok_counts):
            if int(ok) * EN50160_MIN_FRACTION_DEN < total * EN50160_MIN_FRACTION_NUM:
                violations.append(
                    WeeklyViolation(week=week, bus=bus_ids[i],
                                    in_band_fraction=float(ok) / total)
                )
    return len(violations) == 0, violations


def summarize(results, net: Network, grid: TimeGrid) -> GridReport:
    """All grid statistics from one pass over the results."""
    acc = GridAccumulator().extend(results)
    above, below = voltage_deviation_stats(acc, net)
    loading = line_loading_stats(acc, net)
    duration = load_duration_curve(acc, net.transformer, step_hours=grid.step_hours)
    ok, violations = en50160_check(acc, grid, net)
    return GridReport(
        bus_ids=net.bus_ids,
        line_ids=net.line_ids,
        v_dev_above_p95=above,
        v_dev_below_p95=below,
        line_loading_p95=loading,
        duration=duration,
        en50160_pass=ok,
        en50160_violations=violations,
    )
