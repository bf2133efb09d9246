"""Tariff structures and post-hoc grid-exchange cost evaluation.

Three pricing structures are supported: volumetric (per-kWh price, possibly
time-varying), capacity (volumetric plus a monthly peak-power charge), and
block rate (per-step cost convex piecewise-linear in the exchanged power).
The same costs are embedded as linear terms in the sizing MILP; this module
is the independent evaluator used for reporting and cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import SeriesError, TariffError
from .timeseries import PowerSeries, TimeGrid, check_aligned


def _values(series) -> np.ndarray:
    if isinstance(series, PowerSeries):
        return series.values
    return np.asarray(series, dtype=float)


@dataclass(frozen=True)
class VolumetricTariff:
    """Per-step energy prices in CHF/kWh."""

    import_price: np.ndarray
    export_price: np.ndarray

    def __post_init__(self):
        imp = np.asarray(self.import_price, dtype=float)
        exp = np.asarray(self.export_price, dtype=float)
        if imp.shape != exp.shape:
            raise TariffError("import and export price series differ in length")
        object.__setattr__(self, "import_price", imp)
        object.__setattr__(self, "export_price", exp)


@dataclass(frozen=True)
class CapacityTariff:
    """Flat energy prices plus a monthly charge on the peak exchanged power.

    The monthly peak counts both import and export power.
    """

    import_price: float
    export_price: float
    demand_charge: float  # CHF/kW/month

    def __post_init__(self):
        if self.demand_charge < 0:
            raise TariffError(f"demand_charge must be >= 0, got {self.demand_charge}")


def make_block_offsets(
    slopes: Sequence[float], breakpoints: Sequence[float], step_hours: float
) -> list[float]:
    """Block offsets making the piecewise step cost continuous.

    The first offset is zero; each following one solves
    ``p*a_k*ts + b_k == p*a_{k+1} * ts + b_{k+1}`` at breakpoint ``p``.
    Offsets scale with the step length, so they are computed per grid.
    """
    if len(breakpoints) != len(slopes) - 1:
        raise TariffError("need exactly one breakpoint between consecutive blocks")
    if any(b2 <= b1 for b1, b2 in zip(breakpoints, breakpoints[1:])):
        raise TariffError("breakpoints must be strictly increasing")
    if any(p <= 0 for p in breakpoints):
        raise TariffError("breakpoints must be positive (first block starts at 0 kW)")
    offsets = [0.0]
    for k, p in enumerate(breakpoints):
        offsets.append(offsets[k] + p * step_hours * (slopes[k] - slopes[k + 1]))
    return offsets


@dataclass(frozen=True)
class BlockRateTariff:
    """Convex block-rate tariff: marginal price depends on the power block.

    Import slopes increase and export slopes decrease with power, so the
    per-step import cost is the max over blocks and the export revenue the
    min over blocks of the affine segment values. Beyond the last block
    bound the final slope extends indefinitely.
    """

    upper_power: tuple[float, ...]  # kW, strictly increasing block bounds
    import_slopes: tuple[float, ...]  # CHF/kWh
    export_slopes: tuple[float, ...]  # CHF/kWh
    import_offsets: tuple[float, ...]  # CHF
    export_offsets: tuple[float, ...]  # CHF
    step_hours: float

    def __post_init__(self):
        k = len(self.upper_power)
        if not (len(self.import_slopes) == len(self.export_slopes) == k):
            raise TariffError("slopes and block bounds differ in length")
        if not (len(self.import_offsets) == len(self.export_offsets) == k):
            raise TariffError("offsets and block bounds differ in length")
        if any(b2 <= b1 for b1, b2 in zip(self.upper_power, self.upper_power[1:])):
            raise TariffError("block upper bounds must be strictly increasing")
        if any(a2 <= a1 for a1, a2 in zip(self.import_slopes, self.import_slopes[1:])):
            raise TariffError("import slopes must be strictly increasing")
        if any(a2 >= a1 for a1, a2 in zip(self.export_slopes, self.export_slopes[1:])):
            raise TariffError("export slopes must be strictly decreasing")

    @property
    def block_count(self) -> int:
        return len(self.upper_power)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.upper_power[:-1]

    @classmethod
    def build(
        cls,
        blocks: Sequence[tuple[float, float, float]],
        step_hours: float,
    ) -> "BlockRateTariff":
        """Build from ``(upper_kw, import_chf_per_kwh, export_chf_per_kwh)`` rows."""
        upper = tuple(b[0] for b in blocks)
        imp = tuple(b[1] for b in blocks)
        exp = tuple(b[2] for b in blocks)
        b_imp = make_block_offsets(imp, upper[:-1], step_hours)
        b_exp = make_block_offsets(exp, upper[:-1], step_hours)
        return cls(
            upper_power=upper,
            import_slopes=imp,
            export_slopes=exp,
            import_offsets=tuple(b_imp),
            export_offsets=tuple(b_exp),
            step_hours=step_hours,
        )


TariffStructure = Union[VolumetricTariff, CapacityTariff, BlockRateTariff]


@dataclass(frozen=True)
class TariffScenario:
    name: str
    structure: TariffStructure


def block_rate_step_cost(
    tariff: BlockRateTariff, import_kw: float, export_kw: float, step_hours: float
) -> float:
    """Exchange cost of one step: max over import segments minus min over export
    segments."""
    imp = max(
        import_kw * a * step_hours + b
        for a, b in zip(tariff.import_slopes, tariff.import_offsets)
    )
    exp = min(
        export_kw * a * step_hours + b
        for a, b in zip(tariff.export_slopes, tariff.export_offsets)
    )
    return imp - exp


def _block_cost_vector(tariff: BlockRateTariff, imports: np.ndarray, exports: np.ndarray,
                       step_hours: float) -> float:
    a_imp = np.asarray(tariff.import_slopes)
    b_imp = np.asarray(tariff.import_offsets)
    a_exp = np.asarray(tariff.export_slopes)
    b_exp = np.asarray(tariff.export_offsets)
    imp_cost = np.max(imports[:, None] * a_imp[None, :] * step_hours + b_imp[None, :], axis=1)
    exp_rev = np.min(exports[:, None] * a_exp[None, :] * step_hours + b_exp[None, :], axis=1)
    return float(np.sum(imp_cost) - np.sum(exp_rev))


def monthly_peaks(imports: np.ndarray, exports: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Per-month maximum of the exchanged power, counting both directions."""
    both = np.maximum(imports, exports)
    peaks = np.zeros(grid.months)
    for m in range(1, grid.months + 1):
        mask = grid.month_of_step == m
        peaks[m - 1] = both[mask].max()
    return peaks


def grid_exchange_cost(
    scenario: TariffScenario,
    imports,
    exports,
    grid: TimeGrid,
) -> float:
    """Total horizon cost (CHF) of the given import/export profile.

    Imports and exports must be non-negative and aligned to the grid. The
    monthly demand component of a capacity tariff is weighted by the covered
    fraction of each calendar month.
    """
    if isinstance(imports, PowerSeries):
        check_aligned(imports, grid)
    if isinstance(exports, PowerSeries):
        check_aligned(exports, grid)
    imp = _values(imports)
    exp = _values(exports)
    if imp.shape != (grid.step_count,) or exp.shape != (grid.step_count,):
        raise SeriesError("import/export profile not aligned to the time grid")
    if np.any(imp < 0) or np.any(exp < 0):
        raise SeriesError("import/export powers must be non-negative")

    ts = grid.step_hours
    structure = scenario.structure
    if isinstance(structure, VolumetricTariff):
        if structure.import_price.shape != imp.shape:
            raise SeriesError("tariff price series not aligned to the time grid")
        return float(
            np.sum((imp * structure.import_price - exp * structure.export_price) * ts)
        )
    if isinstance(structure, CapacityTariff):
        energy = float(
            np.sum((imp * structure.import_price - exp * structure.export_price) * ts)
        )
        peaks = monthly_peaks(imp, exp, grid)
        demand = float(np.sum(grid.month_weight * structure.demand_charge * peaks))
        return energy + demand
    if isinstance(structure, BlockRateTariff):
        return _block_cost_vector(structure, imp, exp, ts)
    raise TariffError(f"unknown tariff structure {type(structure).__name__}")


# ----------------------------------------------------------------------
# Bundled tariff scenarios (cts/kWh figures converted here, once)
# ----------------------------------------------------------------------

REFERENCE_IMPORT_CTS = 21.02
REFERENCE_EXPORT_CTS = 8.16

SOLAR_WINDOW_HOURS = (11, 15)  # half-open [11, 15)
SOLAR_IMPORT_WINDOW_CTS = 14.68
SOLAR_EXPORT_WINDOW_CTS = 7.07
SOLAR_IMPORT_OUTSIDE_CTS = 23.17
SOLAR_EXPORT_OUTSIDE_CTS = 11.12

SPOT_IMPORT_MULTIPLIER = 3.9468
SPOT_EXPORT_MULTIPLIER = 1.604

CAPACITY_IMPORT_CTS = 15.91
CAPACITY_EXPORT_CTS = 12.09
CAPACITY_DEMAND_CHF_PER_KW_MONTH = 5.02

# (upper bound kW, import cts/kWh, export cts/kWh)
BLOCK_RATE_TABLE = (
    (1.0, 13.72, 13.07),
    (2.0, 15.06, 11.73),
    (4.0, 16.80, 9.99),
    (6.0, 19.07, 7.73),
    (8.0, 22.01, 4.79),
    (10.0, 25.83, 0.96),
)


def flat_volumetric(grid: TimeGrid, import_cts: float, export_cts: float,
                    name: str = "flat") -> TariffScenario:
    n = grid.step_count
    return TariffScenario(
        name=name,
        structure=VolumetricTariff(
            import_price=np.full(n, import_cts / 100.0),
            export_price=np.full(n, export_cts / 100.0),
        ),
    )


def reference_tariff(grid: TimeGrid) -> TariffScenario:
    return flat_volumetric(grid, REFERENCE_IMPORT_CTS, REFERENCE_EXPORT_CTS, "reference")


def solar_tariff(grid: TimeGrid) -> TariffScenario:
    """Lower prices inside the midday window, higher outside."""
    hours = grid.hour_of_day()
    window = (hours >= SOLAR_WINDOW_HOURS[0]) & (hours < SOLAR_WINDOW_HOURS[1])
    imp = np.where(window, SOLAR_IMPORT_WINDOW_CTS, SOLAR_IMPORT_OUTSIDE_CTS) / 100.0
    exp = np.where(window, SOLAR_EXPORT_WINDOW_CTS, SOLAR_EXPORT_OUTSIDE_CTS) / 100.0
    return TariffScenario(
        name="solar", structure=VolumetricTariff(import_price=imp, export_price=exp)
    )


def spot_tariff(grid: TimeGrid, spot_price: PowerSeries,
                import_multiplier: float = SPOT_IMPORT_MULTIPLIER,
                export_multiplier: float = SPOT_EXPORT_MULTIPLIER) -> TariffScenario:
    """Scale an ingested day-ahead/intraday price series (CHF/kWh)."""
    check_aligned(spot_price, grid)
    return TariffScenario(
        name="spot",
        structure=VolumetricTariff(
            import_price=spot_price.values * import_multiplier,
            export_price=spot_price.values * export_multiplier,
        ),
    )


def capacity_tariff() -> TariffScenario:
    return TariffScenario(
        name="capacity",
        structure=CapacityTariff(
            import_price=CAPACITY_IMPORT_CTS / 100.0,
            export_price=CAPACITY_EXPORT_CTS / 100.0,
            demand_charge=CAPACITY_DEMAND_CHF_PER_KW_MONTH,
        ),
    )


def block_rate_tariff(grid: TimeGrid) -> TariffScenario:
    blocks = [(up, a_imp / 100.0, a_exp / 100.0) for up, a_imp, a_exp in BLOCK_RATE_TABLE]
    return TariffScenario(
        name="block_rate", structure=BlockRateTariff.build(blocks, grid.step_hours)
    )
