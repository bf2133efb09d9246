"""Per-building performance metrics and fleet-level summaries.

Nine metrics per building: PV hosting ratio, PV penetration, battery
autonomy, curtailed fraction, self-sufficiency, grid usage ratios for import
and export, cost NPV, discounted payback period, and levelized cost of
energy. Cash flows use annual buckets with the full investment in year zero
and discrete battery replacements.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .milp import (
    BuildingDesign,
    BuildingProblem,
    battery_capital_cost,
    pv_capital_cost,
)
from .tariffs import grid_exchange_cost


@dataclass(frozen=True)
class BuildingReport:
    building_id: str
    pv_capacity_kw: float
    battery_capacity_kwh: float
    pv_host: float
    pv_penetration: float | None
    bat_auto_days: float | None
    pv_curtailment_share: float
    self_sufficiency: float | None
    gu_import: float | None
    gu_export: float | None
    npv_chf: float
    dpp_years: int | None
    lcoe_chf_per_kwh: float | None
    annual_grid_cost_chf: float
    annual_baseline_cost_chf: float


METRIC_FIELDS = [
    f.name for f in fields(BuildingReport) if f.name != "building_id"
]


def self_sufficiency_shares(design: BuildingDesign, load: np.ndarray) -> tuple[float, float]:
    """Self-covered energy by its two equivalent forms (clamped to [0, load]).

    Returns (direct form, 1 - net-import form); both are energy sums in
    kW-steps, to be divided by total load.
    """
    covered = np.clip(load + design.export_kw - design.import_kw, 0.0, load)
    net_import = np.clip(design.import_kw - design.export_kw, 0.0, load)
    return float(covered.sum()), float((load - net_import).sum())


def compute_report(
    design: BuildingDesign,
    bp: BuildingProblem,
    *,
    lcoe_discounted_energy: bool = True,
) -> BuildingReport:
    """Evaluate all metrics for one optimized building.

    ``lcoe_discounted_energy`` divides the cost NPV by the equally discounted
    lifetime energy, which makes the load-only LCOE equal the flat import
    tariff exactly; the undiscounted-energy variant is kept as an option.
    """
    grid = bp.grid
    econ = bp.econ
    ts = grid.step_hours
    load = bp.load.values

    load_kwh = float(load.sum()) * ts
    pv_kwh = float(design.pv_kw.sum()) * ts
    cur_kwh = float(design.curtailment_kw.sum()) * ts
    days = grid.horizon_hours / 24.0

    pv_capacity = sum(
        n * cfg.unit_nominal_power_kw
        for n, cfg in zip(design.modules_per_config, bp.pv_configs)
    )
    pv_capacity_max = sum(
        cfg.max_modules * cfg.unit_nominal_power_kw for cfg in bp.pv_configs
    )
    pv_host = pv_capacity / pv_capacity_max if pv_capacity_max > 0 else 0.0

    has_load = load_kwh > 0
    pv_penetration = pv_kwh / load_kwh if has_load else None
    mean_daily_kwh = load_kwh / days if days > 0 else 0.0
    bat_auto = (
        design.battery_capacity_kwh / mean_daily_kwh if mean_daily_kwh > 0 else None
    )
    pv_cur = cur_kwh / pv_kwh if pv_kwh > 0 else 0.0

    covered, _ = self_sufficiency_shares(design, load)
    self_sufficiency = covered * ts / load_kwh if has_load else None

    max_load = float(load.max()) if len(load) else 0.0
    gu_import = float(design.import_kw.max()) / max_load if max_load > 0 else None
    gu_export = float(design.export_kw.max()) / max_load if max_load > 0 else None

    # annualized cash flows
    kappa = grid.annualization_factor
    annual_grid_cost = kappa * grid_exchange_cost(
        bp.tariff, design.import_kw, design.export_kw, grid
    )
    zeros = np.zeros_like(load)
    annual_baseline = kappa * grid_exchange_cost(bp.tariff, load, zeros, grid)

    capex_pv = pv_capital_cost(design, bp)
    capex_bat = battery_capital_cost(design, bp)
    maintenance = econ.pv_maintenance_rate * capex_pv
    r = econ.discount_rate
    years = econ.lifetime_years

    def replacement(year: int) -> float:
        if capex_bat > 0 and year % econ.battery_lifetime_years == 0 and year < years:
            return capex_bat
        return 0.0

    npv = capex_pv + capex_bat
    cumulative = capex_pv + capex_bat  # differential, vs the no-investment case
    dpp: int | None = 0 if cumulative <= 1e-9 else None
    discounted_energy = 0.0
    for year in range(1, years + 1):
        discount = (1.0 + r) ** year
        cash = annual_grid_cost + maintenance + replacement(year)
        npv += cash / discount
        cumulative += (cash - annual_baseline) / discount
        if dpp is None and cumulative <= 1e-9:
            dpp = year
        discounted_energy += kappa * load_kwh / discount

    if not has_load:
        lcoe = None
    elif lcoe_discounted_energy:
        lcoe = npv / discounted_energy
    else:
        lcoe = npv / (years * kappa * load_kwh)

    return BuildingReport(
        building_id=design.building_id,
        pv_capacity_kw=pv_capacity,
        battery_capacity_kwh=design.battery_capacity_kwh,
        pv_host=pv_host,
        pv_penetration=pv_penetration,
        bat_auto_days=bat_auto,
        pv_curtailment_share=pv_cur,
        self_sufficiency=self_sufficiency,
        gu_import=gu_import,
        gu_export=gu_export,
        npv_chf=npv,
        dpp_years=dpp,
        lcoe_chf_per_kwh=lcoe,
        annual_grid_cost_chf=annual_grid_cost,
        annual_baseline_cost_chf=annual_baseline,
    )


def fleet_summary(reports: list[BuildingReport]) -> dict[str, dict[str, float | None]]:
    """25th/50th/75th percentiles per metric (linear interpolation).

    Buildings with an undefined metric are excluded from that metric's
    percentiles; an all-undefined metric reports None.
    """
    if not reports:
        raise ValueError("fleet_summary needs at least one report")
    table: dict[str, dict[str, float | None]] = {}
    for name in METRIC_FIELDS:
        values = [getattr(rep, name) for rep in reports]
        numeric = np.array([v for v in values if v is not None], dtype=float)
        if len(numeric) == 0:
            table[name] = {"p25": None, "p50": None, "p75": None}
        else:
            p25, p50, p75 = np.percentile(numeric, [25, 50, 75])
            table[name] = {"p25": float(p25), "p50": float(p50), "p75": float(p75)}
    return table
