"""Per-building sizing and dispatch problem as a mixed-integer linear program.

The decision variables are the module count per PV configuration, the battery
capacity, and the per-step dispatch (import, export, charge, discharge,
curtailment, state of charge). Capital costs enter through an annuity factor;
operating costs are the tariff cost of the grid exchange plus PV maintenance,
scaled from the horizon to a full year. Tariff structures are linearized:
monthly-peak variables for capacity tariffs and per-step epigraph variables
for block rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CorruptSolutionError, ModelError
from .tariffs import (
    BlockRateTariff,
    CapacityTariff,
    TariffScenario,
    VolumetricTariff,
    grid_exchange_cost,
    monthly_peaks,
)
from .timeseries import PowerSeries, TimeGrid, check_aligned

LE, GE, EQ = "<=", ">=", "=="


# ----------------------------------------------------------------------
# Problem data
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PvConfiguration:
    """One roof segment: identical modules with a shared generation profile."""

    unit_generation: PowerSeries  # kW produced by a single module
    max_modules: int
    unit_nominal_power_kw: float = 0.315
    unit_cost_chf_per_w: float = 1.05

    def __post_init__(self):
        if self.max_modules < 0:
            raise ModelError("max_modules must be >= 0")
        if self.unit_nominal_power_kw <= 0:
            raise ModelError("unit_nominal_power_kw must be positive")

    @property
    def module_capex_chf(self) -> float:
        return self.unit_nominal_power_kw * 1000.0 * self.unit_cost_chf_per_w


@dataclass(frozen=True)
class EconomicParameters:
    lifetime_years: int = 25
    battery_lifetime_years: int = 9
    discount_rate: float = 0.03
    pv_fixed_cost_chf: float = 10049.0
    battery_unit_cost_chf_per_kwh: float = 229.0
    battery_fixed_cost_chf: float = 0.0
    pv_maintenance_rate: float = 0.005  # per year, fraction of PV capex

    def __post_init__(self):
        if self.discount_rate <= 0:
            raise ModelError("discount_rate must be positive")
        if self.lifetime_years <= 0 or self.battery_lifetime_years <= 0:
            raise ModelError("lifetimes must be positive")

    @property
    def annuity_factor(self) -> float:
        r, years = self.discount_rate, self.lifetime_years
        growth = (1.0 + r) ** years
        return r * growth / (growth - 1.0)

    @property
    def battery_replacement_factor(self) -> float:
        return self.lifetime_years / self.battery_lifetime_years


@dataclass(frozen=True)
class BatteryParameters:
    """Lossy-bucket battery model; all values configurable."""

    charge_efficiency: float = 0.95
    discharge_efficiency: float = 0.95
    max_c_rate: float = 1.0  # kW per kWh of capacity
    soc_min_fraction: float = 0.1
    soc_max_fraction: float = 1.0
    initial_soc_fraction: float = 0.5
    capacity_cap_kwh: float = 100.0  # search bound; also the switching big-M
    cyclic_soc: bool = True
    integer_capacity: bool = False  # restrict capacity to whole kWh

    def __post_init__(self):
        if not (0 < self.charge_efficiency <= 1 and 0 < self.discharge_efficiency <= 1):
            raise ModelError("efficiencies must be in (0, 1]")
        if not (0 <= self.soc_min_fraction < self.soc_max_fraction <= 1):
            raise ModelError("need 0 <= soc_min < soc_max <= 1")
        if self.capacity_cap_kwh < 0:
            raise ModelError("capacity_cap_kwh must be >= 0")


@dataclass(frozen=True)
class BuildingProblem:
    building_id: str
    load: PowerSeries
    pv_configs: tuple[PvConfiguration, ...]
    tariff: TariffScenario
    econ: EconomicParameters
    battery: BatteryParameters
    grid: TimeGrid

    def __post_init__(self):
        check_aligned(self.load, self.grid)
        for cfg in self.pv_configs:
            check_aligned(cfg.unit_generation, self.grid)


# ----------------------------------------------------------------------
# Solver-agnostic program description
# ----------------------------------------------------------------------

@dataclass
class LinearProgram:
    """Sparse minimization problem: coefficients, senses, bounds, integrality."""

    var_names: list[str]
    lower: np.ndarray
    upper: np.ndarray
    is_integer: np.ndarray
    objective: np.ndarray
    row_cols: list[np.ndarray]
    row_vals: list[np.ndarray]
    senses: list[str]
    rhs: np.ndarray
    objective_constant: float = 0.0

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.senses)

    def validate(self) -> None:
        n = self.num_vars
        if np.any(self.lower > self.upper):
            bad = int(np.flatnonzero(self.lower > self.upper)[0])
            raise ModelError(f"infeasible bounds on variable {self.var_names[bad]}")
        if not np.all(np.isfinite(self.objective)):
            raise ModelError("non-finite objective coefficient")
        if not np.all(np.isfinite(self.rhs)):
            raise ModelError("non-finite right-hand side")
        for cols, vals in zip(self.row_cols, self.row_vals):
            if len(cols) and (cols.min() < 0 or cols.max() >= n):
                raise ModelError("constraint references undeclared variable")
            if not np.all(np.isfinite(vals)):
                raise ModelError("non-finite constraint coefficient")

    def relaxed(self) -> "LinearProgram":
        """Copy with integrality dropped."""
        out = replace(self)
        out.is_integer = np.zeros(self.num_vars, dtype=bool)
        return out

    def dense_matrix(self) -> np.ndarray:
        a = np.zeros((self.num_rows, self.num_vars))
        for i, (cols, vals) in enumerate(zip(self.row_cols, self.row_vals)):
            a[i, cols] = vals
        return a


class ProgramBuilder:
    def __init__(self):
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.integer: list[bool] = []
        self.obj: list[float] = []
        self.row_cols: list[np.ndarray] = []
        self.row_vals: list[np.ndarray] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []

    def var(self, name: str, lb: float = 0.0, ub: float = np.inf,
            integer: bool = False, cost: float = 0.0) -> int:
        self.names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        self.integer.append(integer)
        self.obj.append(cost)
        return len(self.names) - 1

    def add_cost(self, idx: int, cost: float) -> None:
        self.obj[idx] += cost

    def constraint(self, cols: Sequence[int], vals: Sequence[float],
                   sense: str, rhs: float) -> int:
        self.row_cols.append(np.asarray(cols, dtype=np.int64))
        self.row_vals.append(np.asarray(vals, dtype=float))
        self.senses.append(sense)
        self.rhs.append(rhs)
        return len(self.senses) - 1

    def build(self, constant: float = 0.0) -> LinearProgram:
        lp = LinearProgram(
            var_names=self.names,
            lower=np.asarray(self.lb, dtype=float),
            upper=np.asarray(self.ub, dtype=float),
            is_integer=np.asarray(self.integer, dtype=bool),
            objective=np.asarray(self.obj, dtype=float),
            row_cols=self.row_cols,
            row_vals=self.row_vals,
            senses=self.senses,
            rhs=np.asarray(self.rhs, dtype=float),
            objective_constant=constant,
        )
        lp.validate()
        return lp


# ----------------------------------------------------------------------
# Variable layout (deterministic function of the problem)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemLayout:
    n_configs: int
    steps: int
    months: int
    modules: range
    battery_capacity: int
    pv_built: int
    battery_built: int
    imports: range
    exports: range
    charge: range
    discharge: range
    curtail: range
    soc: range
    monthly_max: range  # empty unless capacity tariff
    block_cost: range  # empty unless block-rate tariff
    block_revenue: range
    battery_mode: range  # per-step binaries, empty unless negative prices
    grid_mode: range  # per-step binaries, empty unless export price > import price
    num_vars: int


def _price_flags(tariff: TariffScenario, steps: int) -> tuple[bool, bool]:
    """Whether dispatch binaries are needed: (battery direction, grid direction).

    Battery binaries prevent burning energy through round-trip losses when a
    price is negative; grid binaries prevent the unbounded import-and-export
    arbitrage that appears whenever the export price exceeds the import price.
    """
    structure = tariff.structure
    if isinstance(structure, VolumetricTariff):
        imp, exp = structure.import_price, structure.export_price
        any_negative = bool((imp < 0).any() or (exp < 0).any())
        crossing = bool((exp > imp + 1e-12).any())
        return any_negative, crossing
    if isinstance(structure, CapacityTariff):
        any_negative = structure.import_price < 0 or structure.export_price < 0
        crossing = structure.export_price > structure.import_price + 1e-12
        return any_negative, crossing
    if isinstance(structure, BlockRateTariff):
        any_negative = min(structure.import_slopes) < 0 or min(structure.export_slopes) < 0
        # marginal export revenue never exceeds marginal import cost when the
        # cheapest import block beats the best export block
        crossing = max(structure.export_slopes) > min(structure.import_slopes) + 1e-12
        return any_negative, crossing
    raise ModelError(f"unknown tariff structure {type(structure).__name__}")


def problem_layout(bp: BuildingProblem) -> ProblemLayout:
    n = len(bp.pv_configs)
    steps = bp.grid.step_count
    months = bp.grid.months
    structure = bp.tariff.structure
    battery_mode_needed, grid_mode_needed = _price_flags(bp.tariff, steps)
    battery_mode_needed = battery_mode_needed and bp.battery.capacity_cap_kwh > 0

    pos = 0

    def take(count: int) -> range:
        nonlocal pos
        r = range(pos, pos + count)
        pos += count
        return r

    modules = take(n)
    battery_capacity = take(1).start
    pv_built = take(1).start
    battery_built = take(1).start
    imports = take(steps)
    exports = take(steps)
    charge = take(steps)
    discharge = take(steps)
    curtail = take(steps)
    soc = take(steps)
    monthly_max = take(months if isinstance(structure, CapacityTariff) else 0)
    is_block = isinstance(structure, BlockRateTariff)
    block_cost = take(steps if is_block else 0)
    block_revenue = take(steps if is_block else 0)
    battery_mode = take(steps if battery_mode_needed else 0)
    grid_mode = take(steps if grid_mode_needed else 0)

    return ProblemLayout(
        n_configs=n,
        steps=steps,
        months=months,
        modules=modules,
        battery_capacity=battery_capacity,
        pv_built=pv_built,
        battery_built=battery_built,
        imports=imports,
        exports=exports,
        charge=charge,
        discharge=discharge,
        curtail=curtail,
        soc=soc,
        monthly_max=monthly_max,
        block_cost=block_cost,
        block_revenue=block_revenue,
        battery_mode=battery_mode,
        grid_mode=grid_mode,
        num_vars=pos,
    )


# ----------------------------------------------------------------------
# Model construction
# ----------------------------------------------------------------------

def build_problem(
    bp: BuildingProblem,
    *,
    fixed_modules: Sequence[int] | None = None,
    fixed_battery_kwh: float | None = None,
) -> LinearProgram:
    """Encode the sizing-and-dispatch problem as a LinearProgram.

    ``fixed_modules`` / ``fixed_battery_kwh`` pin the sizing variables, which
    turns the problem into a pure dispatch LP (used by the load-only and
    full-PV bounding scenarios).
    """
    grid = bp.grid
    econ = bp.econ
    bat = bp.battery
    layout = problem_layout(bp)
    steps = layout.steps
    ts = grid.step_hours
    kappa = grid.annualization_factor
    structure = bp.tariff.structure

    if fixed_modules is not None and len(fixed_modules) != layout.n_configs:
        raise ModelError("fixed_modules length does not match pv_configs")

    annuity = econ.annuity_factor
    maint = econ.pv_maintenance_rate

    b = ProgramBuilder()

    # sizing
    for i, cfg in enumerate(bp.pv_configs):
        lb, ub = 0.0, float(cfg.max_modules)
        if fixed_modules is not None:
            v = float(fixed_modules[i])
            if not (0 <= v <= cfg.max_modules):
                raise ModelError(
                    f"fixed module count {v} outside [0, {cfg.max_modules}]"
                )
            lb = ub = v
        b.var(
            f"n_mod[{i}]", lb, ub, integer=True,
            cost=(annuity + maint) * cfg.module_capex_chf,
        )

    cap_ub = bat.capacity_cap_kwh
    cap_lb = 0.0
    if fixed_battery_kwh is not None:
        if not 0 <= fixed_battery_kwh <= bat.capacity_cap_kwh and fixed_battery_kwh != 0:
            raise ModelError(
                f"fixed battery capacity {fixed_battery_kwh} outside "
                f"[0, {bat.capacity_cap_kwh}]"
            )
        cap_lb = cap_ub = float(fixed_battery_kwh)
    b.var(
        "e_bat_cap", cap_lb, cap_ub, integer=bat.integer_capacity,
        cost=annuity * econ.battery_replacement_factor * econ.battery_unit_cost_chf_per_kwh,
    )

    max_total_modules = float(sum(cfg.max_modules for cfg in bp.pv_configs))
    b.var(
        "b_pv", 0.0, 1.0 if max_total_modules > 0 else 0.0, integer=True,
        cost=(annuity + maint) * econ.pv_fixed_cost_chf,
    )
    b.var(
        "b_bat", 0.0, 1.0 if cap_ub > 0 else 0.0, integer=True,
        cost=annuity * econ.battery_replacement_factor * econ.battery_fixed_cost_chf,
    )

    # dispatch
    for t in range(steps):
        b.var(f"p_imp[{t}]")
    for t in range(steps):
        b.var(f"p_exp[{t}]")
    charge_cap = bat.max_c_rate * bat.capacity_cap_kwh
    for t in range(steps):
        b.var(f"p_cha[{t}]", 0.0, charge_cap if charge_cap > 0 else 0.0)
    for t in range(steps):
        b.var(f"p_dis[{t}]", 0.0, charge_cap if charge_cap > 0 else 0.0)
    for t in range(steps):
        b.var(f"p_cur[{t}]")
    soc_cap = bat.soc_max_fraction * bat.capacity_cap_kwh
    for t in range(steps):
        b.var(f"soc[{t}]", 0.0, soc_cap if soc_cap > 0 else 0.0)

    # tariff terms
    if isinstance(structure, VolumetricTariff):
        if structure.import_price.shape != (steps,):
            raise ModelError("volumetric price series not aligned to the grid")
        for t in range(steps):
            b.add_cost(layout.imports[t], kappa * ts * structure.import_price[t])
            b.add_cost(layout.exports[t], -kappa * ts * structure.export_price[t])
    elif isinstance(structure, CapacityTariff):
        for t in range(steps):
            b.add_cost(layout.imports[t], kappa * ts * structure.import_price)
            b.add_cost(layout.exports[t], -kappa * ts * structure.export_price)
        for m in range(layout.months):
            b.var(
                f"p_max[{m}]", 0.0, np.inf,
                cost=kappa * grid.month_weight[m] * structure.demand_charge,
            )
    elif isinstance(structure, BlockRateTariff):
        if abs(structure.step_hours - ts) > 1e-12:
            raise ModelError(
                "block-rate offsets were built for a different step length"
            )
        for t in range(steps):
            b.var(f"c_blk[{t}]", -np.inf, np.inf, cost=kappa)
        for t in range(steps):
            b.var(f"r_blk[{t}]", -np.inf, np.inf, cost=-kappa)

    battery_mode_active = len(layout.battery_mode) > 0
    grid_mode_active = len(layout.grid_mode) > 0
    for t in range(len(layout.battery_mode)):
        b.var(f"y_bat[{t}]", 0.0, 1.0, integer=True)
    for t in range(len(layout.grid_mode)):
        b.var(f"z_grid[{t}]", 0.0, 1.0, integer=True)

    assert len(b.names) == layout.num_vars

    gen = [cfg.unit_generation.values for cfg in bp.pv_configs]
    load = bp.load.values

    # energy conservation: imp - exp - cha + dis - cur + sum_i gen*n_i == load
    for t in range(steps):
        cols = [layout.imports[t], layout.exports[t], layout.charge[t],
                layout.discharge[t], layout.curtail[t]]
        vals = [1.0, -1.0, -1.0, 1.0, -1.0]
        for i in range(layout.n_configs):
            if gen[i][t] != 0.0:
                cols.append(layout.modules[i])
                vals.append(gen[i][t])
        b.constraint(cols, vals, EQ, load[t])

    # curtailment bounded by available generation
    for t in range(steps):
        cols = [layout.curtail[t]]
        vals = [1.0]
        for i in range(layout.n_configs):
            if gen[i][t] != 0.0:
                cols.append(layout.modules[i])
                vals.append(-gen[i][t])
        b.constraint(cols, vals, LE, 0.0)

    # battery energy balance and limits
    eta_ch = bat.charge_efficiency
    eta_dis = bat.discharge_efficiency
    for t in range(steps):
        nxt = (t + 1) % steps
        if not bat.cyclic_soc and t == steps - 1:
            continue
        b.constraint(
            [layout.soc[nxt], layout.soc[t], layout.charge[t], layout.discharge[t]],
            [1.0, -1.0, -eta_ch * ts, ts / eta_dis],
            EQ, 0.0,
        )
    if not bat.cyclic_soc:
        b.constraint(
            [layout.soc[0], layout.battery_capacity],
            [1.0, -bat.initial_soc_fraction],
            EQ, 0.0,
        )
    for t in range(steps):
        b.constraint(
            [layout.soc[t], layout.battery_capacity], [1.0, -bat.soc_max_fraction], LE, 0.0
        )
        b.constraint(
            [layout.soc[t], layout.battery_capacity], [1.0, -bat.soc_min_fraction], GE, 0.0
        )
        b.constraint(
            [layout.charge[t], layout.battery_capacity], [1.0, -bat.max_c_rate], LE, 0.0
        )
        b.constraint(
            [layout.discharge[t], layout.battery_capacity], [1.0, -bat.max_c_rate], LE, 0.0
        )

    # switching booleans
    if layout.n_configs and max_total_modules > 0:
        cols = [layout.modules[i] for i in range(layout.n_configs)] + [layout.pv_built]
        vals = [1.0] * layout.n_configs + [-max_total_modules]
        b.constraint(cols, vals, LE, 0.0)
    if bat.capacity_cap_kwh > 0:
        b.constraint(
            [layout.battery_capacity, layout.battery_built],
            [1.0, -bat.capacity_cap_kwh],
            LE, 0.0,
        )

    # capacity tariff: monthly peak dominates both import and export
    if isinstance(structure, CapacityTariff):
        month_of_step = grid.month_of_step
        for t in range(steps):
            m = layout.monthly_max[month_of_step[t] - 1]
            b.constraint([m, layout.imports[t]], [1.0, -1.0], GE, 0.0)
            b.constraint([m, layout.exports[t]], [1.0, -1.0], GE, 0.0)

    # block rate: epigraph over import segments, hypograph over export segments
    if isinstance(structure, BlockRateTariff):
        for t in range(steps):
            for a_k, b_k in zip(structure.import_slopes, structure.import_offsets):
                b.constraint(
                    [layout.block_cost[t], layout.imports[t]], [1.0, -a_k * ts], GE, b_k
                )
            for a_k, b_k in zip(structure.export_slopes, structure.export_offsets):
                b.constraint(
                    [layout.block_revenue[t], layout.exports[t]], [1.0, -a_k * ts], LE, b_k
                )

    # direction binaries where negative or crossing prices make them necessary
    if battery_mode_active:
        big_m = bat.max_c_rate * bat.capacity_cap_kwh
        for t in range(steps):
            y = layout.battery_mode[t]
            b.constraint([layout.charge[t], y], [1.0, -big_m], LE, 0.0)
            b.constraint([layout.discharge[t], y], [1.0, big_m], LE, big_m)
    if grid_mode_active:
        max_gen = sum(
            cfg.max_modules * float(cfg.unit_generation.values.max())
            for cfg in bp.pv_configs
        )
        dis_cap = bat.max_c_rate * bat.capacity_cap_kwh
        m_imp = float(load.max()) + dis_cap + 1.0
        m_exp = max_gen + dis_cap + 1.0
        for t in range(steps):
            z = layout.grid_mode[t]
            b.constraint([layout.imports[t], z], [1.0, -m_imp], LE, 0.0)
            b.constraint([layout.exports[t], z], [1.0, m_exp], LE, m_exp)

    return b.build()


# ----------------------------------------------------------------------
# Solution extraction
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BuildingDesign:
    """Optimized sizing and dispatch for one building."""

    building_id: str
    modules_per_config: tuple[int, ...]
    battery_capacity_kwh: float
    has_pv: bool
    has_battery: bool
    import_kw: np.ndarray
    export_kw: np.ndarray
    charge_kw: np.ndarray
    discharge_kw: np.ndarray
    curtailment_kw: np.ndarray
    soc_kwh: np.ndarray
    pv_kw: np.ndarray
    monthly_max_kw: np.ndarray
    objective_chf_per_year: float


CONSERVATION_TOLERANCE_KW = 1e-6
INTEGRALITY_GUARD = 1e-4
DISPATCH_NEGATIVE_GUARD = 1e-6


def extract_design(solution, bp: BuildingProblem) -> BuildingDesign:
    """Turn a solver solution into a validated BuildingDesign.

    Integer variables are rounded to exact integers, small numerical noise on
    dispatch is clipped at zero, and the energy-conservation residual is
    re-verified on the cleaned values.
    """
    if solution.status != "optimal":
        raise CorruptSolutionError(
            f"cannot extract a design from a {solution.status} solution"
        )
    layout = problem_layout(bp)
    x = np.asarray(solution.x, dtype=float)
    if x.shape != (layout.num_vars,):
        raise CorruptSolutionError("solution vector does not match the problem layout")

    modules = []
    for i in range(layout.n_configs):
        v = x[layout.modules[i]]
        if abs(v - round(v)) > INTEGRALITY_GUARD:
            raise CorruptSolutionError(f"module count {v} is not integral")
        modules.append(int(round(v)))

    capacity = float(x[layout.battery_capacity])
    if capacity < -DISPATCH_NEGATIVE_GUARD:
        raise CorruptSolutionError(f"negative battery capacity {capacity}")
    capacity = max(capacity, 0.0)
    if capacity < 1e-9:
        capacity = 0.0

    def clean(r: range) -> np.ndarray:
        vals = x[r.start : r.stop].copy()
        if np.any(vals < -DISPATCH_NEGATIVE_GUARD):
            worst = float(vals.min())
            raise CorruptSolutionError(f"dispatch value {worst} below zero")
        return np.clip(vals, 0.0, None)

    imports = clean(layout.imports)
    exports = clean(layout.exports)
    charge = clean(layout.charge)
    discharge = clean(layout.discharge)
    curtail = clean(layout.curtail)
    soc = clean(layout.soc)

    pv = np.zeros(layout.steps)
    for i, cfg in enumerate(bp.pv_configs):
        pv += modules[i] * cfg.unit_generation.values

    residual = (
        imports - exports - charge + discharge - curtail + pv - bp.load.values
    )
    worst = float(np.abs(residual).max()) if layout.steps else 0.0
    if worst > CONSERVATION_TOLERANCE_KW:
        raise CorruptSolutionError(
            f"energy conservation violated by {worst:.3e} kW"
        )

    return BuildingDesign(
        building_id=bp.building_id,
        modules_per_config=tuple(modules),
        battery_capacity_kwh=capacity,
        has_pv=sum(modules) > 0,
        has_battery=capacity > 0.0,
        import_kw=imports,
        export_kw=exports,
        charge_kw=charge,
        discharge_kw=discharge,
        curtailment_kw=curtail,
        soc_kwh=soc,
        pv_kw=pv,
        monthly_max_kw=monthly_peaks(imports, exports, bp.grid),
        objective_chf_per_year=float(solution.objective),
    )


def pv_capital_cost(design: BuildingDesign, bp: BuildingProblem) -> float:
    cost = sum(
        n * cfg.module_capex_chf
        for n, cfg in zip(design.modules_per_config, bp.pv_configs)
    )
    if design.has_pv:
        cost += bp.econ.pv_fixed_cost_chf
    return cost


def battery_capital_cost(design: BuildingDesign, bp: BuildingProblem) -> float:
    cost = design.battery_capacity_kwh * bp.econ.battery_unit_cost_chf_per_kwh
    if design.has_battery:
        cost += bp.econ.battery_fixed_cost_chf
    return cost


def annual_cost_breakdown(design: BuildingDesign, bp: BuildingProblem) -> dict[str, float]:
    """Recompute the objective from the extracted design, term by term.

    Uses the closed-form capital terms and the independent tariff evaluator;
    agreement with the solver objective is a model-correctness invariant.
    """
    econ = bp.econ
    capex_pv = pv_capital_cost(design, bp)
    capex_bat = battery_capital_cost(design, bp)
    annuity = econ.annuity_factor * (
        capex_pv + econ.battery_replacement_factor * capex_bat
    )
    maintenance = econ.pv_maintenance_rate * capex_pv
    exchange = grid_exchange_cost(
        bp.tariff, design.import_kw, design.export_kw, bp.grid
    )
    annual_exchange = bp.grid.annualization_factor * exchange
    return {
        "capital": annuity,
        "maintenance": maintenance,
        "grid_exchange_horizon": exchange,
        "grid_exchange_annual": annual_exchange,
        "total": annuity + maintenance + annual_exchange,
    }


# ----------------------------------------------------------------------
# LP text dump
# ----------------------------------------------------------------------

def write_lp_file(lp: LinearProgram, path: str | Path) -> None:
    """Serialize in CPLEX LP text format for debugging against external solvers."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["Minimize", " obj:"]
    terms = []
    for j, coef in enumerate(lp.objective):
        if coef != 0.0:
            terms.append(f" {'+' if coef >= 0 else '-'} {abs(coef):.17g} {lp.var_names[j]}")
    lines.extend(terms or [" 0 " + lp.var_names[0]])
    lines.append("Subject To")
    sense_txt = {LE: "<=", GE: ">=", EQ: "="}
    for i in range(lp.num_rows):
        row = [f" c{i}:"]
        for c, v in zip(lp.row_cols[i], lp.row_vals[i]):
            row.append(f" {'+' if v >= 0 else '-'} {abs(v):.17g} {lp.var_names[c]}")
        row.append(f" {sense_txt[lp.senses[i]]} {lp.rhs[i]:.17g}")
        lines.append("".join(row))
    lines.append("Bounds")
    for j in range(lp.num_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        lo_txt = "-inf" if np.isneginf(lo) else f"{lo:.17g}"
        hi_txt = "+inf" if np.isposinf(hi) else f"{hi:.17g}"
        lines.append(f" {lo_txt} <= {lp.var_names[j]} <= {hi_txt}")
    integers = [lp.var_names[j] for j in range(lp.num_vars) if lp.is_integer[j]]
    if integers:
        lines.append("General")
        lines.append(" " + " ".join(integers))
    lines.append("End")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
