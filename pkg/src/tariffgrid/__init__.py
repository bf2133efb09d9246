"""PV-battery sizing under tariff scenarios with LV grid impact analysis."""

from .timeseries import PowerSeries, TimeGrid, load_series, month_partition, save_series
from .tariffs import (
    BlockRateTariff,
    CapacityTariff,
    TariffScenario,
    VolumetricTariff,
    block_rate_step_cost,
    grid_exchange_cost,
    make_block_offsets,
)
from .milp import (
    BatteryParameters,
    BuildingDesign,
    BuildingProblem,
    EconomicParameters,
    LinearProgram,
    PvConfiguration,
    build_problem,
    extract_design,
    write_lp_file,
)
from .solver import SolveOptions, Solution, register_backend, solve_lp, solve_mip
from .building_metrics import BuildingReport, compute_report, fleet_summary
from .network import Bus, Line, Network, Transformer, injections_at_buses, load_network
from .powerflow import PowerFlowOptions, PowerFlowResult, solve_horizon, solve_step
from .grid_metrics import (
    GridReport,
    en50160_check,
    line_loading_stats,
    load_duration_curve,
    voltage_deviation_stats,
)

__version__ = "0.1.0"

__all__ = [
    "BatteryParameters",
    "BlockRateTariff",
    "BuildingDesign",
    "BuildingProblem",
    "BuildingReport",
    "Bus",
    "CapacityTariff",
    "EconomicParameters",
    "GridReport",
    "Line",
    "LinearProgram",
    "Network",
    "PowerFlowOptions",
    "PowerFlowResult",
    "PowerSeries",
    "PvConfiguration",
    "SolveOptions",
    "Solution",
    "TariffScenario",
    "TimeGrid",
    "Transformer",
    "VolumetricTariff",
    "block_rate_step_cost",
    "build_problem",
    "compute_report",
    "en50160_check",
    "extract_design",
    "fleet_summary",
    "grid_exchange_cost",
    "injections_at_buses",
    "line_loading_stats",
    "load_duration_curve",
    "load_network",
    "load_series",
    "make_block_offsets",
    "month_partition",
    "register_backend",
    "save_series",
    "solve_horizon",
    "solve_lp",
    "solve_mip",
    "solve_step",
    "voltage_deviation_stats",
    "write_lp_file",
]
