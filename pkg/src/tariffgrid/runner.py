"""Scenario orchestration: config parsing, building solves, power flow, reports.

A scenario is one YAML document naming the tariff, the horizon, the network,
and the buildings. ``run_scenario`` optimizes every building (or applies the
load-only / full-PV bounding modes), solves the power flow over the horizon,
and emits deterministic CSV reports plus a machine-readable manifest.
``compare_scenarios`` lines up manifests of runs over identical inputs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .building_metrics import (
    METRIC_FIELDS,
    BuildingReport,
    compute_report,
    fleet_summary,
)
from .errors import InfeasibleProblemError, ScenarioError
from .grid_metrics import GridReport, summarize
from .milp import (
    BatteryParameters,
    BuildingDesign,
    BuildingProblem,
    EconomicParameters,
    PvConfiguration,
    build_problem,
    extract_design,
    write_lp_file,
)
from .network import Network, injections_at_buses, load_network
from .powerflow import PowerFlowOptions, solve_horizon
from .solver import SolveOptions, solve_mip
from .tariffs import (
    BlockRateTariff,
    CapacityTariff,
    TariffScenario,
    VolumetricTariff,
    spot_tariff,
)
from .timeseries import (
    KIND_IMPORT_PRICE,
    KIND_LOAD,
    KIND_PV_UNIT,
    SECONDS_PER_YEAR,
    PowerSeries,
    TimeGrid,
    load_series,
)

SCENARIO_SCHEMA = "tariffgrid-scenario/1"
MANIFEST_SCHEMA = "tariffgrid-manifest/1"

MODE_OPTIMIZE = "optimize"
MODE_LOAD_ONLY = "load-only"
MODE_FULL_PV = "full-pv"
MODES = (MODE_OPTIMIZE, MODE_LOAD_ONLY, MODE_FULL_PV)


@dataclass(frozen=True)
class PvSpec:
    series: str
    max_modules: int
    unit_nominal_power_kw: float = 0.315
    unit_cost_chf_per_w: float = 1.05


@dataclass(frozen=True)
class BuildingSpec:
    id: str
    load: str
    pv: tuple[PvSpec, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    mode: str
    step_seconds: float
    step_count: int
    calendar_start: date
    data_dir: Path
    network_path: Path
    tariff_spec: dict
    econ: EconomicParameters
    battery: BatteryParameters
    solve_options: SolveOptions
    buildings: tuple[BuildingSpec, ...]
    pf_flagged_fraction: float = 1e-3


def _dataclass_overrides(cls, defaults, overrides: dict | None):
    if not overrides:
        return defaults
    known = set(defaults.__dataclass_fields__)
    unknown = set(overrides) - known
    if unknown:
        raise ScenarioError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return replace(defaults, **overrides)


def load_scenario_config(
    path: str | Path,
    *,
    data_dir: str | Path | None = None,
    network: str | Path | None = None,
    weeks: int | None = None,
    engine: str | None = None,
) -> ScenarioConfig:
    """Parse a scenario YAML document, applying CLI overrides where given."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario config not found: {path}")
    doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected a mapping at top level")
    if doc.get("schema") != SCENARIO_SCHEMA:
        raise ScenarioError(
            f"{path}: unsupported schema {doc.get('schema')!r}, expected {SCENARIO_SCHEMA}"
        )
    base = path.parent

    mode = doc.get("mode", MODE_OPTIMIZE)
    if mode not in MODES:
        raise ScenarioError(f"unknown mode {mode!r}; expected one of {MODES}")

    step_seconds = float(doc.get("step_seconds", 900))
    if weeks is None:
        weeks = doc.get("weeks")
    if weeks is not None:
        step_count = int(round(weeks * 7 * 86400 / step_seconds))
    elif "steps" in doc:
        step_count = int(doc["steps"])
    else:
        step_count = int(round(SECONDS_PER_YEAR / step_seconds))

    start_raw = doc.get("calendar_start", "2018-01-01")
    calendar_start = (
        start_raw if isinstance(start_raw, date) else date.fromisoformat(str(start_raw))
    )

    buildings = []
    for b in doc.get("buildings", []):
        pv = tuple(
            PvSpec(
                series=str(p["series"]),
                max_modules=int(p["max_modules"]),
                unit_nominal_power_kw=float(p.get("unit_nominal_power_kw", 0.315)),
                unit_cost_chf_per_w=float(p.get("unit_cost_chf_per_w", 1.05)),
            )
            for p in b.get("pv", [])
        )
        buildings.append(BuildingSpec(id=str(b["id"]), load=str(b["load"]), pv=pv))
    if not buildings:
        raise ScenarioError(f"{path}: scenario defines no buildings")
    ids = [b.id for b in buildings]
    if len(set(ids)) != len(ids):
        raise ScenarioError("duplicate building ids in scenario")

    solver_doc = dict(doc.get("solver") or {})
    if engine is not None:
        solver_doc["engine"] = engine
    solve_options = _dataclass_overrides(SolveOptions, SolveOptions(), solver_doc)

    return ScenarioConfig(
        name=str(doc.get("name", path.stem)),
        mode=mode,
        step_seconds=step_seconds,
        step_count=step_count,
        calendar_start=calendar_start,
        data_dir=Path(data_dir) if data_dir else base / str(doc.get("data_dir", "data")),
        network_path=Path(network) if network else base / str(doc.get("network", "network.yaml")),
        tariff_spec=dict(doc.get("tariff") or {}),
        econ=_dataclass_overrides(
            EconomicParameters, EconomicParameters(), doc.get("economics")
        ),
        battery=_dataclass_overrides(
            BatteryParameters, BatteryParameters(), doc.get("battery")
        ),
        solve_options=solve_options,
        buildings=tuple(buildings),
        pf_flagged_fraction=float(doc.get("pf_flagged_fraction", 1e-3)),
    )


def build_tariff(spec: dict, grid: TimeGrid, data_dir: Path) -> TariffScenario:
    """Materialize the tariff named by a scenario config."""
    kind = spec.get("kind")
    if kind == "volumetric":
        n = grid.step_count
        imp = np.full(n, float(spec["import_cts_per_kwh"]) / 100.0)
        exp = np.full(n, float(spec["export_cts_per_kwh"]) / 100.0)
        window = spec.get("window")
        if window:
            h0, h1 = (int(h) for h in window["hours"])
            hours = grid.hour_of_day()
            mask = (hours >= h0) & (hours < h1)
            imp[mask] = float(window["import_cts_per_kwh"]) / 100.0
            exp[mask] = float(window["export_cts_per_kwh"]) / 100.0
        if "import_series" in spec:
            imp = load_series(
                data_dir / spec["import_series"], grid, KIND_IMPORT_PRICE,
                allow_longer=True,
            ).values
        if "export_series" in spec:
            exp = load_series(
                data_dir / spec["export_series"], grid, KIND_IMPORT_PRICE,
                allow_longer=True,
            ).values
        name = spec.get("name", "volumetric")
        return TariffScenario(name=name, structure=VolumetricTariff(imp, exp))
    if kind == "spot":
        price = load_series(
            data_dir / spec["price_series"], grid, KIND_IMPORT_PRICE, allow_longer=True
        )
        return spot_tariff(
            grid,
            price,
            import_multiplier=float(spec.get("import_multiplier", 3.9468)),
            export_multiplier=float(spec.get("export_multiplier", 1.604)),
        )
    if kind == "capacity":
        return TariffScenario(
            name="capacity",
            structure=CapacityTariff(
                import_price=float(spec["import_cts_per_kwh"]) / 100.0,
                export_price=float(spec["export_cts_per_kwh"]) / 100.0,
                demand_charge=float(spec["demand_chf_per_kw_month"]),
            ),
        )
    if kind == "block-rate":
        blocks = [
            (
                float(b["upper_kw"]),
                float(b["import_cts_per_kwh"]) / 100.0,
                float(b["export_cts_per_kwh"]) / 100.0,
            )
            for b in spec["blocks"]
        ]
        return TariffScenario(
            name="block_rate",
            structure=BlockRateTariff.build(blocks, grid.step_hours),
        )
    raise ScenarioError(f"unknown tariff kind {kind!r}")


# ----------------------------------------------------------------------
# Building assembly and solving
# ----------------------------------------------------------------------

def assemble_building(
    spec: BuildingSpec,
    config: ScenarioConfig,
    grid: TimeGrid,
    tariff: TariffScenario,
) -> BuildingProblem:
    load = load_series(config.data_dir / spec.load, grid, KIND_LOAD, allow_longer=True)
    configs = tuple(
        PvConfiguration(
            unit_generation=load_series(
                config.data_dir / p.series, grid, KIND_PV_UNIT, allow_longer=True
            ),
            max_modules=p.max_modules,
            unit_nominal_power_kw=p.unit_nominal_power_kw,
            unit_cost_chf_per_w=p.unit_cost_chf_per_w,
        )
        for p in spec.pv
    )
    return BuildingProblem(
        building_id=spec.id,
        load=load,
        pv_configs=configs,
        tariff=tariff,
        econ=config.econ,
        battery=config.battery,
        grid=grid,
    )


def solve_building(
    bp: BuildingProblem, mode: str, opts: SolveOptions,
    lp_dump_path: Path | None = None,
) -> BuildingDesign:
    if mode == MODE_LOAD_ONLY:
        fixed_modules = [0] * len(bp.pv_configs)
        fixed_battery = 0.0
    elif mode == MODE_FULL_PV:
        fixed_modules = [cfg.max_modules for cfg in bp.pv_configs]
        fixed_battery = 0.0
    else:
        fixed_modules = None
        fixed_battery = None
    lp = build_problem(bp, fixed_modules=fixed_modules, fixed_battery_kwh=fixed_battery)
    if lp_dump_path is not None:
        write_lp_file(lp, lp_dump_path)
    solution = solve_mip(lp, opts)
    if solution.status != "optimal":
        raise InfeasibleProblemError(
            f"building {bp.building_id}: solver returned {solution.status}"
        )
    return extract_design(solution, bp)


def _solve_worker(args) -> tuple[BuildingDesign, BuildingReport]:
    bp, mode, opts, lp_dump_path = args
    design = solve_building(bp, mode, opts, lp_dump_path=lp_dump_path)
    return design, compute_report(design, bp)


# ----------------------------------------------------------------------
# Deterministic CSV output
# ----------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


BUILDING_COLUMNS = ["building_id", "modules_total", "objective_chf_per_year"] + METRIC_FIELDS


def _building_rows(designs: list[BuildingDesign], reports: list[BuildingReport]):
    for design, report in zip(designs, reports):
        row = [
            report.building_id,
            sum(design.modules_per_config),
            design.objective_chf_per_year,
        ]
        row.extend(getattr(report, name) for name in METRIC_FIELDS)
        yield row


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _inputs_hash(config: ScenarioConfig) -> str:
    digest = hashlib.sha256()
    digest.update(
        json.dumps(
            {
                "step_seconds": config.step_seconds,
                "step_count": config.step_count,
                "calendar_start": config.calendar_start.isoformat(),
                "econ": config.econ.__dict__,
                "battery": config.battery.__dict__,
                "buildings": [
                    {
                        "id": b.id,
                        "load": b.load,
                        "pv": [p.__dict__ for p in b.pv],
                    }
                    for b in config.buildings
                ],
            },
            sort_keys=True,
        ).encode()
    )
    digest.update(_sha256_file(config.network_path).encode())
    series_files = sorted(
        {b.load for b in config.buildings}
        | {p.series for b in config.buildings for p in b.pv}
    )
    for rel in series_files:
        digest.update(rel.encode())
        digest.update(_sha256_file(config.data_dir / rel).encode())
    return digest.hexdigest()


def _config_hash(config: ScenarioConfig) -> str:
    payload = {
        "name": config.name,
        "mode": config.mode,
        "tariff": config.tariff_spec,
        "solver": {
            "engine": config.solve_options.engine,
            "relative_mip_gap": config.solve_options.relative_mip_gap,
        },
        "pf_flagged_fraction": config.pf_flagged_fraction,
    }
    return hashlib.sha256(
        (json.dumps(payload, sort_keys=True) + _inputs_hash(config)).encode()
    ).hexdigest()


# ----------------------------------------------------------------------
# The run itself
# ----------------------------------------------------------------------

@dataclass
class RunResult:
    out_dir: Path
    manifest_path: Path
    manifest: dict
    designs: list[BuildingDesign]
    reports: list[BuildingReport]
    grid_report: GridReport


def run_scenario(
    config: ScenarioConfig,
    out_dir: str | Path,
    *,
    jobs: int = 1,
    plots: bool = False,
    dump_lp: bool = False,
    pf_out: str | Path | None = None,
    metrics_out: str | Path | None = None,
) -> RunResult:
    """Run one scenario end to end and write its reports.

    Building optimizations run in parallel when ``jobs`` exceeds one; outputs
    are assembled in building order so reports are byte-identical regardless
    of parallelism.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_dir = Path(metrics_out) if metrics_out else out_dir
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    grid = TimeGrid.from_calendar(
        config.step_seconds, config.step_count, config.calendar_start
    )
    tariff = build_tariff(config.tariff_spec, grid, config.data_dir)
    net = load_network(config.network_path)
    for spec in config.buildings:
        if spec.id not in net.building_to_bus:
            raise ScenarioError(f"building {spec.id} is not mapped in the network")
    problems = [
        assemble_building(spec, config, grid, tariff) for spec in config.buildings
    ]
    timings["load_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    tasks = [
        (
            bp,
            config.mode,
            config.solve_options,
            out_dir / "lp" / f"{bp.building_id}.lp" if dump_lp else None,
        )
        for bp in problems
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(_solve_worker, tasks))
    else:
        solved = [_solve_worker(task) for task in tasks]
    designs = [design for design, _ in solved]
    reports = [report for _, report in solved]
    timings["optimize_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    results = solve_horizon(
        net, designs, grid, PowerFlowOptions(),
        flagged_fraction=config.pf_flagged_fraction,
    )
    grid_report = summarize(results, net, grid)
    timings["powerflow_s"] = time.perf_counter() - t0

    _write_csv(
        metrics_dir / "building_reports.csv",
        BUILDING_COLUMNS,
        _building_rows(designs, reports),
    )
    summary = fleet_summary(reports)
    _write_csv(
        metrics_dir / "fleet_summary.csv",
        ["metric", "p25", "p50", "p75"],
        (
            [name, row["p25"], row["p50"], row["p75"]]
            for name, row in summary.items()
        ),
    )

    duration = grid_report.duration
    worst_above = max(
        (v for v in grid_report.v_dev_above_p95.values() if v is not None),
        default=None,
    )
    worst_below = max(
        (v for v in grid_report.v_dev_below_p95.values() if v is not None),
        default=None,
    )
    max_loading = max(grid_report.line_loading_p95.values(), default=0.0)
    reverse_steps = int(np.sum(duration.duration_curve_kw < 0))
    grid_rows = [
        ["max_reverse_power_kw", duration.max_reverse_power_kw],
        ["hours_above_rating_h", duration.hours_above_rating_h],
        ["reverse_flow_steps", reverse_steps],
        ["en50160_pass", grid_report.en50160_pass],
        ["worst_v_dev_above_p95", worst_above],
        ["worst_v_dev_below_p95", worst_below],
        ["max_line_loading_p95", max_loading],
    ]
    _write_csv(metrics_dir / "grid_summary.csv", ["metric", "value"], grid_rows)
    _write_csv(
        metrics_dir / "voltage_deviation.csv",
        ["bus", "p95_above_pu", "p95_below_pu"],
        (
            [bus, grid_report.v_dev_above_p95[bus], grid_report.v_dev_below_p95[bus]]
            for bus in grid_report.bus_ids
        ),
    )
    _write_csv(
        metrics_dir / "line_loading.csv",
        ["line", "p95_loading"],
        ([line, grid_report.line_loading_p95[line]] for line in grid_report.line_ids),
    )
    _write_csv(
        metrics_dir / "duration_curve.csv",
        ["rank", "slack_power_kw"],
        ((k, v) for k, v in enumerate(duration.duration_curve_kw)),
    )
    _write_csv(
        metrics_dir / "en50160_violations.csv",
        ["week", "bus", "in_band_fraction"],
        ((v.week, v.bus, v.in_band_fraction) for v in grid_report.en50160_violations),
    )

    if pf_out:
        pf_dir = Path(pf_out)
        _write_csv(
            pf_dir / "bus_voltages.csv",
            ["step", "bus", "v_pu", "angle_rad"],
            (
                (res.step, bus, res.bus_voltage_pu[i], res.bus_angle_rad[i])
                for res in results
                for i, bus in enumerate(grid_report.bus_ids)
            ),
        )
        _write_csv(
            pf_dir / "line_currents.csv",
            ["step", "line", "current_a"],
            (
                (res.step, line, res.line_current_a[k])
                for res in results
                for k, line in enumerate(grid_report.line_ids)
            ),
        )

    if plots:
        _write_plots(out_dir / "plots", grid_report)

    fleet_medians = {name: summary[name]["p50"] for name in summary}
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "name": config.name,
        "mode": config.mode,
        "package_version": __version__,
        "inputs_hash": _inputs_hash(config),
        "config_hash": _config_hash(config),
        "step_seconds": config.step_seconds,
        "step_count": config.step_count,
        "timings": timings,
        "reports": {
            "building_reports": str(metrics_dir / "building_reports.csv"),
            "fleet_summary": str(metrics_dir / "fleet_summary.csv"),
            "grid_summary": str(metrics_dir / "grid_summary.csv"),
        },
        "summary": {
            "total_pv_kw": float(sum(r.pv_capacity_kw for r in reports)),
            "total_battery_kwh": float(sum(r.battery_capacity_kwh for r in reports)),
            "fleet_median": fleet_medians,
            "grid": {
                "max_reverse_power_kw": duration.max_reverse_power_kw,
                "hours_above_rating_h": duration.hours_above_rating_h,
                "reverse_flow_steps": reverse_steps,
                "en50160_pass": grid_report.en50160_pass,
                "worst_v_dev_above_p95": worst_above,
                "worst_v_dev_below_p95": worst_below,
                "max_line_loading_p95": max_loading,
            },
        },
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    return RunResult(
        out_dir=out_dir,
        manifest_path=manifest_path,
        manifest=manifest,
        designs=designs,
        reports=reports,
        grid_report=grid_report,
    )


def _write_plots(plot_dir: Path, grid_report: GridReport) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plot_dir.mkdir(parents=True, exist_ok=True)
    duration = grid_report.duration

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(duration.duration_curve_kw)
    ax.axhline(0.0, color="grey", lw=0.8)
    ax.set_xlabel("step rank")
    ax.set_ylabel("slack power (kW)")
    ax.set_title("Load duration curve at the transformer")
    fig.savefig(plot_dir / "duration_curve.svg")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    lines = grid_report.line_ids
    ax.bar(range(len(lines)), [grid_report.line_loading_p95[l] for l in lines])
    ax.set_xticks(range(len(lines)), lines, rotation=90, fontsize=7)
    ax.set_ylabel("95th percentile loading")
    ax.set_title("Line loading")
    fig.tight_layout()
    fig.savefig(plot_dir / "line_loading.svg")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    buses = grid_report.bus_ids
    above = [grid_report.v_dev_above_p95[b] or 0.0 for b in buses]
    below = [-(grid_report.v_dev_below_p95[b] or 0.0) for b in buses]
    ax.bar(range(len(buses)), above, label="above 1 p.u")
    ax.bar(range(len(buses)), below, label="below 1 p.u")
    ax.set_xticks(range(len(buses)), buses, rotation=90, fontsize=7)
    ax.set_ylabel("95th percentile deviation (p.u)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(plot_dir / "voltage_deviation.svg")
    plt.close(fig)


# ----------------------------------------------------------------------
# Cross-scenario comparison
# ----------------------------------------------------------------------

COMPARE_METRICS = [
    ("total_pv_kw", ("summary", "total_pv_kw")),
    ("total_battery_kwh", ("summary", "total_battery_kwh")),
    ("median_pv_host", ("summary", "fleet_median", "pv_host")),
    ("median_bat_auto_days", ("summary", "fleet_median", "bat_auto_days")),
    ("median_gu_import", ("summary", "fleet_median", "gu_import")),
    ("median_gu_export", ("summary", "fleet_median", "gu_export")),
    ("median_self_sufficiency", ("summary", "fleet_median", "self_sufficiency")),
    ("median_dpp_years", ("summary", "fleet_median", "dpp_years")),
    ("median_lcoe_chf_per_kwh", ("summary", "fleet_median", "lcoe_chf_per_kwh")),
    ("max_reverse_power_kw", ("summary", "grid", "max_reverse_power_kw")),
    ("hours_above_rating_h", ("summary", "grid", "hours_above_rating_h")),
    ("reverse_flow_steps", ("summary", "grid", "reverse_flow_steps")),
    ("worst_v_dev_above_p95", ("summary", "grid", "worst_v_dev_above_p95")),
    ("worst_v_dev_below_p95", ("summary", "grid", "worst_v_dev_below_p95")),
    ("max_line_loading_p95", ("summary", "grid", "max_line_loading_p95")),
    ("en50160_pass", ("summary", "grid", "en50160_pass")),
]


def _dig(doc: dict, keys) -> object:
    for key in keys:
        if doc is None:
            return None
        doc = doc.get(key)
    return doc


def compare_scenarios(
    manifest_paths: list[str | Path], baseline: str | Path
) -> list[dict]:
    """Side-by-side table of runs over identical inputs, with baseline deltas."""
    baseline = Path(baseline)
    paths = [baseline] + [Path(p) for p in manifest_paths]
    if len(paths) < 2:
        raise ScenarioError("compare needs a baseline and at least one other run")
    manifests = []
    for p in paths:
        if not p.exists():
            raise ScenarioError(f"manifest not found: {p}")
        manifests.append(json.loads(p.read_text(encoding="utf-8")))
    base_hash = manifests[0].get("inputs_hash")
    for p, m in zip(paths, manifests):
        if m.get("inputs_hash") != base_hash:
            raise ScenarioError(
                f"refusing to compare: {p} was produced from different inputs"
            )
    names = []
    for m in manifests:
        name = m.get("name", "run")
        while name in names:
            name += "*"
        names.append(name)

    rows = []
    for metric, keys in COMPARE_METRICS:
        row: dict[str, object] = {"metric": metric}
        base_value = _dig(manifests[0], keys)
        for name, m in zip(names, manifests):
            value = _dig(m, keys)
            row[name] = value
            if name != names[0]:
                if isinstance(value, (int, float)) and isinstance(base_value, (int, float)) \
                        and not isinstance(value, bool) and not isinstance(base_value, bool):
                    row[f"delta_{name}"] = value - base_value
                else:
                    row[f"delta_{name}"] = None
        rows.append(row)
    return rows


def write_compare_csv(rows: list[dict], path: str | Path) -> None:
    if not rows:
        raise ScenarioError("nothing to write")
    header = list(rows[0].keys())
    _write_csv(Path(path), header, ([row.get(k) for k in header] for row in rows))
