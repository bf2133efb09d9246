"""Command-line interface: run scenarios, compare runs, generate demo data."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from .errors import (
    InfeasibleProblemError,
    NetworkError,
    PowerFlowError,
    ScenarioError,
    SeriesError,
    TariffGridError,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_IO = 2
EXIT_INFEASIBLE = 3
EXIT_POWERFLOW = 4


def _fail(exc: Exception) -> "click.exceptions.Exit":
    if isinstance(exc, InfeasibleProblemError):
        code = EXIT_INFEASIBLE
    elif isinstance(exc, PowerFlowError):
        code = EXIT_POWERFLOW
    elif isinstance(exc, (ScenarioError, SeriesError, NetworkError, OSError)):
        code = EXIT_IO
    elif isinstance(exc, TariffGridError):
        code = EXIT_ERROR
    else:
        raise exc
    click.echo(f"error: {exc}", err=True)
    return click.exceptions.Exit(code)


@click.group()
@click.version_option()
def main():
    """Tariff-driven PV-battery sizing with LV grid impact analysis."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Scenario YAML.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (default: runs/<scenario name>).")
@click.option("--jobs", type=int, default=None,
              help="Parallel building solves (default: available cores).")
@click.option("--weeks", type=int, default=None, help="Subsample the horizon to N weeks.")
@click.option("--plots", is_flag=True, help="Write SVG plots of the grid metrics.")
@click.option("--dump-lp", is_flag=True, help="Dump each building problem in LP format.")
@click.option("--metrics-out", type=click.Path(), default=None,
              help="Directory for report CSVs (default: the run directory).")
@click.option("--pf-out", type=click.Path(), default=None,
              help="Directory for per-step power-flow CSV dumps.")
@click.option("--data-dir", type=click.Path(), default=None, help="Override the data directory.")
@click.option("--network", type=click.Path(), default=None, help="Override the network file.")
@click.option("--engine", type=click.Choice(["auto", "builtin", "highs"]), default=None,
              help="Solver engine override.")
def run(config_path, out_dir, jobs, weeks, plots, dump_lp, metrics_out, pf_out,
        data_dir, network, engine):
    """Optimize all buildings, solve the horizon power flow, emit reports."""
    from .runner import load_scenario_config, run_scenario

    try:
        config = load_scenario_config(
            config_path, data_dir=data_dir, network=network, weeks=weeks, engine=engine
        )
        out = Path(out_dir) if out_dir else Path("runs") / config.name
        result = run_scenario(
            config,
            out,
            jobs=jobs if jobs is not None else (os.cpu_count() or 1),
            plots=plots,
            dump_lp=dump_lp,
            pf_out=pf_out,
            metrics_out=metrics_out,
        )
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        raise _fail(exc)
    summary = result.manifest["summary"]
    click.echo(f"scenario {config.name} ({config.mode}): "
               f"{len(result.reports)} buildings, "
               f"{result.manifest['step_count']} steps")
    click.echo(f"  total PV {summary['total_pv_kw']:.2f} kW, "
               f"battery {summary['total_battery_kwh']:.2f} kWh")
    grid = summary["grid"]
    click.echo(f"  max reverse power {grid['max_reverse_power_kw']:.2f} kW, "
               f"EN50160 {'pass' if grid['en50160_pass'] else 'FAIL'}")
    click.echo(f"  manifest: {result.manifest_path}")


@main.command()
@click.option("--baseline", required=True, type=click.Path(), help="Baseline run manifest.")
@click.argument("manifests", nargs=-1, required=True, type=click.Path())
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the comparison table as CSV.")
def compare(baseline, manifests, out_path):
    """Tabulate fleet and grid metrics of several runs against a baseline."""
    from .runner import compare_scenarios, write_compare_csv

    try:
        rows = compare_scenarios(list(manifests), baseline)
        if out_path:
            write_compare_csv(rows, out_path)
    except Exception as exc:  # noqa: BLE001
        raise _fail(exc)
    header = list(rows[0].keys())
    widths = [max(len(str(r.get(h, ""))) for r in rows + [dict(zip(header, header))])
              for h in header]
    click.echo("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        cells = []
        for h, w in zip(header, widths):
            v = row.get(h)
            if isinstance(v, float):
                v = f"{v:.4g}"
            cells.append(str(v if v is not None else "-").ljust(w))
        click.echo("  ".join(cells))
    if out_path:
        click.echo(f"written: {out_path}")


@main.command("demo-data")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Target directory.")
@click.option("--buildings", type=int, default=10, show_default=True)
@click.option("--weeks", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
def demo_data(out_dir, buildings, weeks, seed):
    """Generate a synthetic PV-favorable feeder dataset with scenario configs."""
    from .fixtures import write_demo_dataset

    try:
        paths = write_demo_dataset(out_dir, n_buildings=buildings, weeks=weeks, seed=seed)
    except Exception as exc:  # noqa: BLE001
        raise _fail(exc)
    click.echo(f"demo dataset written under {out_dir}")
    for name, path in paths.items():
        click.echo(f"  {name}: {path}")


if __name__ == "__main__":
    main()
