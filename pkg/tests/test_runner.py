import csv
import json
import warnings
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from tariffgrid.cli import main as cli_main
from tariffgrid.errors import ScenarioError
from tariffgrid.fixtures import write_demo_dataset
from tariffgrid.network import injections_at_buses, load_network
from tariffgrid.runner import (
    build_tariff,
    compare_scenarios,
    load_scenario_config,
    run_scenario,
    write_compare_csv,
)
from tariffgrid.tariffs import BlockRateTariff, CapacityTariff, VolumetricTariff
from tariffgrid.timeseries import TimeGrid


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo")
    paths = write_demo_dataset(root, n_buildings=4, weeks=1, seed=11)
    return root, paths


@pytest.fixture(scope="module")
def demo_runs(demo):
    root, paths = demo
    results = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name in ("load_only", "full_pv", "reference"):
            config = load_scenario_config(paths[name])
            results[name] = run_scenario(config, root / "runs" / name, jobs=1)
    return root, paths, results


class TestConfigParsing:
    def test_load_demo_config(self, demo):
        root, paths = demo
        config = load_scenario_config(paths["reference"])
        assert config.name == "reference"
        assert config.mode == "optimize"
        assert config.step_count == 672
        assert len(config.buildings) == 4

    def test_weeks_override(self, demo):
        root, paths = demo
        config = load_scenario_config(paths["reference"], weeks=1)
        assert config.step_count == 672

    def test_missing_config(self, tmp_path):
        with pytest.raises(ScenarioError, match="not found"):
            load_scenario_config(tmp_path / "nope.yaml")

    def test_unknown_mode_rejected(self, tmp_path, demo):
        root, paths = demo
        text = paths["reference"].read_text().replace("mode: optimize", "mode: magic")
        bad = tmp_path / "bad.yaml"
        bad.write_text(text)
        with pytest.raises(ScenarioError, match="unknown mode"):
            load_scenario_config(bad)

    def test_tariff_kinds(self, demo):
        root, paths = demo
        grid = TimeGrid.from_calendar(900, 672)
        data_dir = root / "data"
        for name, expected in (
            ("reference", VolumetricTariff),
            ("solar", VolumetricTariff),
            ("spot", VolumetricTariff),
            ("capacity", CapacityTariff),
            ("block_rate", BlockRateTariff),
        ):
            config = load_scenario_config(paths[name])
            tariff = build_tariff(config.tariff_spec, grid, data_dir)
            assert isinstance(tariff.structure, expected), name

    def test_unknown_tariff_kind(self, demo):
        root, _ = demo
        grid = TimeGrid.from_calendar(900, 4)
        with pytest.raises(ScenarioError, match="unknown tariff kind"):
            build_tariff({"kind": "mystery"}, grid, root)


class TestBoundingModes:
    def test_load_only_identities(self, demo_runs):
        _, _, results = demo_runs
        run = results["load_only"]
        for report in run.reports:
            assert report.gu_import == pytest.approx(1.0)
            assert report.self_sufficiency == pytest.approx(0.0)
            assert report.pv_host == 0.0
        # no generation anywhere: voltage never exceeds nominal
        assert all(v is None for v in run.grid_report.v_dev_above_p95.values())
        assert run.grid_report.duration.max_reverse_power_kw == 0.0

    def test_full_pv_identities(self, demo_runs):
        _, _, results = demo_runs
        run = results["full_pv"]
        for report, design in zip(run.reports, run.designs):
            assert report.pv_host == pytest.approx(1.0)
            assert report.battery_capacity_kwh == 0.0
            assert design.battery_capacity_kwh == 0.0
        assert run.grid_report.duration.max_reverse_power_kw > 0.0

    def test_pipeline_consistency(self, demo_runs):
        _, paths, results = demo_runs
        run = results["reference"]
        config = load_scenario_config(paths["reference"])
        net = load_network(config.network_path)
        for step in (0, 100, 500):
            injections = injections_at_buses(run.designs, net, step)
            fleet = sum(
                float(d.import_kw[step] - d.export_kw[step]) for d in run.designs
            )
            assert sum(injections.values()) == pytest.approx(fleet, abs=1e-9)


class TestOutputs:
    def test_report_files_exist(self, demo_runs):
        _, _, results = demo_runs
        out = results["reference"].out_dir
        for name in (
            "building_reports.csv",
            "fleet_summary.csv",
            "grid_summary.csv",
            "voltage_deviation.csv",
            "line_loading.csv",
            "duration_curve.csv",
            "en50160_violations.csv",
            "manifest.json",
        ):
            assert (out / name).exists(), name

    def test_building_report_rows(self, demo_runs):
        _, _, results = demo_runs
        out = results["reference"].out_dir
        rows = list(csv.DictReader(open(out / "building_reports.csv")))
        assert [r["building_id"] for r in rows] == [
            r.building_id for r in results["reference"].reports
        ]
        assert all(float(r["lcoe_chf_per_kwh"]) > 0 for r in rows)

    def test_manifest_contents(self, demo_runs):
        _, _, results = demo_runs
        manifest = json.loads(results["reference"].manifest_path.read_text())
        assert manifest["schema"] == "tariffgrid-manifest/1"
        assert "inputs_hash" in manifest and "timings" in manifest
        assert manifest["summary"]["total_pv_kw"] > 0

    def test_determinism_byte_identical(self, demo, tmp_path):
        root, paths = demo
        config = load_scenario_config(paths["load_only"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r1 = run_scenario(config, tmp_path / "a", jobs=1)
            r2 = run_scenario(config, tmp_path / "b", jobs=1)
        for name in ("building_reports.csv", "fleet_summary.csv", "grid_summary.csv",
                     "duration_curve.csv"):
            b1 = (r1.out_dir / name).read_bytes()
            b2 = (r2.out_dir / name).read_bytes()
            assert b1 == b2, name

    def test_parallel_jobs_match_serial(self, demo, tmp_path):
        root, paths = demo
        config = load_scenario_config(paths["load_only"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            serial = run_scenario(config, tmp_path / "serial", jobs=1)
            parallel = run_scenario(config, tmp_path / "parallel", jobs=2)
        assert (serial.out_dir / "building_reports.csv").read_bytes() == (
            parallel.out_dir / "building_reports.csv"
        ).read_bytes()

    def test_optional_dumps(self, demo, tmp_path):
        root, paths = demo
        config = load_scenario_config(paths["load_only"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = run_scenario(
                config, tmp_path / "dumps", jobs=1, dump_lp=True,
                pf_out=tmp_path / "dumps" / "pf",
            )
        assert (result.out_dir / "lp" / "b01.lp").exists()
        assert (tmp_path / "dumps" / "pf" / "bus_voltages.csv").exists()
        assert (tmp_path / "dumps" / "pf" / "line_currents.csv").exists()


class TestCompare:
    def test_self_compare_zero_deltas(self, demo_runs):
        _, _, results = demo_runs
        manifest = results["reference"].manifest_path
        rows = compare_scenarios([manifest], manifest)
        for row in rows:
            for key, value in row.items():
                if key.startswith("delta_") and value is not None:
                    assert value == 0

    def test_cross_scenario_directions(self, demo_runs):
        _, _, results = demo_runs
        rows = compare_scenarios(
            [results["full_pv"].manifest_path],
            results["load_only"].manifest_path,
        )
        by_metric = {r["metric"]: r for r in rows}
        assert by_metric["max_reverse_power_kw"]["load_only"] == 0.0
        assert by_metric["max_reverse_power_kw"]["full_pv"] > 0.0

    def test_mismatched_inputs_refused(self, demo_runs, tmp_path):
        _, _, results = demo_runs
        doctored = json.loads(results["reference"].manifest_path.read_text())
        doctored["inputs_hash"] = "0" * 64
        bad = tmp_path / "bad_manifest.json"
        bad.write_text(json.dumps(doctored))
        with pytest.raises(ScenarioError, match="different inputs"):
            compare_scenarios([bad], results["reference"].manifest_path)

    def test_write_compare_csv(self, demo_runs, tmp_path):
        _, _, results = demo_runs
        rows = compare_scenarios(
            [results["full_pv"].manifest_path],
            results["load_only"].manifest_path,
        )
        target = tmp_path / "compare.csv"
        write_compare_csv(rows, target)
        parsed = list(csv.DictReader(open(target)))
        assert parsed[0]["metric"] == "total_pv_kw"


class TestCli:
    def test_missing_config_exit_code(self):
        runner = CliRunner()
        result = runner.invoke(cli_main, ["run", "--config", "missing.yaml"])
        assert result.exit_code == 2

    def test_demo_and_run_and_compare(self, tmp_path):
        runner = CliRunner()
        gen = runner.invoke(
            cli_main,
            ["demo-data", "--out", str(tmp_path), "--buildings", "3", "--weeks", "1"],
        )
        assert gen.exit_code == 0, gen.output
        run1 = runner.invoke(
            cli_main,
            [
                "run", "--config", str(tmp_path / "scenarios" / "load_only.yaml"),
                "--out", str(tmp_path / "runs" / "load_only"), "--jobs", "1",
            ],
        )
        assert run1.exit_code == 0, run1.output
        assert "load_only" in run1.output
        run2 = runner.invoke(
            cli_main,
            [
                "run", "--config", str(tmp_path / "scenarios" / "full_pv.yaml"),
                "--out", str(tmp_path / "runs" / "full_pv"), "--jobs", "1",
            ],
        )
        assert run2.exit_code == 0, run2.output
        cmp_result = runner.invoke(
            cli_main,
            [
                "compare",
                "--baseline", str(tmp_path / "runs" / "load_only" / "manifest.json"),
                str(tmp_path / "runs" / "full_pv" / "manifest.json"),
                "--out", str(tmp_path / "compare.csv"),
            ],
        )
        assert cmp_result.exit_code == 0, cmp_result.output
        assert (tmp_path / "compare.csv").exists()

    def test_weeks_flag(self, tmp_path):
        runner = CliRunner()
        runner.invoke(cli_main, ["demo-data", "--out", str(tmp_path),
                                 "--buildings", "2", "--weeks", "2"])
        result = runner.invoke(
            cli_main,
            [
                "run", "--config", str(tmp_path / "scenarios" / "load_only.yaml"),
                "--out", str(tmp_path / "runs" / "w1"), "--jobs", "1", "--weeks", "1",
            ],
        )
        assert result.exit_code == 0, result.output
        manifest = json.loads((tmp_path / "runs" / "w1" / "manifest.json").read_text())
        assert manifest["step_count"] == 672
