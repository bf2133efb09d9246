import warnings
from datetime import date

import numpy as np
import pytest

from tariffgrid.fixtures import five_bus_feeder
from tariffgrid.grid_metrics import (
    GridAccumulator,
    en50160_check,
    line_loading_stats,
    load_duration_curve,
    nearest_rank_percentile,
    summarize,
    voltage_deviation_stats,
)
from tariffgrid.network import Transformer
from tariffgrid.powerflow import PowerFlowResult
from tariffgrid.timeseries import TimeGrid


def fake_result(step, voltages, currents=None, slack=0.0):
    voltages = np.asarray(voltages, dtype=float)
    currents = np.asarray(currents if currents is not None else [], dtype=float)
    return PowerFlowResult(
        step=step,
        bus_voltage_pu=voltages,
        bus_angle_rad=np.zeros_like(voltages),
        line_current_a=currents,
        slack_power_kw=slack,
    )


def five_bus_stream(voltage_rows, current_rows=None, slack=None):
    n = len(voltage_rows)
    return [
        fake_result(
            t,
            voltage_rows[t],
            current_rows[t] if current_rows is not None else np.zeros(4),
            slack[t] if slack is not None else 0.0,
        )
        for t in range(n)
    ]


class TestNearestRank:
    def test_hand_example(self):
        sample = np.array([0.02] * 19 + [0.06])
        # rank ceil(0.95 * 20) = 19 -> the 19th smallest is still 0.02
        assert nearest_rank_percentile(sample, 95.0) == pytest.approx(0.02)

    def test_max_at_high_percentile(self):
        assert nearest_rank_percentile(np.array([1.0, 2.0, 3.0]), 100.0) == 3.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            nearest_rank_percentile(np.array([]), 95.0)


class TestVoltageDeviation:
    def test_flat_voltages_give_none(self):
        net = five_bus_feeder()
        stream = five_bus_stream([np.ones(5)] * 10)
        above, below = voltage_deviation_stats(stream, net)
        assert all(v is None for v in above.values())
        assert all(v is None for v in below.values())

    def test_hand_checked_percentile(self):
        net = five_bus_feeder()
        rows = [[1.0, 1.02, 1.0, 1.0, 1.0] for _ in range(19)]
        rows.append([1.0, 1.06, 1.0, 1.0, 1.0])
        above, below = voltage_deviation_stats(five_bus_stream(rows), net)
        assert above["n1"] == pytest.approx(0.02, abs=1e-12)
        assert below["n1"] is None

    def test_split_by_sign(self):
        net = five_bus_feeder()
        rows = [[1.0, 0.95, 1.0, 1.0, 1.0], [1.0, 1.03, 1.0, 1.0, 1.0]]
        above, below = voltage_deviation_stats(five_bus_stream(rows), net)
        assert above["n1"] == pytest.approx(0.03)
        assert below["n1"] == pytest.approx(0.05)

    def test_permutation_invariance(self):
        net = five_bus_feeder()
        rng = np.random.default_rng(4)
        rows = rng.uniform(0.9, 1.1, size=(40, 5))
        perm = rng.permutation(40)
        a1, b1 = voltage_deviation_stats(five_bus_stream(list(rows)), net)
        a2, b2 = voltage_deviation_stats(five_bus_stream(list(rows[perm])), net)
        assert a1 == a2 and b1 == b2


class TestLineLoading:
    def test_zero_current(self):
        net = five_bus_feeder()
        stream = five_bus_stream([np.ones(5)] * 5)
        loading = line_loading_stats(stream, net)
        assert all(v == 0.0 for v in loading.values())

    def test_constant_half_loading(self):
        net = five_bus_feeder()
        # first line has 250 A ampacity; feed it 125 A constantly
        rows = [np.ones(5)] * 8
        currents = [np.array([125.0, 0.0, 0.0, 0.0])] * 8
        loading = line_loading_stats(five_bus_stream(rows, currents), net)
        assert loading["slack-n1"] == pytest.approx(0.5)

    def test_matches_brute_force_recompute(self):
        net = five_bus_feeder()
        rng = np.random.default_rng(12)
        currents = rng.uniform(0, 150, size=(96, 4))
        stream = five_bus_stream([np.ones(5)] * 96, list(currents))
        loading = line_loading_stats(stream, net)
        for k, line in enumerate(net.lines):
            ratios = np.sort(currents[:, k] / line.max_current)
            expected = ratios[int(np.ceil(0.95 * 96)) - 1]
            assert loading[line.id] == pytest.approx(expected, abs=1e-12)


class TestDurationCurve:
    def test_constant_demand(self):
        stream = five_bus_stream([np.ones(5)] * 6, slack=[10.0] * 6)
        stats = load_duration_curve(stream, Transformer(400.0), step_hours=0.25)
        assert np.all(stats.duration_curve_kw == 10.0)
        assert stats.max_reverse_power_kw == 0.0
        assert stats.hours_above_rating_h == 0.0

    def test_single_reverse_spike(self):
        slack = [10.0, -500.0, 20.0, 5.0]
        stream = five_bus_stream([np.ones(5)] * 4, slack=slack)
        stats = load_duration_curve(stream, Transformer(400.0), step_hours=0.25)
        assert stats.max_reverse_power_kw == pytest.approx(500.0)
        assert stats.hours_above_rating_h == pytest.approx(0.25)
        assert np.all(np.diff(stats.duration_curve_kw) <= 0)

    def test_permutation_invariance_and_total(self):
        rng = np.random.default_rng(9)
        slack = rng.normal(0, 100, size=50)
        stream1 = five_bus_stream([np.ones(5)] * 50, slack=list(slack))
        perm = rng.permutation(50)
        stream2 = five_bus_stream([np.ones(5)] * 50, slack=list(slack[perm]))
        s1 = load_duration_curve(stream1, Transformer(400.0))
        s2 = load_duration_curve(stream2, Transformer(400.0))
        assert np.array_equal(s1.duration_curve_kw, s2.duration_curve_kw)
        assert s1.duration_curve_kw.sum() == pytest.approx(slack.sum())

    def test_max_reverse_dominates_p95(self):
        rng = np.random.default_rng(10)
        slack = rng.normal(-50, 80, size=200)
        stream = five_bus_stream([np.ones(5)] * 200, slack=list(slack))
        stats = load_duration_curve(stream, Transformer(400.0))
        reverse = np.maximum(-slack, 0.0)
        assert stats.max_reverse_power_kw >= nearest_rank_percentile(reverse, 95.0)


class TestEn50160:
    def week_grid(self, weeks=1):
        return TimeGrid.from_calendar(900, weeks * 672, date(2018, 1, 1))

    def test_all_nominal_passes(self):
        grid = self.week_grid()
        stream = five_bus_stream([np.ones(5)] * 672)
        ok, violations = en50160_check(stream, grid, five_bus_feeder())
        assert ok and violations == []

    def test_six_percent_violation_fails(self):
        grid = self.week_grid()
        bad_steps = int(0.06 * 672)
        rows = [[1.0, 1.12, 1.0, 1.0, 1.0] for _ in range(bad_steps)]
        rows += [[1.0, 1.0, 1.0, 1.0, 1.0] for _ in range(672 - bad_steps)]
        ok, violations = en50160_check(five_bus_stream(rows), grid, five_bus_feeder())
        assert not ok
        assert violations[0].bus == "n1"
        assert violations[0].in_band_fraction == pytest.approx(
            (672 - bad_steps) / 672, abs=1e-12
        )

    def test_four_percent_violation_passes(self):
        grid = self.week_grid(2)
        rows = []
        for _ in range(2):  # two weeks, 4% out of band each
            bad_steps = int(0.04 * 672)
            rows += [[1.0, 1.12, 1.0, 1.0, 1.0] for _ in range(bad_steps)]
            rows += [[1.0, 1.0, 1.0, 1.0, 1.0] for _ in range(672 - bad_steps)]
        ok, violations = en50160_check(five_bus_stream(rows), grid, five_bus_feeder())
        assert ok and violations == []

    def test_short_horizon_warns(self):
        grid = TimeGrid.from_calendar(900, 96)
        stream = five_bus_stream([np.ones(5)] * 96)
        with pytest.warns(UserWarning, match="shorter than one week"):
            ok, _ = en50160_check(stream, grid, five_bus_feeder())
        assert ok


class TestAccumulator:
    def test_merge_is_associative_with_extend(self):
        net = five_bus_feeder()
        rng = np.random.default_rng(2)
        rows = list(rng.uniform(0.9, 1.1, size=(30, 5)))
        currents = list(rng.uniform(0, 100, size=(30, 4)))
        slack = list(rng.normal(0, 50, size=30))
        stream = five_bus_stream(rows, currents, slack)
        whole = GridAccumulator().extend(stream)
        left = GridAccumulator().extend(stream[:11])
        right = GridAccumulator().extend(stream[11:])
        merged = left.merge(right)
        a1, b1 = voltage_deviation_stats(whole, net)
        a2, b2 = voltage_deviation_stats(merged, net)
        assert a1 == a2 and b1 == b2
        l1 = line_loading_stats(whole, net)
        l2 = line_loading_stats(merged, net)
        assert l1 == l2

    def test_summarize_bundles_everything(self):
        net = five_bus_feeder()
        grid = TimeGrid.from_calendar(900, 672, date(2018, 1, 1))
        rows = [[1.0, 1.01, 0.99, 1.0, 1.02]] * 672
        currents = [np.array([50.0, 20.0, 10.0, 5.0])] * 672
        slack = [-70.0] * 672
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = summarize(five_bus_stream(rows, currents, slack), net, grid)
        assert report.duration.max_reverse_power_kw == pytest.approx(70.0)
        assert report.duration.hours_above_rating_h == pytest.approx(672 * 0.25)
        assert report.en50160_pass
        assert report.v_dev_above_p95["n1"] == pytest.approx(0.01)
        assert report.v_dev_below_p95["n2"] == pytest.approx(0.01)
        assert report.line_loading_p95["slack-n1"] == pytest.approx(0.2)
