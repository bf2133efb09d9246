"""Synthetic feeders and datasets.

The real feeder and smart-meter data behind the headline study are not
public, so bundled fixtures stand in: a deterministic 5-bus radial feeder for
unit tests and a seeded generator for PV-favorable demo datasets of any size
(loads, per-module PV profiles, a spot-like price series, network document,
and the five tariff scenario configs plus the two bounding scenarios).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .network import Bus, Line, Network, Transformer, save_network
from .tariffs import BLOCK_RATE_TABLE
from .timeseries import PowerSeries, save_series

DEMO_STEP_SECONDS = 900
DEMO_CALENDAR_START = "2018-01-01"


def five_bus_feeder() -> Network:
    """Small deterministic radial feeder: slack plus four load buses in a chain."""
    buses = (
        Bus("slack", 400.0, "slack"),
        Bus("n1", 400.0),
        Bus("n2", 400.0),
        Bus("n3", 400.0),
        Bus("n4", 400.0),
    )
    lines = (
        Line("slack", "n1", 0.04, 0.025, 250.0),
        Line("n1", "n2", 0.05, 0.028, 200.0),
        Line("n2", "n3", 0.06, 0.030, 160.0),
        Line("n3", "n4", 0.08, 0.035, 120.0),
    )
    mapping = {"b1": "n1", "b2": "n2", "b3": "n4"}
    return Network(
        buses=buses,
        lines=lines,
        transformer=Transformer(rated_power_kw=60.0),
        building_to_bus=mapping,
    )


def synthetic_feeder(
    n_buildings: int,
    seed: int = 7,
    rated_power_kw: float = 60.0,
    buildings_per_bus: int = 2,
) -> Network:
    """Randomized radial feeder sized for ``n_buildings`` (seeded, reproducible)."""
    rng = np.random.default_rng(seed)
    n_buses = max(2, -(-n_buildings // buildings_per_bus))
    buses = [Bus("slack", 400.0, "slack")]
    lines = []
    parents = ["slack"]
    for k in range(1, n_buses + 1):
        bus_id = f"n{k}"
        # prefer attaching deeper to produce a mostly chain-like feeder
        parent = parents[-1] if rng.random() < 0.7 else str(rng.choice(parents))
        resistance = float(rng.uniform(0.03, 0.09))
        reactance = resistance * float(rng.uniform(0.4, 0.6))
        ampacity = 250.0 if parent == "slack" else float(rng.choice([120.0, 160.0, 200.0]))
        buses.append(Bus(bus_id, 400.0))
        lines.append(Line(parent, bus_id, resistance, reactance, ampacity))
        parents.append(bus_id)
    mapping = {
        f"b{i + 1:02d}": f"n{i % n_buses + 1}" for i in range(n_buildings)
    }
    return Network(
        buses=tuple(buses),
        lines=tuple(lines),
        transformer=Transformer(rated_power_kw=rated_power_kw),
        building_to_bus=mapping,
    )


def _gaussian_bump(hours: np.ndarray, center: float, width: float) -> np.ndarray:
    return np.exp(-0.5 * ((hours - center) / width) ** 2)


def demo_load(rng: np.random.Generator, steps: int, step_hours: float,
              scale: float) -> np.ndarray:
    """Household-like double-peak load, kW."""
    hours = (np.arange(steps) * step_hours) % 24.0
    shape = (
        0.25
        + 1.0 * _gaussian_bump(hours, 7.5, 1.1)
        + 1.8 * _gaussian_bump(hours, 19.0, 1.7)
    )
    noise = rng.normal(0.0, 0.04, size=steps)
    return np.clip(scale * shape + noise, 0.02, None)


# repeating weather week: clear days interleaved with overcast ones, so a
# battery cannot cover every evening peak from PV alone
_WEATHER_WEEK = np.array([1.0, 0.9, 0.15, 0.75, 0.08, 0.95, 0.55])


def demo_pv_unit(rng: np.random.Generator, steps: int, step_hours: float,
                 nominal_kw: float = 0.315) -> np.ndarray:
    """Per-module generation, kW: clear-sky bell with a daily weather factor."""
    hours = (np.arange(steps) * step_hours) % 24.0
    day = (np.arange(steps) * step_hours // 24.0).astype(int)
    n_days = int(day.max()) + 1
    weather = np.resize(_WEATHER_WEEK, n_days) * rng.uniform(0.9, 1.05, size=n_days)
    weather = np.clip(weather, 0.0, 1.0)
    sun = np.sin(np.pi * (hours - 6.5) / 11.0)
    sun = np.where((hours >= 6.5) & (hours <= 17.5), np.clip(sun, 0.0, None) ** 1.3, 0.0)
    return nominal_kw * weather[day] * sun


def demo_spot_price(rng: np.random.Generator, steps: int, step_hours: float) -> np.ndarray:
    """Spot-like price series (CHF/kWh), double-peaked over the day, positive."""
    hours = (np.arange(steps) * step_hours) % 24.0
    shape = (
        0.045
        + 0.020 * _gaussian_bump(hours, 8.0, 2.0)
        + 0.030 * _gaussian_bump(hours, 19.5, 2.5)
        - 0.018 * _gaussian_bump(hours, 13.0, 2.5)
    )
    noise = rng.normal(0.0, 0.002, size=steps)
    return np.clip(shape + noise, 0.005, None)


def _scenario_docs(n_buildings: int, weeks: int, max_modules: list[int]) -> dict[str, dict]:
    buildings = [
        {
            "id": f"b{i + 1:02d}",
            "load": f"loads/b{i + 1:02d}.csv",
            "pv": [{"series": "pv/unit_south.csv", "max_modules": int(max_modules[i])}],
        }
        for i in range(n_buildings)
    ]
    base = {
        "schema": "tariffgrid-scenario/1",
        "mode": "optimize",
        "step_seconds": DEMO_STEP_SECONDS,
        "weeks": weeks,
        "calendar_start": DEMO_CALENDAR_START,
        "data_dir": "../data",
        "network": "../network.yaml",
        "battery": {"capacity_cap_kwh": 30.0},
        "buildings": buildings,
    }
    reference_tariff = {
        "kind": "volumetric",
        "import_cts_per_kwh": 21.02,
        "export_cts_per_kwh": 8.16,
    }
    docs = {
        "reference": {**base, "name": "reference", "tariff": reference_tariff},
        "solar": {
            **base,
            "name": "solar",
            "tariff": {
                "kind": "volumetric",
                "import_cts_per_kwh": 23.17,
                "export_cts_per_kwh": 11.12,
                "window": {
                    "hours": [11, 15],
                    "import_cts_per_kwh": 14.68,
                    "export_cts_per_kwh": 7.07,
                },
            },
        },
        "spot": {
            **base,
            "name": "spot",
            "tariff": {
                "kind": "spot",
                "price_series": "prices/spot.csv",
                "import_multiplier": 3.9468,
                "export_multiplier": 1.604,
            },
        },
        "capacity": {
            **base,
            "name": "capacity",
            "tariff": {
                "kind": "capacity",
                "import_cts_per_kwh": 15.91,
                "export_cts_per_kwh": 12.09,
                "demand_chf_per_kw_month": 5.02,
            },
        },
        "block_rate": {
            **base,
            "name": "block_rate",
            "tariff": {
                "kind": "block-rate",
                "blocks": [
                    {
                        "upper_kw": up,
                        "import_cts_per_kwh": imp,
                        "export_cts_per_kwh": exp,
                    }
                    for up, imp, exp in BLOCK_RATE_TABLE
                ],
            },
        },
        "load_only": {
            **base,
            "name": "load_only",
            "mode": "load-only",
            "tariff": reference_tariff,
        },
        "full_pv": {
            **base,
            "name": "full_pv",
            "mode": "full-pv",
            "tariff": reference_tariff,
        },
    }
    return docs


def write_demo_dataset(
    root: str | Path,
    n_buildings: int = 10,
    weeks: int = 1,
    seed: int = 7,
) -> dict[str, Path]:
    """Write a complete PV-favorable demo dataset and scenario configs.

    Returns the paths of the written scenario configs, keyed by name.
    """
    root = Path(root)
    steps = int(weeks * 7 * 86400 // DEMO_STEP_SECONDS)
    step_hours = DEMO_STEP_SECONDS / 3600.0
    rng = np.random.default_rng(seed)

    net = synthetic_feeder(n_buildings, seed=seed)
    save_network(net, root / "network.yaml")

    scales = rng.uniform(1.0, 1.8, size=n_buildings)
    for i in range(n_buildings):
        load = demo_load(rng, steps, step_hours, float(scales[i]))
        save_series(
            root / "data" / "loads" / f"b{i + 1:02d}.csv",
            PowerSeries(load, "load"),
            name=f"b{i + 1:02d}_load_kw",
        )
    pv_unit = demo_pv_unit(rng, steps, step_hours)
    save_series(
        root / "data" / "pv" / "unit_south.csv",
        PowerSeries(pv_unit, "pv-unit"),
        name="pv_unit_kw",
    )
    spot = demo_spot_price(rng, steps, step_hours)
    save_series(
        root / "data" / "prices" / "spot.csv",
        PowerSeries(spot, "import-price"),
        name="spot_chf_per_kwh",
    )

    # mixed roof stock: small roofs stay import-bound under a demand charge,
    # large roofs reach the low-revenue export blocks of the block-rate tariff
    n_small = (n_buildings * 3 + 4) // 5
    small = rng.integers(8, 13, size=n_small)
    large = rng.integers(50, 71, size=n_buildings - n_small)
    max_modules = np.concatenate([small, large])
    rng.shuffle(max_modules)
    max_modules = max_modules.tolist()
    paths: dict[str, Path] = {}
    for name, doc in _scenario_docs(n_buildings, weeks, max_modules).items():
        path = root / "scenarios" / f"{name}.yaml"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
        paths[name] = path
    return paths
