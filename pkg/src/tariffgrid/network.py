"""Low-voltage network model: buses, lines, transformer, building mapping.

The network document is a versioned YAML file. Buildings are mapped to buses;
their net exchange with the grid becomes the bus injection for the power
flow. A balanced three-phase equivalent (single-phase model) is assumed, with
loads at a fixed power factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import NetworkError
from .milp import BuildingDesign

NETWORK_SCHEMA = "tariffgrid-network/1"

SLACK = "slack"
LOAD = "load"


@dataclass(frozen=True)
class Bus:
    id: str
    nominal_voltage: float  # V, line-to-line
    kind: str = LOAD

    def __post_init__(self):
        if self.kind not in (SLACK, LOAD):
            raise NetworkError(f"bus {self.id}: unknown kind {self.kind!r}")
        if self.nominal_voltage <= 0:
            raise NetworkError(f"bus {self.id}: nominal voltage must be positive")


@dataclass(frozen=True)
class Line:
    from_bus: str
    to_bus: str
    resistance: float  # ohm
    reactance: float  # ohm
    max_current: float  # A

    def __post_init__(self):
        if self.resistance < 0:
            raise NetworkError(f"line {self.from_bus}-{self.to_bus}: negative resistance")
        if self.max_current <= 0:
            raise NetworkError(f"line {self.from_bus}-{self.to_bus}: max_current must be positive")

    @property
    def id(self) -> str:
        return f"{self.from_bus}-{self.to_bus}"


@dataclass(frozen=True)
class Transformer:
    rated_power_kw: float = 400.0

    def __post_init__(self):
        if self.rated_power_kw <= 0:
            raise NetworkError("transformer rating must be positive")


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    transformer: Transformer
    building_to_bus: dict[str, str] = field(default_factory=dict)
    power_factor: float = 1.0
    base_power_kva: float = 100.0

    def __post_init__(self):
        ids = [bus.id for bus in self.buses]
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate bus ids")
        slacks = [bus for bus in self.buses if bus.kind == SLACK]
        if len(slacks) != 1:
            raise NetworkError(f"exactly one slack bus required, found {len(slacks)}")
        known = set(ids)
        line_keys = set()
        for line in self.lines:
            if line.from_bus not in known or line.to_bus not in known:
                raise NetworkError(f"line {line.id} references unknown bus")
            key = frozenset((line.from_bus, line.to_bus))
            if key in line_keys:
                raise NetworkError(f"duplicate line {line.id}")
            line_keys.add(key)
        slack_id = slacks[0].id
        for building, bus in self.building_to_bus.items():
            if bus not in known:
                raise NetworkError(f"building {building} mapped to unknown bus {bus}")
            if bus == slack_id:
                raise NetworkError(f"building {building} cannot sit on the slack bus")
        if not 0 < self.power_factor <= 1:
            raise NetworkError("power factor must be in (0, 1]")
        self._check_connected()

    def _check_connected(self):
        if not self.buses:
            raise NetworkError("network has no buses")
        adjacency: dict[str, list[str]] = {bus.id: [] for bus in self.buses}
        for line in self.lines:
            adjacency[line.from_bus].append(line.to_bus)
            adjacency[line.to_bus].append(line.from_bus)
        seen = {self.slack_bus.id}
        frontier = [self.slack_bus.id]
        while frontier:
            nxt = []
            for node in frontier:
                for other in adjacency[node]:
                    if other not in seen:
                        seen.add(other)
                        nxt.append(other)
            frontier = nxt
        if len(seen) != len(self.buses):
            missing = sorted(set(b.id for b in self.buses) - seen)
            raise NetworkError(f"network is disconnected; unreachable buses: {missing}")

    @property
    def slack_bus(self) -> Bus:
        return next(bus for bus in self.buses if bus.kind == SLACK)

    @property
    def bus_ids(self) -> list[str]:
        return [bus.id for bus in self.buses]

    @property
    def line_ids(self) -> list[str]:
        return [line.id for line in self.lines]

    def bus_index(self, bus_id: str) -> int:
        return self.bus_ids.index(bus_id)


def load_network(path: str | Path) -> Network:
    """Parse and validate a network YAML document."""
    path = Path(path)
    if not path.exists():
        raise NetworkError(f"network file not found: {path}")
    doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise NetworkError(f"{path}: expected a mapping at top level")
    schema = doc.get("schema")
    if schema != NETWORK_SCHEMA:
        raise NetworkError(f"{path}: unsupported schema {schema!r}, expected {NETWORK_SCHEMA}")
    try:
        buses = tuple(
            Bus(id=str(b["id"]), nominal_voltage=float(b["nominal_voltage"]),
                kind=str(b.get("kind", LOAD)))
            for b in doc.get("buses", [])
        )
        lines = tuple(
            Line(
                from_bus=str(l["from"]),
                to_bus=str(l["to"]),
                resistance=float(l["resistance_ohm"]),
                reactance=float(l["reactance_ohm"]),
                max_current=float(l["max_current_a"]),
            )
            for l in doc.get("lines", [])
        )
        transformer = Transformer(rated_power_kw=float(
            doc.get("transformer", {}).get("rated_power_kw", 400.0)
        ))
    except KeyError as exc:
        raise NetworkError(f"{path}: missing field {exc}") from exc
    mapping = {str(k): str(v) for k, v in (doc.get("buildings") or {}).items()}
    return Network(
        buses=buses,
        lines=lines,
        transformer=transformer,
        building_to_bus=mapping,
        power_factor=float(doc.get("power_factor", 1.0)),
        base_power_kva=float(doc.get("base_power_kva", 100.0)),
    )


def save_network(net: Network, path: str | Path) -> None:
    doc = {
        "schema": NETWORK_SCHEMA,
        "base_power_kva": net.base_power_kva,
        "power_factor": net.power_factor,
        "transformer": {"rated_power_kw": net.transformer.rated_power_kw},
        "buses": [
            {"id": bus.id, "nominal_voltage": bus.nominal_voltage, "kind": bus.kind}
            for bus in net.buses
        ],
        "lines": [
            {
                "from": line.from_bus,
                "to": line.to_bus,
                "resistance_ohm": line.resistance,
                "reactance_ohm": line.reactance,
                "max_current_a": line.max_current,
            }
            for line in net.lines
        ],
        "buildings": dict(net.building_to_bus),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")


def injections_at_buses(
    designs: list[BuildingDesign], net: Network, step: int
) -> dict[str, float]:
    """Net active power per bus at one step, positive = consumption (kW)."""
    injections = {bus.id: 0.0 for bus in net.buses if bus.kind != SLACK}
    for design in designs:
        bus = net.building_to_bus.get(design.building_id)
        if bus is None:
            raise NetworkError(f"building {design.building_id} is not mapped to a bus")
        injections[bus] += float(design.import_kw[step] - design.export_kw[step])
    return injections
