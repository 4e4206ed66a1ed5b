"""Scenario description and its JSON file format.

Keys (all optional except ``grid``)::

    grid               {"k", "d", "delta", "r"} or {"delta", "r"} (cells sized from range)
    nodes              node count N                                  [default 50]
    placement          "uniform" | "per_cell"                        ["uniform"]
    per_cell           nodes per cell when placement = "per_cell"    [1]
    positions          explicit [[px, py], ...]; overrides nodes/placement
    mobility           {"model": "none"} or {"model": "random_waypoint",
                        "speed_min", "speed_max", "pause", "tick"}
    beacon_period      seconds                                       [1.0]
    tau                one-hop delay, seconds                        [0.008]
    tx_cost, rx_cost   integer energy units per transmission/reception [1, 0]
    energy_min, energy_max  initial energy range, integers          [1000, 2000]
    loss               independent per-receiver loss probability     [0.0]
    queue_mode         one transmission per node per tau             [false]
    location_bootstrap "oracle" (tables seeded with true cells) | "broadcast"
    traffic            [{"time", "source", "dest", "m", "n", "size"}, ...]
    random_traffic     {"count", "start", "spacing", "m", "n", "size"}
    seed               integer                                       [1]
    duration           seconds                                       [10.0]
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

from ..grid import GridConfig, SQRT2


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Mobility:
    model: str = "none"
    speed_min: float = 0.0
    speed_max: float = 0.0
    pause: float = 0.0
    tick: float = 0.1

    @property
    def enabled(self) -> bool:
        return self.model != "none"


@dataclass(frozen=True)
class Flow:
    time: float
    source: int
    dest: int
    m: int = 1
    n: int = 8
    size: int = 1024


@dataclass(frozen=True)
class RandomTraffic:
    count: int
    start: float = 3.0
    spacing: float = 0.5
    m: int = 8
    n: int = 8
    size: int = 1024


@dataclass(frozen=True)
class Scenario:
    grid: GridConfig
    nodes: int = 50
    placement: str = "uniform"
    per_cell: int = 1
    positions: Optional[tuple] = None
    mobility: Mobility = field(default_factory=Mobility)
    beacon_period: float = 1.0
    tau: float = 0.008
    tx_cost: int = 1
    rx_cost: int = 0
    energy_min: int = 1000
    energy_max: int = 2000
    loss: float = 0.0
    queue_mode: bool = False
    location_bootstrap: str = "oracle"
    traffic: tuple = ()
    random_traffic: Optional[RandomTraffic] = None
    seed: int = 1
    duration: float = 10.0

    def __post_init__(self) -> None:
        if self.positions is not None:
            object.__setattr__(self, "nodes", len(self.positions))
        elif self.placement == "per_cell":
            object.__setattr__(self, "nodes", self.per_cell * self.grid.k ** 2)
        self.validate()

    def validate(self) -> None:
        def need(ok: bool, key: str, msg: str) -> None:
            if not ok:
                raise ScenarioError(f"{key}: {msg}")

        need(self.nodes >= 1, "nodes", "need at least one node")
        need(self.placement in ("uniform", "per_cell"), "placement", f"unknown rule {self.placement!r}")
        need(self.per_cell >= 1, "per_cell", "must be >= 1")
        need(self.tau > 0, "tau", "must be positive")
        need(self.beacon_period > 0, "beacon_period", "must be positive")
        need(self.duration >= 0, "duration", "must be non-negative")
        need(0.0 <= self.loss <= 1.0, "loss", "must lie in [0, 1]")
        need(self.tx_cost >= 0 and self.rx_cost >= 0, "tx_cost", "costs must be non-negative")
        need(0 <= self.energy_min <= self.energy_max, "energy_min", "need 0 <= energy_min <= energy_max")
        need(self.location_bootstrap in ("oracle", "broadcast"), "location_bootstrap",
             f"unknown mode {self.location_bootstrap!r}")
        mob = self.mobility
        need(mob.model in ("none", "random_waypoint"), "mobility.model", f"unknown model {mob.model!r}")
        need(0 <= mob.speed_min <= mob.speed_max, "mobility.speed_min", "need 0 <= speed_min <= speed_max")
        need(mob.pause >= 0, "mobility.pause", "must be non-negative")
        need(mob.tick > 0, "mobility.tick", "must be positive")
        if self.positions is not None:
            for i, (px, py) in enumerate(self.positions):
                need(0 <= px <= self.grid.delta and 0 <= py <= self.grid.delta,
                     f"positions[{i}]", "outside the region")
        for i, f in enumerate(self.traffic):
            for attr in ("source", "dest"):
                need(0 <= getattr(f, attr) < self.nodes, f"traffic[{i}].{attr}", "no such node")
            need(f.m >= 1 and f.n >= 1, f"traffic[{i}].m", "m and n must be >= 1")
            need(f.time >= 0, f"traffic[{i}].time", "must be non-negative")
        if self.random_traffic is not None:
            need(self.nodes >= 2, "random_traffic", "needs at least two nodes")
            need(self.random_traffic.count >= 0, "random_traffic.count", "must be non-negative")

    def with_changes(self, **changes: Any) -> "Scenario":
        return replace(self, **changes)


def _build(cls, data: Any, key: str):
    if not isinstance(data, dict):
        raise ScenarioError(f"{key}: expected a mapping")
    known = {f.name for f in fields(cls)}
    for k in data:
        if k not in known:
            raise ScenarioError(f"{key}.{k}: unknown key")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ScenarioError(f"{key}: {exc}") from None


def _grid(data: Any) -> GridConfig:
    if not isinstance(data, dict):
        raise ScenarioError("grid: expected a mapping")
    unknown = set(data) - {"k", "d", "delta", "r"}
    if unknown:
        raise ScenarioError(f"grid.{sorted(unknown)[0]}: unknown key")
    try:
        if "k" in data or "d" in data:
            k = int(data["k"])
            d = float(data["d"])
            delta = float(data.get("delta", k * d))
            r = float(data.get("r", 2 * SQRT2 * d))
            return GridConfig(k=k, d=d, delta=delta, r=r)
        return GridConfig.from_range(float(data["delta"]), float(data["r"]))
    except KeyError as exc:
        raise ScenarioError(f"grid.{exc.args[0]}: missing") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"grid: {exc}") from None


_NUMERIC = {
    "nodes": int, "per_cell": int, "beacon_period": float, "tau": float, "tx_cost": int,
    "rx_cost": int, "energy_min": int, "energy_max": int, "loss": float, "seed": int,
    "duration": float,
}


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a mapping at top level")
    data = copy.deepcopy(data)
    known = {f.name for f in fields(Scenario)}
    for k in data:
        if k not in known:
            raise ScenarioError(f"{k}: unknown key")
    if "grid" not in data:
        raise ScenarioError("grid: missing")
    kwargs: dict[str, Any] = {"grid": _grid(data.pop("grid"))}
    for key, value in data.items():
        if key in _NUMERIC:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ScenarioError(f"{key}: expected a number, got {value!r}")
            if _NUMERIC[key] is int and int(value) != value:
                raise ScenarioError(f"{key}: expected an integer, got {value!r}")
            kwargs[key] = _NUMERIC[key](value)
        elif key == "mobility":
            kwargs[key] = _build(Mobility, value, "mobility")
        elif key == "traffic":
            if not isinstance(value, list):
                raise ScenarioError("traffic: expected a list")
            kwargs[key] = tuple(_build(Flow, f, f"traffic[{i}]") for i, f in enumerate(value))
        elif key == "random_traffic":
            kwargs[key] = None if value is None else _build(RandomTraffic, value, "random_traffic")
        elif key == "positions":
            try:
                kwargs[key] = tuple((float(px), float(py)) for px, py in value)
            except (TypeError, ValueError):
                raise ScenarioError("positions: expected a list of [px, py] pairs") from None
        elif key == "queue_mode":
            if not isinstance(value, bool):
                raise ScenarioError(f"queue_mode: expected true/false, got {value!r}")
            kwargs[key] = value
        else:
            kwargs[key] = value
    return Scenario(**kwargs)


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return scenario_from_dict(data)
