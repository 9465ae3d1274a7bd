"""Scenario types, worker selection and scenario file I/O.

A scenario file is YAML with the sections ``grid``, ``cells``, ``uavs``,
``radio``, ``game`` and an optional ``commtime`` block of sampling ranges.
Data sizes are written in megabytes (1 MB = 8e6 bits); everything else uses
SI units (m, s, W, J, Hz) with gains in dB and noise in dBm/Hz.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

MB_BITS = 8_000_000


class ScenarioError(ValueError):
    """Raised when a scenario document cannot be parsed or fails validation."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class PaymentRule(str, Enum):
    BID_PRICE = "BidPrice"
    SECOND_PRICE = "SecondPrice"


@dataclass(frozen=True)
class WorkerSpec:
    id: int
    cell_id: int
    sampling_rate: float


@dataclass(frozen=True)
class CellSpec:
    id: int
    position: tuple[float, float]
    price_per_importance: float
    importance_override: float | None = None
    workers: tuple[WorkerSpec, ...] = ()
    # Number of workers the UAV talks to each iteration. Defaults to the
    # number of selected workers; needed when the importance is overridden.
    worker_count: int | None = None


@dataclass(frozen=True)
class Uav:
    id: int
    depot: tuple[float, float]
    energy_capacity: float
    velocity: float = 10.0
    flight_power: float = 1.0
    flight_weight_depot: float = 1.0
    cooperation_cost: float = 2.0
    cpu_cycles_per_aggregation: float = 2e9
    cpu_frequency: float = 1e8
    cpu_coefficient: float = 1e-26
    bandwidth: float = 400e3
    tx_power: float = 1.0
    rx_power: float = 0.5
    channel_gain_db: float = 5.0
    hover_energy_per_iteration: float = 5.0
    circuit_energy_per_iteration: float = 5.0
    energy_price: float = 0.03


@dataclass(frozen=True)
class RadioEnv:
    noise_psd_dbm_per_hz: float = -174.0
    uplink_interference: float = 0.0
    owner_bandwidth: float = 5e6
    owner_tx_power: float = 10.0
    global_model_size_mb: float = 1500.0
    cell_aggregate_size_mb: float = 500.0
    worker_update_size_mb: float = 100.0
    worker_bandwidth: float = 150e3
    worker_tx_power: float = 0.01
    worker_channel_gain_db: float = 2.0
    cell_flight_weight: float = 1.0

    @property
    def global_model_size(self) -> float:
        """z_BS in bits."""
        return self.global_model_size_mb * MB_BITS

    @property
    def cell_aggregate_size(self) -> float:
        """z^c in bits."""
        return self.cell_aggregate_size_mb * MB_BITS

    @property
    def worker_update_size(self) -> float:
        """z^w in bits."""
        return self.worker_update_size_mb * MB_BITS


@dataclass(frozen=True)
class GameParams:
    required_iterations: int = 20
    importance_threshold: float = 1.0
    weight_importance: float = 0.5
    weight_latency: float = 0.5
    latency_scale: float = 1000.0
    payment_rule: PaymentRule = PaymentRule.BID_PRICE
    rng_seed: int = 0
    min_travel_time: float = 1e-6


@dataclass(frozen=True)
class CommTimeRanges:
    """Uniform sampling ranges (low, high) for the communication-time draws."""

    worker_bandwidth: tuple[float, float] = (50e3, 150e3)
    worker_tx_power: tuple[float, float] = (1e-3, 10e-3)
    worker_channel_gain_db: tuple[float, float] = (2.0, 8.0)
    uav_bandwidth: tuple[float, float] = (200e3, 400e3)
    uav_tx_power: tuple[float, float] = (0.5, 5.0)
    uav_channel_gain_db: tuple[float, float] = (5.0, 25.0)


@dataclass(frozen=True)
class ScenarioConfig:
    grid_size: tuple[float, float]
    cells: tuple[CellSpec, ...]
    uavs: tuple[Uav, ...]
    radio: RadioEnv = field(default_factory=RadioEnv)
    game: GameParams = field(default_factory=GameParams)
    commtime: CommTimeRanges = field(default_factory=CommTimeRanges)

    def cell(self, cell_id: int) -> CellSpec:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(f"no cell with id {cell_id}")

    def uav(self, uav_id: int) -> Uav:
        for u in self.uavs:
            if u.id == uav_id:
                return u
        raise KeyError(f"no UAV with id {uav_id}")

    @property
    def uav_ids(self) -> tuple[int, ...]:
        return tuple(sorted(u.id for u in self.uavs))

    @property
    def cell_ids(self) -> tuple[int, ...]:
        return tuple(sorted(c.id for c in self.cells))

    def with_game(self, **changes) -> ScenarioConfig:
        return replace(self, game=replace(self.game, **changes))

    def with_uavs(self, **changes) -> ScenarioConfig:
        """Apply the same field overrides to every UAV."""
        return replace(self, uavs=tuple(replace(u, **changes) for u in self.uavs))


# --- worker importance -----------------------------------------------------

_LOG20 = math.log10(20.0)


def worker_importance(sampling_rate: float) -> float:
    """Concave importance of a worker sampling at ``sampling_rate`` samples/s."""
    if sampling_rate < 0 or math.isnan(sampling_rate):
        raise ValueError(f"sampling_rate must be >= 0, got {sampling_rate}")
    return math.log10(sampling_rate + 1.0) / _LOG20


def select_workers(cell: CellSpec, threshold: float) -> list[WorkerSpec]:
    """Workers whose importance strictly exceeds ``threshold``, in input order."""
    return [w for w in cell.workers if worker_importance(w.sampling_rate) > threshold]


def cell_importance(cell: CellSpec, threshold: float) -> float:
    if cell.importance_override is not None:
        return cell.importance_override
    return sum(worker_importance(w.sampling_rate) for w in select_workers(cell, threshold))


def served_worker_count(cell: CellSpec, threshold: float) -> int:
    if cell.worker_count is not None:
        return cell.worker_count
    return len(select_workers(cell, threshold))


# --- validation ------------------------------------------------------------


def _in_grid(pos, grid) -> bool:
    return 0.0 <= pos[0] <= grid[0] and 0.0 <= pos[1] <= grid[1]


def validate_scenario(cfg: ScenarioConfig) -> list[str]:
    """Return every invariant violation as ``"field.path: message"``."""
    errs: list[str] = []
    gw, gh = cfg.grid_size
    if not (gw > 0 and gh > 0):
        errs.append(f"grid: width and height must be > 0, got {cfg.grid_size}")

    seen: set[int] = set()
    for k, c in enumerate(cfg.cells):
        p = f"cells[{k}]"
        if c.id in seen:
            errs.append(f"{p}.id: duplicate cell id {c.id}")
        seen.add(c.id)
        if not _in_grid(c.position, cfg.grid_size):
            errs.append(f"{p}.position: {c.position} outside grid {cfg.grid_size}")
        if c.price_per_importance < 0:
            errs.append(f"{p}.price_per_importance: must be >= 0")
        if c.importance_override is not None and c.importance_override < 0:
            errs.append(f"{p}.importance_override: must be >= 0")
        if c.importance_override is None and not c.workers:
            errs.append(f"{p}.workers: required when importance_override is absent")
        if c.worker_count is not None and c.worker_count < 0:
            errs.append(f"{p}.worker_count: must be >= 0")
        wids: set[int] = set()
        for j, w in enumerate(c.workers):
            if w.id in wids:
                errs.append(f"{p}.workers[{j}].id: duplicate worker id {w.id}")
            wids.add(w.id)
            if not w.sampling_rate > 0:
                errs.append(f"{p}.workers[{j}].sampling_rate: must be > 0")
            if w.cell_id != c.id:
                errs.append(f"{p}.workers[{j}].cell_id: {w.cell_id} != cell id {c.id}")
    if not cfg.cells:
        errs.append("cells: at least one cell is required")

    seen = set()
    for k, u in enumerate(cfg.uavs):
        p = f"uavs[{k}]"
        if u.id in seen:
            errs.append(f"{p}.id: duplicate UAV id {u.id}")
        seen.add(u.id)
        if not _in_grid(u.depot, cfg.grid_size):
            errs.append(f"{p}.depot: {u.depot} outside grid {cfg.grid_size}")
        for name in ("energy_capacity", "velocity", "bandwidth", "tx_power", "rx_power"):
            if not getattr(u, name) > 0:
                errs.append(f"{p}.{name}: must be > 0")
        for name in ("cooperation_cost", "flight_power", "flight_weight_depot",
                     "cpu_cycles_per_aggregation", "cpu_frequency", "cpu_coefficient",
                     "hover_energy_per_iteration", "circuit_energy_per_iteration",
                     "energy_price"):
            if getattr(u, name) < 0:
                errs.append(f"{p}.{name}: must be >= 0")
    if not cfg.uavs:
        errs.append("uavs: at least one UAV is required")

    r = cfg.radio
    for name in ("owner_bandwidth", "owner_tx_power", "global_model_size_mb",
                 "cell_aggregate_size_mb", "worker_update_size_mb", "worker_bandwidth",
                 "worker_tx_power"):
        if not getattr(r, name) > 0:
            errs.append(f"radio.{name}: must be > 0")
    if r.uplink_interference < 0:
        errs.append("radio.uplink_interference: must be >= 0")
    if r.cell_flight_weight < 0:
        errs.append("radio.cell_flight_weight: must be >= 0")

    g = cfg.game
    if g.required_iterations < 1:
        errs.append("game.required_iterations: must be >= 1")
    if g.importance_threshold < 0:
        errs.append("game.importance_threshold: must be >= 0")
    if g.weight_importance < 0 or g.weight_latency < 0:
        errs.append("game.weight_importance/weight_latency: must be >= 0")
    if not g.latency_scale > 0:
        errs.append("game.latency_scale: must be > 0")
    if not g.min_travel_time > 0:
        errs.append("game.min_travel_time: must be > 0")
    if not 0 <= g.rng_seed < 2**64:
        errs.append("game.rng_seed: must fit in an unsigned 64-bit integer")

    for f in fields(CommTimeRanges):
        lo, hi = getattr(cfg.commtime, f.name)
        if lo > hi:
            errs.append(f"commtime.{f.name}: low {lo} > high {hi}")
        if f.name.endswith(("bandwidth", "tx_power")) and not lo > 0:
            errs.append(f"commtime.{f.name}: must be > 0")
    return errs


# --- parsing ---------------------------------------------------------------


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"{path}: expected a pair [x, y], got {value!r}")
    return (float(value[0]), float(value[1]))


def _build(cls, data: dict, path: str, convert: dict[str, Any] | None = None):
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ScenarioError(f"{path}: unknown field(s) {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        conv = (convert or {}).get(key)
        try:
            kwargs[key] = conv(value, f"{path}.{key}") if conv else value
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"{path}.{key}: {exc}") from exc
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _num(value, path):
    # YAML 1.1 reads forms like 1e-26 as strings
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}: expected an integer, got {value!r}")
    return value


def _numeric_fields(cls, ints=()):
    conv = {}
    for f in fields(cls):
        if f.name in ints:
            conv[f.name] = _int
        elif f.type in ("float", "float | None"):
            conv[f.name] = _num
    return conv


def _cell(data, path) -> CellSpec:
    conv = _numeric_fields(CellSpec, ints=("id", "worker_count"))
    conv["position"] = _pair
    conv["importance_override"] = lambda v, p: None if v is None else _num(v, p)
    conv["worker_count"] = lambda v, p: None if v is None else _int(v, p)

    def workers(value, wpath):
        if not isinstance(value, list):
            raise ScenarioError(f"{wpath}: expected a list")
        out = []
        for j, w in enumerate(value):
            w = dict(w) if isinstance(w, dict) else w
            if isinstance(w, dict):
                w.setdefault("cell_id", data.get("id"))
            out.append(_build(WorkerSpec, w, f"{wpath}[{j}]",
                              {"id": _int, "cell_id": _int, "sampling_rate": _num}))
        return tuple(out)

    conv["workers"] = workers
    return _build(CellSpec, data, path, conv)


def _uav(data, path) -> Uav:
    conv = _numeric_fields(Uav, ints=("id",))
    conv["depot"] = _pair
    return _build(Uav, data, path, conv)


def _game(data, path) -> GameParams:
    conv = _numeric_fields(GameParams, ints=("required_iterations", "rng_seed"))

    def rule(value, p):
        try:
            return PaymentRule(value)
        except ValueError:
            raise ScenarioError(
                f"{p}: expected one of {[r.value for r in PaymentRule]}, got {value!r}") from None

    conv["payment_rule"] = rule
    return _build(GameParams, data, path, conv)


def _commtime(data, path) -> CommTimeRanges:
    return _build(CommTimeRanges, data, path, {f.name: _pair for f in fields(CommTimeRanges)})


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ScenarioError("document: expected a mapping at top level")
    unknown = sorted(set(doc) - {"grid", "cells", "uavs", "radio", "game", "commtime"})
    if unknown:
        raise ScenarioError(f"document: unknown section(s) {', '.join(unknown)}")
    for section in ("grid", "cells", "uavs"):
        if section not in doc:
            raise ScenarioError(f"{section}: required section missing")
    grid = doc["grid"]
    if isinstance(grid, dict):
        grid_size = (_num(grid.get("width"), "grid.width"), _num(grid.get("height"), "grid.height"))
    else:
        grid_size = _pair(grid, "grid")
    if not isinstance(doc["cells"], list):
        raise ScenarioError("cells: expected a list")
    if not isinstance(doc["uavs"], list):
        raise ScenarioError("uavs: expected a list")
    cfg = ScenarioConfig(
        grid_size=grid_size,
        cells=tuple(_cell(c, f"cells[{k}]") for k, c in enumerate(doc["cells"])),
        uavs=tuple(_uav(u, f"uavs[{k}]") for k, u in enumerate(doc["uavs"])),
        radio=_build(RadioEnv, doc.get("radio") or {}, "radio", _numeric_fields(RadioEnv)),
        game=_game(doc.get("game") or {}, "game"),
        commtime=_commtime(doc.get("commtime") or {}, "commtime"),
    )
    problems = validate_scenario(cfg)
    if problems:
        raise ScenarioError(problems)
    return cfg


def load_scenario(source: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario from a YAML string or a file path.

    Strings containing a newline are treated as document text. The name
    ``paper_baseline`` resolves to the bundled baseline scenario.
    """
    if isinstance(source, Path) or "\n" not in str(source):
        text = _read_source(str(source))
    else:
        text = str(source)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ScenarioError(f"parse error at {where}{problem}") from exc
    return scenario_from_dict(doc)


def _read_source(name: str) -> str:
    if name in ("paper_baseline", "paper_baseline.yaml") and not Path(name).exists():
        return resources.files("uavcoal").joinpath("data/paper_baseline.yaml").read_text()
    return Path(name).read_text()


def paper_baseline() -> ScenarioConfig:
    return load_scenario("paper_baseline")


# --- serialization ---------------------------------------------------------


def _plain(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, tuple):
        return [_plain(v) for v in obj]
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    return obj


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    cells = []
    for c in cfg.cells:
        d = _plain(asdict(c))
        for w in d["workers"]:
            w.pop("cell_id")
        cells.append(d)
    return {
        "grid": list(cfg.grid_size),
        "cells": cells,
        "uavs": [_plain(asdict(u)) for u in cfg.uavs],
        "radio": _plain(asdict(cfg.radio)),
        "game": _plain(asdict(cfg.game)),
        "commtime": _plain(asdict(cfg.commtime)),
    }


def dump_scenario(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(scenario_to_dict(cfg), sort_keys=False, default_flow_style=None)
