"""Scenario files: a strict JSON schema that round-trips losslessly.

Explicit form: dims (int), servers (list of {id, capacity?}), tasks
(list of {id, demand, placement}), config (optional overrides of the
Config fields). A task's placement is a server id, or null while waiting;
a missing server capacity defaults to 100 points per dimension.

Generated form: workload (WorkloadSpec fields: n_servers, slots_per_server,
total_range, dims, seed, granularity) plus an optional config; the state is
materialized deterministically on load. Saving always writes the explicit
form. Unknown fields are rejected with their location either way.
"""

from __future__ import annotations

import dataclasses
import json
from importlib import resources
from pathlib import Path

from .errors import InfeasibleTotal, ParseError, SchemaError
from .model import Config, DatacenterState, ResourceVector, Server, Task, validate_state
from .workload import WorkloadSpec, generate_scenario

_CONFIG_KEYS = {f.name for f in dataclasses.fields(Config)}
_SERVER_KEYS = {"id", "capacity"}
_TASK_KEYS = {"id", "demand", "placement"}
_TOP_KEYS = {"dims", "servers", "tasks", "config"}
_WORKLOAD_KEYS = {f.name for f in dataclasses.fields(WorkloadSpec)}


def _require(condition: bool, where: str, message: str) -> None:
    if not condition:
        raise SchemaError(f"{where}: {message}")


def _number(value, where: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), where, "expected a number")
    return value


def _vector(raw, dims: int, where: str) -> ResourceVector:
    _require(isinstance(raw, list) and raw, where, "expected a non-empty list of numbers")
    values = tuple(_number(v, where) for v in raw)
    _require(len(values) == dims, where, f"expected {dims} dimensions, got {len(values)}")
    _require(all(v >= 0 for v in values), where, "components must be non-negative")
    return ResourceVector(values)


def _parse_config(raw, dims: int) -> Config:
    _require(isinstance(raw, dict), "config", "expected an object")
    unknown = set(raw) - _CONFIG_KEYS
    _require(not unknown, "config", f"unknown fields {sorted(unknown)}")
    if raw.get("target_order") in ("asc", "desc"):
        raw = dict(raw, target_order={"asc": "ascending", "desc": "descending"}[raw["target_order"]])
    try:
        config = Config(**raw)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"config: {exc}") from None
    _require(config.primary_dim < dims, "config.primary_dim", f"must be below dims={dims}")
    return config


def _from_workload(data: dict) -> tuple[DatacenterState, Config]:
    unknown = set(data) - {"workload", "config"}
    _require(not unknown, "scenario", f"a workload scenario allows only 'workload' and 'config', got {sorted(unknown)}")
    raw = data["workload"]
    _require(isinstance(raw, dict), "workload", "expected an object")
    unknown = set(raw) - _WORKLOAD_KEYS
    _require(not unknown, "workload", f"unknown fields {sorted(unknown)}")
    if isinstance(raw.get("total_range"), list):
        raw = dict(raw, total_range=tuple(raw["total_range"]))
    try:
        spec = WorkloadSpec(**raw)
        state = generate_scenario(spec)
    except (TypeError, ValueError, InfeasibleTotal) as exc:
        raise SchemaError(f"workload: {exc}") from None
    return state, _parse_config(data.get("config", {}), spec.dims)


def scenario_from_dict(data: dict) -> tuple[DatacenterState, Config]:
    _require(isinstance(data, dict), "scenario", "top level must be an object")
    if "workload" in data:
        return _from_workload(data)
    unknown = set(data) - _TOP_KEYS
    _require(not unknown, "scenario", f"unknown fields {sorted(unknown)}")
    for key in ("dims", "servers", "tasks"):
        _require(key in data, "scenario", f"missing required field {key!r}")

    dims = data["dims"]
    _require(isinstance(dims, int) and not isinstance(dims, bool) and dims >= 1, "dims", "expected an integer >= 1")

    _require(isinstance(data["servers"], list), "servers", "expected a list")
    servers: list[Server] = []
    server_ids: set[str] = set()
    for i, raw in enumerate(data["servers"]):
        where = f"servers[{i}]"
        _require(isinstance(raw, dict), where, "expected an object")
        unknown = set(raw) - _SERVER_KEYS
        _require(not unknown, where, f"unknown fields {sorted(unknown)}")
        _require(isinstance(raw.get("id"), str) and raw["id"], where, "id must be a non-empty string")
        _require(raw["id"] not in server_ids, where, f"duplicate server id {raw['id']!r}")
        server_ids.add(raw["id"])
        capacity = (
            _vector(raw["capacity"], dims, f"{where}.capacity")
            if "capacity" in raw
            else ResourceVector.uniform(100, dims)
        )
        servers.append(Server(raw["id"], capacity))

    _require(isinstance(data["tasks"], list), "tasks", "expected a list")
    tasks: dict[str, Task] = {}
    placements: dict[str, list[str]] = {}
    for i, raw in enumerate(data["tasks"]):
        where = f"tasks[{i}]"
        _require(isinstance(raw, dict), where, "expected an object")
        unknown = set(raw) - _TASK_KEYS
        _require(not unknown, where, f"unknown fields {sorted(unknown)}")
        _require(isinstance(raw.get("id"), str) and raw["id"], where, "id must be a non-empty string")
        _require(raw["id"] not in tasks, where, f"duplicate task id {raw['id']!r}")
        _require("demand" in raw, where, "missing required field 'demand'")
        demand = _vector(raw["demand"], dims, f"{where}.demand")
        placement = raw.get("placement")
        if placement is not None:
            _require(isinstance(placement, str), f"{where}.placement", "expected a server id or null")
            _require(placement in server_ids, f"{where}.placement", f"unknown server {placement!r}")
            placements.setdefault(placement, []).append(raw["id"])
        tasks[raw["id"]] = Task(raw["id"], demand, placement)

    placed = {
        s.id: tuple(placements.get(s.id, ())) for s in servers
    }
    servers = [dataclasses.replace(s, placed=placed[s.id]) for s in servers]

    config = _parse_config(data.get("config", {}), dims)

    state = DatacenterState(tuple(servers), tasks, dims)
    violations = validate_state(state)
    if violations:
        first = violations[0]
        raise SchemaError(f"state invalid: {first.kind} on {first.subject!r}: {first.detail}")
    return state, config


def scenario_to_dict(state: DatacenterState, config: Config | None = None) -> dict:
    # Placed tasks are listed server by server in placement order (the loader
    # rebuilds each server's task order from list order), then waiting tasks
    # sorted by id; this makes load(save(s)) == s for any valid state.
    ordered = [state.tasks[tid] for s in state.servers for tid in s.placed]
    ordered += sorted((t for t in state.tasks.values() if t.waiting), key=lambda t: t.id)
    return {
        "dims": state.dims,
        "servers": [{"id": s.id, "capacity": list(s.capacity)} for s in state.servers],
        "tasks": [
            {"id": t.id, "demand": list(t.demand), "placement": t.placement}
            for t in ordered
        ],
        "config": dataclasses.asdict(config if config is not None else Config()),
    }


def load_scenario(path) -> tuple[DatacenterState, Config]:
    """Parse and validate a scenario file; the returned state always passes
    validate_state. Raises ParseError on malformed JSON and SchemaError
    (with a location) on any schema or invariant violation."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return scenario_from_dict(data)


def save_scenario(state: DatacenterState, config: Config, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(state, config), indent=2) + "\n")


def fixture_path(name: str) -> Path:
    """Path of a bundled scenario fixture, e.g. fixture_path('table1')."""
    return Path(str(resources.files("serverpack") / "fixtures" / f"{name}.json"))
