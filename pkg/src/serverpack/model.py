"""Domain types for datacenter states, plus plan application and validation.

All values are immutable: operations return new states and never mutate
their inputs, so plans can be replayed and the result compared
field-for-field against what a planner reported.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Mapping

from .errors import CapacityViolation, IntermediateCapacityViolation, InvalidMove

DEFAULT_CAPACITY = 100


@dataclass(frozen=True)
class ResourceVector:
    """Per-dimension quantities in utilization points (dim 0 = CPU, dim 1 = memory)."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError("resource vector needs at least one dimension")
        for v in self.values:
            if v < 0:
                raise ValueError(f"negative component in resource vector: {self.values}")

    @classmethod
    def of(cls, *values: float) -> "ResourceVector":
        return cls(tuple(values))

    @classmethod
    def zeros(cls, dims: int) -> "ResourceVector":
        return cls((0,) * dims)

    @classmethod
    def uniform(cls, value: float, dims: int) -> "ResourceVector":
        return cls((value,) * dims)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, dim: int) -> float:
        return self.values[dim]

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)


@dataclass(frozen=True)
class Task:
    id: str
    demand: ResourceVector
    placement: str | None = None  # server id, or None while waiting

    @property
    def waiting(self) -> bool:
        return self.placement is None


@dataclass(frozen=True)
class Server:
    """`placed` preserves insertion order so reports reproduce task columns."""

    id: str
    capacity: ResourceVector
    placed: tuple[str, ...] = ()


@dataclass(frozen=True)
class Config:
    """Thresholds, weights, and policy switches for planning runs.

    Thresholds are expressed against a 100-point capacity and scale
    proportionally for other capacities: a server of capacity C may carry
    at most C * threshold / 100 in each dimension.
    """

    primary_dim: int = 0
    pre_max: float = 70
    post_max: float = 100
    cost_per_point_moved: float = 1
    benefit_per_server_released: float = 100
    tie_break: str = "lowest-index"
    seed: int = 0
    target_order: str = "ascending"

    def __post_init__(self) -> None:
        if not 0 < self.pre_max <= self.post_max <= 100:
            raise ValueError(
                f"thresholds must satisfy 0 < pre_max <= post_max <= 100, "
                f"got pre_max={self.pre_max}, post_max={self.post_max}"
            )
        if self.primary_dim < 0:
            raise ValueError("primary_dim must be >= 0")
        if self.cost_per_point_moved < 0 or self.benefit_per_server_released < 0:
            raise ValueError("cost/benefit weights must be non-negative")
        if self.tie_break != "lowest-index":
            raise ValueError(f"unsupported tie_break policy: {self.tie_break!r}")
        if self.target_order not in ("ascending", "descending"):
            raise ValueError(f"target_order must be 'ascending' or 'descending', got {self.target_order!r}")


@dataclass(frozen=True)
class MigrationMove:
    task: str
    source: str
    target: str

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValueError(f"move of {self.task!r} has identical source and target {self.source!r}")


@dataclass(frozen=True)
class Allocation:
    """Placement of a previously waiting task."""

    task: str
    server: str


@dataclass(frozen=True)
class Plan:
    """Replayable migration plan: moves first, then allocations."""

    moves: tuple[MigrationMove, ...] = ()
    allocations: tuple[Allocation, ...] = ()


@dataclass(frozen=True)
class DatacenterState:
    servers: tuple[Server, ...]
    tasks: Mapping[str, Task]
    dims: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "servers", tuple(self.servers))
        object.__setattr__(self, "tasks", dict(self.tasks))

    def server(self, server_id: str) -> Server:
        for s in self.servers:
            if s.id == server_id:
                return s
        raise KeyError(server_id)

    def server_index(self, server_id: str) -> int:
        for i, s in enumerate(self.servers):
            if s.id == server_id:
                return i
        raise KeyError(server_id)

    def task(self, task_id: str) -> Task:
        return self.tasks[task_id]

    def placed_tasks(self, server_id: str) -> tuple[Task, ...]:
        return tuple(self.tasks[tid] for tid in self.server(server_id).placed)

    def waiting_tasks(self) -> tuple[Task, ...]:
        return tuple(t for _, t in sorted(self.tasks.items()) if t.waiting)


@dataclass(frozen=True)
class Violation:
    """A broken state invariant; violations are data, not failures."""

    kind: str
    subject: str
    detail: str


def server_load(state: DatacenterState, server_id: str) -> tuple[float, ...]:
    """Per-dimension sum of demands placed on the server."""
    load = [0] * state.dims
    for task_id in state.server(server_id).placed:
        demand = state.tasks[task_id].demand
        for d in range(state.dims):
            load[d] += demand[d]
    return tuple(load)


def free_capacity(state: DatacenterState, server_id: str) -> ResourceVector:
    """Capacity minus placed demands, per dimension.

    Raises CapacityViolation if the placed demands exceed capacity in any
    dimension (a corrupt state).
    """
    server = state.server(server_id)
    load = server_load(state, server_id)
    free = tuple(server.capacity[d] - load[d] for d in range(state.dims))
    if any(f < 0 for f in free):
        raise CapacityViolation(f"server {server_id!r} carries {load} over capacity {tuple(server.capacity)}")
    return ResourceVector(free)


def fits_under(state: DatacenterState, server_id: str, demand: ResourceVector, threshold: float) -> bool:
    """True when placing `demand` keeps every dimension within the threshold.

    The cap in dimension d is capacity[d] * threshold / 100.
    """
    server = state.server(server_id)
    load = server_load(state, server_id)
    for d in range(state.dims):
        if load[d] + demand[d] > server.capacity[d] * threshold / 100:
            return False
    return True


def place_task(state: DatacenterState, task_id: str, server_id: str) -> DatacenterState:
    """Structural placement: detach the task from its current server (if any)
    and append it to `server_id`. No threshold checks."""
    task = state.tasks[task_id]
    state.server(server_id)
    servers = []
    for s in state.servers:
        placed = s.placed
        if task.placement == s.id:
            placed = tuple(t for t in placed if t != task_id)
        if s.id == server_id:
            placed = placed + (task_id,)
        servers.append(replace(s, placed=placed) if placed is not s.placed else s)
    tasks = dict(state.tasks)
    tasks[task_id] = replace(task, placement=server_id)
    return replace(state, servers=tuple(servers), tasks=tasks)


def apply_plan(state: DatacenterState, plan: Plan, config: Config | None = None) -> DatacenterState:
    """Replay a plan: moves in order, then allocations in order.

    Every step is checked against config.post_max (full capacity when no
    config is given); the input state is never modified.
    """
    cfg = config if config is not None else Config()
    current = state
    for move in plan.moves:
        task = current.tasks.get(move.task)
        if task is None:
            raise InvalidMove(f"move references unknown task {move.task!r}")
        if task.placement != move.source:
            raise InvalidMove(f"task {move.task!r} is not on {move.source!r} (currently {task.placement!r})")
        try:
            current.server(move.target)
        except KeyError:
            raise InvalidMove(f"move references unknown server {move.target!r}") from None
        if not fits_under(current, move.target, task.demand, cfg.post_max):
            raise IntermediateCapacityViolation(
                f"moving {move.task!r} onto {move.target!r} exceeds threshold {cfg.post_max}"
            )
        current = place_task(current, move.task, move.target)
    for alloc in plan.allocations:
        task = current.tasks.get(alloc.task)
        if task is None:
            raise InvalidMove(f"allocation references unknown task {alloc.task!r}")
        if not task.waiting:
            raise InvalidMove(f"task {alloc.task!r} is already placed on {task.placement!r}")
        try:
            current.server(alloc.server)
        except KeyError:
            raise InvalidMove(f"allocation references unknown server {alloc.server!r}") from None
        if not fits_under(current, alloc.server, task.demand, cfg.post_max):
            raise IntermediateCapacityViolation(
                f"allocating {alloc.task!r} onto {alloc.server!r} exceeds threshold {cfg.post_max}"
            )
        current = place_task(current, alloc.task, alloc.server)
    return current


def validate_state(state: DatacenterState) -> list[Violation]:
    """Report every broken invariant in a deterministic order.

    An empty list means the state is valid.
    """
    violations: list[Violation] = []
    seen_servers: set[str] = set()
    placements: dict[str, list[str]] = {}

    for server in state.servers:
        if server.id in seen_servers:
            violations.append(Violation("duplicate-server-id", server.id, "server id appears more than once"))
        seen_servers.add(server.id)
        if len(server.capacity) != state.dims:
            violations.append(
                Violation("dimension-mismatch", server.id,
                          f"capacity has {len(server.capacity)} dimensions, state declares {state.dims}")
            )
            continue
        load = [0] * state.dims
        for task_id in server.placed:
            placements.setdefault(task_id, []).append(server.id)
            task = state.tasks.get(task_id)
            if task is None:
                violations.append(Violation("unknown-task", task_id, f"placed on {server.id!r} but not in the task map"))
                continue
            if len(task.demand) == state.dims:
                for d in range(state.dims):
                    load[d] += task.demand[d]
        for d in range(state.dims):
            if load[d] > server.capacity[d]:
                violations.append(
                    Violation("capacity-violation", server.id,
                              f"dimension {d} carries {load[d]} over capacity {server.capacity[d]}")
                )

    max_capacity = [
        max((s.capacity[d] for s in state.servers if len(s.capacity) == state.dims), default=0)
        for d in range(state.dims)
    ]
    for task_id in sorted(state.tasks):
        task = state.tasks[task_id]
        if len(task.demand) != state.dims:
            violations.append(
                Violation("dimension-mismatch", task_id,
                          f"demand has {len(task.demand)} dimensions, state declares {state.dims}")
            )
            continue
        on_servers = placements.get(task_id, [])
        if len(on_servers) > 1:
            violations.append(
                Violation("duplicate-placement", task_id, f"placed on {len(on_servers)} servers: {on_servers}")
            )
        if task.placement is not None and task.placement not in seen_servers:
            violations.append(Violation("unknown-server", task_id, f"placement {task.placement!r} does not exist"))
        elif task.placement is None and on_servers:
            violations.append(Violation("inconsistent-placement", task_id, f"waiting but listed on {on_servers}"))
        elif task.placement is not None and task.placement not in on_servers:
            violations.append(
                Violation("inconsistent-placement", task_id,
                          f"placement says {task.placement!r} but server lists disagree: {on_servers}")
            )
        for d in range(state.dims):
            if task.demand[d] > max_capacity[d]:
                violations.append(
                    Violation("oversized-task", task_id,
                              f"demand {task.demand[d]} in dimension {d} exceeds every server capacity")
                )
    return violations
