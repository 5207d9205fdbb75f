"""First-fit and best-fit placement of waiting tasks.

Best fit prefers a server whose free capacity in the primary dimension
equals the demand exactly, then falls back to the feasible server with the
least leftover slack. Selection and ordering look at the primary dimension
(plus the next one for tie-breaks); feasibility always checks every
dimension against the active threshold. Ties between servers go to the
lowest index in the datacenter's declared order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import NoFit
from .model import Config, DatacenterState, Task, fits_under, free_capacity, place_task

FIT_EXACT = "exact"
FIT_CLOSEST = "closest"
FIT_FIRST = "first"

PACK_ALGORITHMS = ("first-fit", "best-fit")


@dataclass(frozen=True)
class PlacementDecision:
    task: str
    server: str
    fit_kind: str


def sort_tasks_desc(tasks: Iterable[Task], k: int) -> list[Task]:
    """Sort by demand in dimension k, descending.

    Ties break on demand in dimension k+1 descending (when it exists),
    then on task id ascending, so the order is total and stable.
    """

    def key(task: Task):
        demand = task.demand
        second = -demand[k + 1] if k + 1 < len(demand) else 0
        return (-demand[k], second, task.id)

    return sorted(tasks, key=key)


def sort_tasks_asc(tasks: Iterable[Task], k: int) -> list[Task]:
    """Ascending companion order: demand[k], then demand[k+1], then id."""

    def key(task: Task):
        demand = task.demand
        second = demand[k + 1] if k + 1 < len(demand) else 0
        return (demand[k], second, task.id)

    return sorted(tasks, key=key)


def find_exact_fit(
    state: DatacenterState,
    task: Task,
    threshold: float,
    k: int = 0,
    exclude: Sequence[str] = (),
) -> str | None:
    """Lowest-index server whose free capacity in dimension k equals the
    demand exactly and which fits the task in all dimensions under the
    threshold; None when no such server exists."""
    for server in state.servers:
        if server.id in exclude:
            continue
        if free_capacity(state, server.id)[k] == task.demand[k] and fits_under(
            state, server.id, task.demand, threshold
        ):
            return server.id
    return None


def find_closest_fit(
    state: DatacenterState,
    task: Task,
    threshold: float,
    k: int = 0,
    exclude: Sequence[str] = (),
) -> str | None:
    """Feasible server minimizing free[k] - demand[k]; ties go to the lowest
    index; None when nothing fits under the threshold."""
    best_id: str | None = None
    best_slack: float | None = None
    for server in state.servers:
        if server.id in exclude:
            continue
        if not fits_under(state, server.id, task.demand, threshold):
            continue
        slack = free_capacity(state, server.id)[k] - task.demand[k]
        if best_slack is None or slack < best_slack:
            best_id, best_slack = server.id, slack
    return best_id


def best_fit_allocate(state: DatacenterState, task: Task, config: Config) -> PlacementDecision:
    """Exact fit if one exists, else closest fit, under config.pre_max.

    Returns the decision without mutating the state; raises NoFit when no
    server can take the task, which hands control to the migration planner.
    """
    if not task.waiting:
        raise ValueError(f"task {task.id!r} is already placed on {task.placement!r}")
    k = config.primary_dim
    server_id = find_exact_fit(state, task, config.pre_max, k)
    if server_id is not None:
        return PlacementDecision(task.id, server_id, FIT_EXACT)
    server_id = find_closest_fit(state, task, config.pre_max, k)
    if server_id is not None:
        return PlacementDecision(task.id, server_id, FIT_CLOSEST)
    raise NoFit(f"no server fits task {task.id!r} under threshold {config.pre_max}")


def first_fit_allocate(state: DatacenterState, task: Task, config: Config) -> PlacementDecision:
    """Lowest-index server that fits the task in all dimensions under
    config.pre_max; the baseline ignores exactness entirely."""
    if not task.waiting:
        raise ValueError(f"task {task.id!r} is already placed on {task.placement!r}")
    for server in state.servers:
        if fits_under(state, server.id, task.demand, config.pre_max):
            return PlacementDecision(task.id, server.id, FIT_FIRST)
    raise NoFit(f"no server fits task {task.id!r} under threshold {config.pre_max}")


def pack_all(
    state: DatacenterState,
    tasks: Iterable[Task],
    algo: str,
    config: Config,
) -> tuple[DatacenterState, list[str]]:
    """Place waiting tasks in descending order; NoFit tasks are collected
    as unplaced rather than raised."""
    if algo not in PACK_ALGORITHMS:
        raise ValueError(f"unknown packing algorithm {algo!r}; expected one of {PACK_ALGORITHMS}")
    allocate = best_fit_allocate if algo == "best-fit" else first_fit_allocate
    current = state
    unplaced: list[str] = []
    for task in sort_tasks_desc(tasks, config.primary_dim):
        try:
            decision = allocate(current, current.tasks[task.id], config)
        except NoFit:
            unplaced.append(task.id)
            continue
        current = place_task(current, decision.task, decision.server)
    return current, unplaced
