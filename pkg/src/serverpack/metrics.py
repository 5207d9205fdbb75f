"""Consolidation effectiveness metrics and per-server utilization tables."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StateMismatch
from .model import DatacenterState, Plan, apply_plan, server_load


@dataclass(frozen=True)
class ConsolidationMetrics:
    servers_used: int
    servers_released: int
    tasks_migrated: int


@dataclass(frozen=True)
class UtilizationRow:
    """One table row: per-task primary-dimension demands in placement order,
    their total, and the per-dimension load/capacity fractions."""

    server: str
    demands: tuple[float, ...]
    total: float
    utilization: tuple[float, ...]


def servers_used(state: DatacenterState) -> int:
    """Non-empty servers; powered-but-idle servers count as released."""
    return sum(1 for s in state.servers if s.placed)


def compute_metrics(before: DatacenterState, after: DatacenterState, plan: Plan) -> ConsolidationMetrics:
    """The three effectiveness numbers: servers used after, servers the plan
    emptied, and tasks migrated (move count).

    Raises StateMismatch unless `after` equals the replay of `plan` over
    `before`, field for field.
    """
    replayed = apply_plan(before, plan)
    if replayed != after:
        raise StateMismatch("after-state is not the replay of the plan over the before-state")
    released = sum(1 for s in before.servers if s.placed and not after.server(s.id).placed)
    return ConsolidationMetrics(
        servers_used=servers_used(after),
        servers_released=released,
        tasks_migrated=len(plan.moves),
    )


def utilization_report(state: DatacenterState, k: int = 0) -> list[UtilizationRow]:
    """One row per server in declared order, shaped like the scenario tables."""
    rows = []
    for server in state.servers:
        demands = tuple(state.tasks[tid].demand[k] for tid in server.placed)
        load = server_load(state, server.id)
        utilization = tuple(
            load[d] / server.capacity[d] if server.capacity[d] else 0.0 for d in range(state.dims)
        )
        rows.append(UtilizationRow(server.id, demands, sum(demands), utilization))
    return rows
