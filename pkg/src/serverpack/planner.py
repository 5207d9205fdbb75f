"""Migration feasibility, allocation-with-migration, and release-driven consolidation.

Consolidation obeys a strict release rule: a server's tasks move only when
every one of them can be re-placed elsewhere, so each committed batch
empties its source server completely. Released servers count as turned off
and never receive tasks afterwards; without that rule a later evacuation
could silently re-open them and break release soundness.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .allocator import find_closest_fit, find_exact_fit, sort_tasks_asc, sort_tasks_desc
from .errors import Infeasible
from .metrics import ConsolidationMetrics, compute_metrics
from .model import (
    Allocation,
    Config,
    DatacenterState,
    MigrationMove,
    Plan,
    Task,
    fits_under,
    free_capacity,
    place_task,
    server_load,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    target: str | None
    bound: float


@dataclass(frozen=True)
class CostBenefit:
    cost: float
    benefit: float


@dataclass(frozen=True)
class GateDecision:
    commit: bool
    cost_benefit: CostBenefit


@dataclass(frozen=True)
class ConsolidationReport:
    before: DatacenterState
    after: DatacenterState
    plan: Plan
    metrics: ConsolidationMetrics


def pairwise_max_free(state: DatacenterState, si: str, sj: str, k: int = 0) -> float:
    """The larger of the two servers' free capacities in dimension k."""
    if si == sj:
        raise ValueError("pairwise bound needs two distinct servers")
    return max(free_capacity(state, si)[k], free_capacity(state, sj)[k])


def pairwise_min_free(state: DatacenterState, si: str, sj: str, k: int = 0) -> float:
    """The smaller of the two free capacities; the migration-quantity bound
    surfaced in infeasibility diagnostics."""
    if si == sj:
        raise ValueError("pairwise bound needs two distinct servers")
    return min(free_capacity(state, si)[k], free_capacity(state, sj)[k])


def migration_feasible(state: DatacenterState, task: Task, si: str, sj: str, config: Config) -> FeasibilityVerdict:
    """Whether the task can move into the richer of the two servers.

    Feasible iff the pairwise max free capacity covers the primary-dimension
    demand and the richer server fits the task in every dimension under
    post_max. On equal free capacity the first argument wins, so callers
    passing servers in declared order get the lowest-index target.
    """
    k = config.primary_dim
    free_i = free_capacity(state, si)[k]
    free_j = free_capacity(state, sj)[k]
    bound = max(free_i, free_j)
    if bound < task.demand[k]:
        return FeasibilityVerdict(False, None, bound)
    richer = si if free_i >= free_j else sj
    if not fits_under(state, richer, task.demand, config.post_max):
        return FeasibilityVerdict(False, None, bound)
    return FeasibilityVerdict(True, richer, bound)


def allocation_infeasible(state: DatacenterState, task: Task, config: Config) -> bool:
    """True iff no server fits the task under post_max, even after any
    single feasible migration vacates space for it."""
    for server in state.servers:
        if fits_under(state, server.id, task.demand, config.post_max):
            return False
    for target in state.servers:
        for source in state.servers:
            if source.id == target.id:
                continue
            for tid in source.placed:
                candidate = state.tasks[tid]
                if not fits_under(state, target.id, candidate.demand, config.post_max):
                    continue
                moved = place_task(state, tid, target.id)
                if fits_under(moved, source.id, task.demand, config.post_max):
                    return False
    k = config.primary_dim
    ids = [s.id for s in state.servers]
    bounds = [pairwise_min_free(state, a, b, k) for i, a in enumerate(ids) for b in ids[i + 1:]]
    logger.debug(
        "task %r (demand %s) unallocatable; min pairwise free bound %s",
        task.id, tuple(task.demand), min(bounds) if bounds else None,
    )
    return True


def drma_allocate_with_migration(
    state: DatacenterState, task: Task, config: Config
) -> tuple[Plan, DatacenterState]:
    """Make room for an unallocatable waiting task with a single migration.

    Candidate target servers are scanned in ascending free-capacity order
    (the most utilized first; config.target_order flips this for comparison
    runs). For each target, tasks on all other servers are tried in
    ascending demand order; the first pair where the migrated task fits the
    target under post_max and its vacated source then fits the waiting task
    is committed. Returns a one-move, one-allocation plan delta plus the
    resulting state, or raises Infeasible.
    """
    if not task.waiting:
        raise ValueError(f"task {task.id!r} is already placed on {task.placement!r}")
    k = config.primary_dim
    for server in state.servers:
        if fits_under(state, server.id, task.demand, config.pre_max):
            raise ValueError(f"task {task.id!r} fits {server.id!r} directly; use best_fit_allocate")

    targets = sorted(state.servers, key=lambda s: free_capacity(state, s.id)[k])
    if config.target_order == "descending":
        targets = sorted(state.servers, key=lambda s: -free_capacity(state, s.id)[k])
    for target in targets:
        candidates = [
            state.tasks[tid]
            for server in state.servers
            if server.id != target.id
            for tid in server.placed
        ]
        for candidate in sort_tasks_asc(candidates, k):
            if not fits_under(state, target.id, candidate.demand, config.post_max):
                continue
            source_id = candidate.placement
            moved = place_task(state, candidate.id, target.id)
            if not fits_under(moved, source_id, task.demand, config.post_max):
                continue
            final = place_task(moved, task.id, source_id)
            delta = Plan(
                moves=(MigrationMove(candidate.id, source_id, target.id),),
                allocations=(Allocation(task.id, source_id),),
            )
            return delta, final
    raise Infeasible(f"no single migration frees enough capacity for task {task.id!r}")


def select_release_candidate(
    state: DatacenterState, config: Config, excluded: frozenset[str] = frozenset()
) -> str | None:
    """Non-empty server with the smallest primary-dimension total that has
    not already failed a release attempt; ties go to the lowest index."""
    k = config.primary_dim
    best_id: str | None = None
    best_total: float | None = None
    for server in state.servers:
        if server.id in excluded or not server.placed:
            continue
        total = server_load(state, server.id)[k]
        if best_total is None or total < best_total:
            best_id, best_total = server.id, total
    return best_id


def cost_benefit_gate(plan: Plan, released: int, config: Config, state: DatacenterState) -> GateDecision:
    """Commit iff the migration cost does not exceed the release benefit.

    Cost is primary-dimension points moved times cost_per_point_moved;
    benefit is servers released times benefit_per_server_released. Demands
    are resolved against `state`, which must contain every moved task.
    """
    k = config.primary_dim
    points = sum(state.tasks[m.task].demand[k] for m in plan.moves)
    cb = CostBenefit(
        cost=points * config.cost_per_point_moved,
        benefit=released * config.benefit_per_server_released,
    )
    return GateDecision(commit=cb.cost <= cb.benefit, cost_benefit=cb)


def _plan_evacuation(
    state: DatacenterState, candidate_id: str, off: frozenset[str] | set[str], config: Config
) -> tuple[DatacenterState, list[MigrationMove]] | None:
    """Tentatively re-place every task of the candidate via best fit under
    post_max, excluding the candidate itself and servers counted as off.
    None when any task fails to fit (all-or-nothing)."""
    k = config.primary_dim
    exclude = tuple(off | {candidate_id})
    trial = state
    moves: list[MigrationMove] = []
    for task in sort_tasks_desc(state.placed_tasks(candidate_id), k):
        dest = find_exact_fit(trial, task, config.post_max, k, exclude)
        if dest is None:
            dest = find_closest_fit(trial, task, config.post_max, k, exclude)
        if dest is None:
            return None
        trial = place_task(trial, task.id, dest)
        moves.append(MigrationMove(task.id, candidate_id, dest))
    return trial, moves


def consolidate(state: DatacenterState, config: Config) -> ConsolidationReport:
    """Release underutilized servers by whole-server evacuation.

    Repeatedly picks the non-empty server with the smallest primary-dimension
    total, tries to best-fit every one of its tasks elsewhere under post_max
    (descending demand order), and commits only when all of them fit and the
    cost/benefit gate accepts; otherwise the candidate rolls back entirely
    and is not retried. Servers that are empty at the start count as off and
    never receive tasks (so every release strictly reduces the server
    count), and servers that absorbed migrated tasks stay on and are never
    candidates themselves: evacuating a receiver would move tasks twice and
    waste the earlier migrations. Stops when no candidate remains, so a run
    takes at most one attempt per server. An empty plan is a valid outcome.
    """
    current = state
    failed: set[str] = set()
    off = {s.id for s in state.servers if not s.placed}
    receivers: set[str] = set()
    moves: list[MigrationMove] = []
    while True:
        candidate = select_release_candidate(current, config, excluded=frozenset(failed | receivers))
        if candidate is None:
            break
        evacuation = _plan_evacuation(current, candidate, off, config)
        if evacuation is None:
            failed.add(candidate)
            continue
        trial, trial_moves = evacuation
        decision = cost_benefit_gate(Plan(moves=tuple(trial_moves)), 1, config, current)
        if not decision.commit:
            failed.add(candidate)
            continue
        current = trial
        moves.extend(trial_moves)
        off.add(candidate)
        receivers.update(m.target for m in trial_moves)
    plan = Plan(moves=tuple(moves))
    return ConsolidationReport(
        before=state,
        after=current,
        plan=plan,
        metrics=compute_metrics(state, current, plan),
    )
