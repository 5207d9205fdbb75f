"""Exhaustive-search ground truth for small instances.

Used only by tests and acceptance runs: plain enumeration with capacity
pruning is exact at desk scale and stays independent of the heuristics it
checks.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .errors import Infeasible, InfeasibleItem, InstanceTooLarge
from .model import Config, DatacenterState, ResourceVector

# Worst-case search stays under a minute on a desktop at this bound.
MAX_ORACLE_ITEMS = 12


@dataclass(frozen=True)
class OracleResult:
    """`witness` assigns each item a bin index, bins numbered by first use,
    and is the lexicographically first optimal assignment."""

    optimum: int
    witness: tuple[int, ...]


def optimal_bin_count(
    demands: Sequence[ResourceVector], capacity: ResourceVector, threshold: float = 100
) -> OracleResult:
    """Minimum number of servers that pack all demands under the threshold.

    Exhaustive search over set partitions in restricted-growth order, so the
    returned witness is deterministic. Raises InstanceTooLarge beyond the
    enumeration bound and InfeasibleItem when a single demand exceeds the
    thresholded capacity.
    """
    n = len(demands)
    if n > MAX_ORACLE_ITEMS:
        raise InstanceTooLarge(f"{n} items exceed the enumeration bound of {MAX_ORACLE_ITEMS}")
    dims = len(capacity)
    caps = tuple(capacity[d] * threshold / 100 for d in range(dims))
    for i, demand in enumerate(demands):
        if any(demand[d] > caps[d] for d in range(dims)):
            raise InfeasibleItem(f"item {i} with demand {tuple(demand)} exceeds capacity {caps}")
    if n == 0:
        return OracleResult(0, ())

    totals = [sum(demand[d] for demand in demands) for d in range(dims)]
    # The small slack guards float overshoot; an undershot bound only costs
    # one extra (provably infeasible) search round.
    lower = max(1, max(math.ceil(totals[d] / caps[d] - 1e-9) for d in range(dims) if caps[d] > 0))

    for bins in range(lower, n + 1):
        witness = _pack_into(demands, caps, bins)
        if witness is not None:
            return OracleResult(bins, witness)
    raise AssertionError("unreachable: one bin per item always packs")


def _pack_into(
    demands: Sequence[ResourceVector], caps: tuple[float, ...], bins: int
) -> tuple[int, ...] | None:
    """First (lexicographically) assignment into at most `bins` bins, or None."""
    dims = len(caps)
    loads = [[0.0] * dims for _ in range(bins)]
    assignment = [0] * len(demands)

    def assign(i: int, used: int) -> bool:
        if i == len(demands):
            return True
        demand = demands[i]
        for b in range(min(used + 1, bins)):
            if any(loads[b][d] + demand[d] > caps[d] for d in range(dims)):
                continue
            for d in range(dims):
                loads[b][d] += demand[d]
            assignment[i] = b
            if assign(i + 1, max(used, b + 1)):
                return True
            for d in range(dims):
                loads[b][d] -= demand[d]
        return False

    return tuple(assignment) if assign(0, 0) else None


def min_migrations_to_release(state: DatacenterState, k: int, config: Config) -> int:
    """Minimum move count over all sequences that empty at least k of the
    initially non-empty servers while respecting post_max at every step.

    Breadth-first search over placement assignments; raises Infeasible when
    the reachable space is exhausted without k releases.
    """
    placed = sorted(tid for tid, t in state.tasks.items() if not t.waiting)
    if len(placed) > MAX_ORACLE_ITEMS:
        raise InstanceTooLarge(f"{len(placed)} placed tasks exceed the enumeration bound of {MAX_ORACLE_ITEMS}")
    if k <= 0:
        return 0
    server_ids = [s.id for s in state.servers]
    initially_nonempty = frozenset(s.id for s in state.servers if s.placed)
    if k > len(initially_nonempty):
        raise Infeasible(f"cannot release {k} servers; only {len(initially_nonempty)} are non-empty")

    demands = {tid: state.tasks[tid].demand for tid in placed}
    caps = {
        s.id: tuple(s.capacity[d] * config.post_max / 100 for d in range(state.dims))
        for s in state.servers
    }

    def releases(assignment: tuple[str, ...]) -> int:
        occupied = set(assignment)
        return sum(1 for sid in initially_nonempty if sid not in occupied)

    start = tuple(state.tasks[tid].placement for tid in placed)
    if releases(start) >= k:
        return 0
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        assignment, depth = queue.popleft()
        loads = {sid: [0.0] * state.dims for sid in server_ids}
        for tid, sid in zip(placed, assignment):
            for d in range(state.dims):
                loads[sid][d] += demands[tid][d]
        for i, tid in enumerate(placed):
            for sid in server_ids:
                if sid == assignment[i]:
                    continue
                if any(loads[sid][d] + demands[tid][d] > caps[sid][d] for d in range(state.dims)):
                    continue
                nxt = assignment[:i] + (sid,) + assignment[i + 1:]
                if nxt in seen:
                    continue
                if releases(nxt) >= k:
                    return depth + 1
                seen.add(nxt)
                queue.append((nxt, depth + 1))
    raise Infeasible(f"no move sequence releases {k} servers under threshold {config.post_max}")
