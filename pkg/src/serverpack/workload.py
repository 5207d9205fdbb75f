"""Seeded random scenario generation.

Per-server loads are drawn uniformly over the compositions of the total
into a fixed number of slots at the configured granularity, by unranking a
stars-and-bars index. The distribution is documented here because it is a
choice, not a given: any composition (zeros included) is equally likely.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import InfeasibleTotal
from .model import DatacenterState, ResourceVector, Server, Task

DEFAULT_GRANULARITY = 10


@dataclass(frozen=True)
class WorkloadSpec:
    n_servers: int
    slots_per_server: int = 5
    total_range: tuple[float, float] = (40, 70)
    dims: int = 2
    seed: int = 0
    granularity: int = DEFAULT_GRANULARITY

    def __post_init__(self) -> None:
        lo, hi = self.total_range
        if self.n_servers < 0:
            raise ValueError("n_servers must be >= 0")
        if self.slots_per_server < 1:
            raise ValueError("slots_per_server must be >= 1")
        if not 0 <= lo <= hi <= 100:
            raise ValueError(f"total_range must satisfy 0 <= lo <= hi <= 100, got {self.total_range}")
        if self.granularity < 1:
            raise ValueError("granularity must be >= 1")
        if self.dims < 1:
            raise ValueError("dims must be >= 1")


def _composition_at(index: int, units: int, slots: int) -> list[int]:
    """Unrank the index-th composition (lexicographic) of `units` into
    `slots` non-negative parts."""
    parts: list[int] = []
    remaining = units
    for position in range(slots - 1):
        tail = slots - position - 1
        for value in range(remaining + 1):
            block = math.comb(remaining - value + tail - 1, tail - 1)
            if index < block:
                parts.append(value)
                remaining -= value
                break
            index -= block
        else:
            raise AssertionError("composition index out of range")
    parts.append(remaining)
    return parts


def generate_server_load(
    total: float, slots: int, rng: random.Random, granularity: int = DEFAULT_GRANULARITY
) -> list[float]:
    """Exactly `slots` non-negative demands summing exactly to `total`,
    each a multiple of the granularity; zeros are allowed.

    Raises InfeasibleTotal when the total is not a granularity multiple.
    """
    if total < 0:
        raise ValueError("total must be >= 0")
    if slots < 1:
        raise ValueError("slots must be >= 1")
    units = int(total // granularity)
    if units * granularity != total:
        raise InfeasibleTotal(f"total {total} is not a multiple of granularity {granularity}")
    count = math.comb(units + slots - 1, slots - 1)
    parts = _composition_at(rng.randrange(count), units, slots)
    return [p * granularity for p in parts]


def generate_scenario(spec: WorkloadSpec) -> DatacenterState:
    """Seeded datacenter: n servers at 100 points per dimension, each loaded
    with a total drawn uniformly at granularity steps from total_range.

    Zero-valued slots are padding, not tasks, so only non-zero demands
    materialize; demands sit in dimension 0 with zeros elsewhere, matching
    the single-dimension scenario tables. Per-server seeds are split off the
    master seed first, so server loads could be generated independently.
    """
    lo, hi = spec.total_range
    units_lo = int(lo // spec.granularity)
    if units_lo * spec.granularity != lo:
        raise InfeasibleTotal(f"range start {lo} is not a multiple of granularity {spec.granularity}")
    steps = int((hi - lo) // spec.granularity)
    totals_menu = [lo + i * spec.granularity for i in range(steps + 1)]

    master = random.Random(spec.seed)
    draws = [(totals_menu[master.randrange(len(totals_menu))], master.getrandbits(64))
             for _ in range(spec.n_servers)]

    servers: list[Server] = []
    tasks: dict[str, Task] = {}
    for i, (total, child_seed) in enumerate(draws):
        server_id = f"s{i + 1}"
        loads = generate_server_load(total, spec.slots_per_server, random.Random(child_seed), spec.granularity)
        placed: list[str] = []
        for value in loads:
            if value == 0:
                continue
            task_id = f"{server_id}-t{len(placed) + 1}"
            demand = ResourceVector((value,) + (0,) * (spec.dims - 1))
            tasks[task_id] = Task(task_id, demand, placement=server_id)
            placed.append(task_id)
        servers.append(Server(server_id, ResourceVector.uniform(100, spec.dims), tuple(placed)))
    return DatacenterState(tuple(servers), tasks, spec.dims)
