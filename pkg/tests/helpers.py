"""Builders shared across test modules."""

from serverpack import DatacenterState, ResourceVector, Server, Task


def vec(*values):
    return ResourceVector(tuple(values))


def build_state(loads, waiting=None, dims=2, capacity=100):
    """Build a valid state from per-server primary-dimension demands.

    `loads` maps server id -> list of demands; scalars get zero-padded to
    `dims`, tuples are taken as-is. `waiting` maps task id -> demand.
    Task ids are `<server>-t<n>` in placement order.
    """
    servers = []
    tasks = {}
    for server_id, demands in loads.items():
        placed = []
        for i, demand in enumerate(demands, start=1):
            task_id = f"{server_id}-t{i}"
            tasks[task_id] = Task(task_id, _vector(demand, dims), placement=server_id)
            placed.append(task_id)
        servers.append(Server(server_id, ResourceVector.uniform(capacity, dims), tuple(placed)))
    for task_id, demand in (waiting or {}).items():
        tasks[task_id] = Task(task_id, _vector(demand, dims))
    return DatacenterState(tuple(servers), tasks, dims)


def _vector(demand, dims):
    if isinstance(demand, tuple):
        return ResourceVector(demand)
    return ResourceVector((demand,) + (0,) * (dims - 1))


def totals(state, k=0):
    """Primary-dimension totals per server, in declared order."""
    return [sum(state.tasks[tid].demand[k] for tid in s.placed) for s in state.servers]
