"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; a pytest failure is the FAIL signal.
"""

import dataclasses
import itertools
import time

from serverpack import (
    Config,
    DatacenterState,
    Plan,
    ResourceVector,
    Server,
    Task,
    consolidate,
    generate_scenario,
    generate_server_load,
    min_migrations_to_release,
    optimal_bin_count,
    pack_all,
    validate_state,
)
from serverpack.cli import main
from serverpack.model import fits_under, place_task
from serverpack.scenario import fixture_path, load_scenario
from serverpack.workload import WorkloadSpec

import random


def _ok(criterion, name):
    print(f"ACCEPTANCE {criterion} ({name}): PASS")


def test_criterion_1_table_replication():
    started = time.perf_counter()
    state, config = load_scenario(fixture_path("table1"))
    assert config == Config()  # pre_max 70, post_max 100, lowest-index ties

    report = consolidate(state, config)
    totals = [sum(report.after.tasks[tid].demand[0] for tid in s.placed) for s in report.after.servers]
    assert totals == [100, 80, 0, 70]
    assert report.metrics.servers_used == 3
    assert report.metrics.servers_released == 1
    assert report.metrics.tasks_migrated == 3

    moved = sorted((state.tasks[m.task].demand[0], m.source, m.target) for m in report.plan.moves)
    assert moved == [(10, "S3", "S1"), (10, "S3", "S2"), (20, "S3", "S1")]

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    _ok(1, "table replication")


def test_criterion_2_threshold_gate():
    state, config = load_scenario(fixture_path("table1"))
    report = consolidate(state, dataclasses.replace(config, post_max=70))
    assert report.plan == Plan()
    assert report.metrics.servers_released == 0
    assert report.after == state
    _ok(2, "threshold gate")


def _waiting_state(demands, n_servers, dims=1):
    servers = tuple(Server(f"s{i + 1}", ResourceVector.uniform(100, dims)) for i in range(n_servers))
    tasks = {
        f"t{i + 1}": Task(f"t{i + 1}", ResourceVector((d,) + (0,) * (dims - 1)))
        for i, d in enumerate(demands)
    }
    return DatacenterState(servers, tasks, dims)


def test_criterion_3_oracle_equivalence():
    started = time.perf_counter()
    config = Config()
    capacity = ResourceVector((100,))
    worst_ratio = 0.0
    instances = 0
    for size in range(1, 7):
        for demands in itertools.combinations_with_replacement((10, 20, 30, 40, 50, 60, 70), size):
            instances += 1
            optimum = optimal_bin_count(
                [ResourceVector((d,)) for d in demands], capacity, config.pre_max
            ).optimum

            # (a) best-fit repack never beats the oracle
            base = _waiting_state(demands, n_servers=size)
            packed, unplaced = pack_all(base, list(base.tasks.values()), "best-fit", config)
            used = sum(1 for s in packed.servers if s.placed)
            assert unplaced == []
            assert used >= optimum
            worst_ratio = max(worst_ratio, used / optimum)

            # (b) consolidation never migrates less than the oracle minimum
            seeded = pack_all(base, list(base.tasks.values()), "first-fit", config)[0]
            report = consolidate(seeded, config)
            if report.metrics.servers_released > 0:
                minimum = min_migrations_to_release(seeded, report.metrics.servers_released, config)
                assert report.metrics.tasks_migrated >= minimum
    elapsed = time.perf_counter() - started
    assert instances == 1715
    assert worst_ratio <= 2.0
    assert elapsed < 60.0
    # (c) report the observed worst best-fit/optimal ratio
    print(f"ACCEPTANCE 3: max best-fit/optimal ratio over {instances} instances = {worst_ratio:.4f} "
          f"({elapsed:.1f}s)")
    _ok(3, "oracle equivalence")


def test_criterion_4_property_suite():
    config = Config()
    k = config.primary_dim
    violations = 0
    for i in range(1000):
        state = generate_scenario(WorkloadSpec(n_servers=4 + (i % 13), seed=i))
        report = consolidate(state, config)

        # task conservation
        before_tasks = sorted((tid, tuple(t.demand)) for tid, t in report.before.tasks.items())
        after_tasks = sorted((tid, tuple(t.demand)) for tid, t in report.after.tasks.items())
        assert before_tasks == after_tasks

        # capacity within post_max at every replay step, and replay equality
        current = report.before
        for move in report.plan.moves:
            assert fits_under(current, move.target, current.tasks[move.task].demand, config.post_max)
            current = place_task(current, move.task, move.target)
        assert current == report.after

        # monotone usage
        used_before = sum(1 for s in report.before.servers if s.placed)
        assert report.metrics.servers_used <= used_before

        # release soundness: no partial evacuations, and no move re-opens a
        # server that an earlier batch already emptied
        released = {s.id for s in report.before.servers
                    if s.placed and not report.after.server(s.id).placed}
        assert {m.source for m in report.plan.moves} <= released
        emptied_so_far = set()
        for move in report.plan.moves:
            assert move.target not in emptied_so_far
            emptied_so_far.add(move.source)
        assert len(released) == report.metrics.servers_released

        # cost/benefit gate honored per committed release
        for sid in released:
            cost = sum(report.before.tasks[m.task].demand[k] * config.cost_per_point_moved
                       for m in report.plan.moves if m.source == sid)
            assert cost <= config.benefit_per_server_released

        assert validate_state(report.after) == []
    assert violations == 0
    _ok(4, "property suite over 1000 seeded scenarios")


def test_criterion_5_determinism(tmp_path):
    scenario = str(fixture_path("table1"))
    outputs = {}
    for fmt in ("csv", "plotdata", "json", "table"):
        pair = []
        for attempt in ("a", "b"):
            out = tmp_path / f"{fmt}-{attempt}.out"
            code = main(["--scenario", scenario, "--seed", "7", "--emit", fmt, "--out", str(out)])
            assert code == 0
            pair.append(out.read_bytes())
        assert pair[0] == pair[1]
        outputs[fmt] = pair[0]
    # batch aggregation is byte-stable too
    batch = []
    for attempt in ("a", "b"):
        out = tmp_path / f"batch-{attempt}.csv"
        assert main(["--batch", "25", "--seed", "3", "--emit", "csv", "--out", str(out)]) == 0
        batch.append(out.read_bytes())
    assert batch[0] == batch[1]
    _ok(5, "byte-identical outputs")


def test_criterion_6_generator_contract():
    rng = random.Random(99)
    for _ in range(1000):
        total = rng.choice([40, 50, 60, 70])
        row = generate_server_load(total, 5, rng)
        assert sum(row) == total
        assert all(v % 10 == 0 and v >= 0 for v in row)

    rows = 0
    for seed in range(250):
        state = generate_scenario(WorkloadSpec(n_servers=4, seed=seed))
        for server in state.servers:
            rows += 1
            total = sum(state.tasks[tid].demand[0] for tid in server.placed)
            assert 40 <= total <= 70
            assert total % 10 == 0
            assert all(state.tasks[tid].demand[0] % 10 == 0 for tid in server.placed)
    assert rows == 1000
    _ok(6, "generator contract")
