"""Scenario runner: single runs, algorithm comparison, batch harness, emission.

Output is byte-deterministic for a fixed scenario, config, and seed: the
wall-clock duration lives on the in-memory report only and is never
emitted. The csv format carries the resulting (after) allocation table
with header ``server,task1..taskS,total``; plotdata emits ``series,x,y``
triples of cumulative per-server points for both phases, ready for line
charts; json carries the whole report including the plan.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import metrics as metrics_mod
from .allocator import best_fit_allocate, pack_all, sort_tasks_desc
from .errors import Infeasible, NoFit, ParseError, SchemaError, ServerpackError
from .metrics import ConsolidationMetrics, UtilizationRow, utilization_report
from .model import (
    Allocation,
    Config,
    DatacenterState,
    Plan,
    apply_plan,
    place_task,
)
from .planner import (
    CostBenefit,
    consolidate,
    cost_benefit_gate,
    drma_allocate_with_migration,
)
from .scenario import load_scenario
from .workload import WorkloadSpec, generate_scenario

ALGORITHMS = ("first-fit", "best-fit", "drma")
FORMATS = ("table", "csv", "json", "plotdata")

BATCH_WORKLOAD_MAX_TOTAL = 70  # batch scenarios draw server totals in [40, 70]


@dataclass(frozen=True)
class RunReport:
    """One algorithm run over one scenario.

    mode is "consolidate" (drma: a replayable migration plan) or "repack"
    (first-fit/best-fit baselines: tasks re-placed from scratch, so the
    plan is empty and metrics compare placements directly). duration_s is
    informational and never emitted.
    """

    scenario_id: str
    algorithm: str
    mode: str
    config: Config
    before: DatacenterState
    after: DatacenterState
    plan: Plan
    metrics: ConsolidationMetrics
    cost_benefit: CostBenefit
    unplaced: tuple[str, ...]
    duration_s: float

    def before_table(self) -> list[UtilizationRow]:
        return utilization_report(self.before, self.config.primary_dim)

    def after_table(self) -> list[UtilizationRow]:
        return utilization_report(self.after, self.config.primary_dim)


@dataclass(frozen=True)
class ComparisonRow:
    algorithm: str
    mode: str
    servers_used: int
    servers_released: int
    tasks_migrated: int
    cost: float
    benefit: float
    unplaced: int


def _run_drma(state: DatacenterState, config: Config, scenario_id: str) -> RunReport:
    started = time.perf_counter()
    waiting_order = [t.id for t in sort_tasks_desc(state.waiting_tasks(), config.primary_dim)]
    working = state
    chronological = []
    for tid in waiting_order:
        task = working.tasks[tid]
        try:
            decision = best_fit_allocate(working, task, config)
            working = place_task(working, tid, decision.server)
        except NoFit:
            delta, working = drma_allocate_with_migration(working, task, config)
            chronological.extend(delta.moves)
    report = consolidate(working, config)
    chronological.extend(report.plan.moves)

    # A task that arrived waiting lands directly at its final server in the
    # emitted plan; intermediate hops of such tasks are collapsed into the
    # allocation so the moves-then-allocations replay stays capacity-safe.
    waiting_set = set(waiting_order)
    moves = tuple(m for m in chronological if m.task not in waiting_set)
    allocations = tuple(
        Allocation(tid, report.after.tasks[tid].placement) for tid in waiting_order
    )
    plan = Plan(moves=moves, allocations=allocations)
    after = apply_plan(state, plan, config)
    computed = metrics_mod.compute_metrics(state, after, plan)
    gate = cost_benefit_gate(plan, computed.servers_released, config, state)
    return RunReport(
        scenario_id, "drma", "consolidate", config, state, after, plan,
        computed, gate.cost_benefit, (), time.perf_counter() - started,
    )


def _run_repack(state: DatacenterState, config: Config, algorithm: str, scenario_id: str) -> RunReport:
    started = time.perf_counter()
    base = DatacenterState(
        tuple(dataclasses.replace(s, placed=()) for s in state.servers),
        {tid: dataclasses.replace(t, placement=None) for tid, t in state.tasks.items()},
        state.dims,
    )
    packed, unplaced = pack_all(base, list(base.tasks.values()), algorithm, config)
    k = config.primary_dim
    released = sum(1 for s in state.servers if s.placed and not packed.server(s.id).placed)
    moved = [
        tid
        for tid, t in state.tasks.items()
        if t.placement is not None
        and packed.tasks[tid].placement is not None
        and packed.tasks[tid].placement != t.placement
    ]
    points = sum(state.tasks[tid].demand[k] for tid in moved)
    computed = ConsolidationMetrics(
        servers_used=metrics_mod.servers_used(packed),
        servers_released=released,
        tasks_migrated=len(moved),
    )
    cb = CostBenefit(
        cost=points * config.cost_per_point_moved,
        benefit=released * config.benefit_per_server_released,
    )
    return RunReport(
        scenario_id, algorithm, "repack", config, state, packed, Plan(),
        computed, cb, tuple(unplaced), time.perf_counter() - started,
    )


def run(state: DatacenterState, config: Config, algorithm: str, scenario_id: str = "scenario") -> RunReport:
    """Run one algorithm over a scenario.

    drma allocates any waiting tasks (best fit, with the single-migration
    fallback), consolidates, and reports a replayable plan; first-fit and
    best-fit re-place all tasks onto emptied servers as repack baselines.
    """
    if algorithm == "drma":
        return _run_drma(state, config, scenario_id)
    if algorithm in ("first-fit", "best-fit"):
        return _run_repack(state, config, algorithm, scenario_id)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def compare(state, config, algorithms, scenario_id: str = "scenario") -> list[ComparisonRow]:
    """One row per algorithm, in the order given."""
    if not algorithms:
        raise ValueError("compare needs at least one algorithm")
    rows = []
    for algorithm in algorithms:
        report = run(state, config, algorithm, scenario_id)
        rows.append(
            ComparisonRow(
                algorithm=report.algorithm,
                mode=report.mode,
                servers_used=report.metrics.servers_used,
                servers_released=report.metrics.servers_released,
                tasks_migrated=report.metrics.tasks_migrated,
                cost=report.cost_benefit.cost,
                benefit=report.cost_benefit.benefit,
                unplaced=len(report.unplaced),
            )
        )
    return rows


def _fmt_num(value) -> str:
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _pad_demands(rows: list[UtilizationRow]) -> tuple[int, list[list[float]]]:
    width = max((len(r.demands) for r in rows), default=0)
    return width, [list(r.demands) + [0] * (width - len(r.demands)) for r in rows]


def _table_block(title: str, rows: list[UtilizationRow]) -> list[str]:
    width, padded = _pad_demands(rows)
    header = ["Server"] + [f"Task {j + 1}" for j in range(width)] + ["Total"]
    cells = [header]
    for row, demands in zip(rows, padded):
        cells.append([row.server] + [_fmt_num(v) for v in demands] + [_fmt_num(row.total)])
    widths = [max(len(line[c]) for line in cells) for c in range(len(header))]
    lines = [title]
    for line in cells:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(line, widths)))
    return lines


def _csv_table(rows: list[UtilizationRow]) -> str:
    width, padded = _pad_demands(rows)
    header = "server," + "".join(f"task{j + 1}," for j in range(width)) + "total"
    lines = [header]
    for row, demands in zip(rows, padded):
        lines.append(",".join([row.server] + [_fmt_num(v) for v in demands] + [_fmt_num(row.total)]))
    return "\n".join(lines) + "\n"


def _rows_json(rows: list[UtilizationRow]) -> list[dict]:
    return [
        {
            "server": r.server,
            "demands": list(r.demands),
            "total": r.total,
            "utilization": list(r.utilization),
        }
        for r in rows
    ]


def _plot_lines(prefix: str, rows: list[UtilizationRow]) -> list[str]:
    lines = []
    for row in rows:
        lines.append(f"{prefix}/{row.server},0,0")
        cumulative = 0
        for x, demand in enumerate(row.demands, start=1):
            cumulative += demand
            lines.append(f"{prefix}/{row.server},{x},{_fmt_num(cumulative)}")
    return lines


def render_report(report: RunReport, fmt: str) -> str:
    if fmt == "table":
        lines = [
            f"scenario: {report.scenario_id}",
            f"algorithm: {report.algorithm} ({report.mode})",
            "",
        ]
        lines += _table_block("Before migration", report.before_table())
        lines.append("")
        lines += _table_block("After migration", report.after_table())
        lines += [
            "",
            f"servers used:     {report.metrics.servers_used}",
            f"servers released: {report.metrics.servers_released}",
            f"tasks migrated:   {report.metrics.tasks_migrated}",
            f"migration cost:   {_fmt_num(report.cost_benefit.cost)}",
            f"release benefit:  {_fmt_num(report.cost_benefit.benefit)}",
            f"plan: {len(report.plan.moves)} moves, {len(report.plan.allocations)} allocations",
        ]
        if report.unplaced:
            lines.append("unplaced: " + ", ".join(report.unplaced))
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        return _csv_table(report.after_table())
    if fmt == "json":
        payload = {
            "scenario": report.scenario_id,
            "algorithm": report.algorithm,
            "mode": report.mode,
            "config": dataclasses.asdict(report.config),
            "metrics": dataclasses.asdict(report.metrics),
            "cost_benefit": dataclasses.asdict(report.cost_benefit),
            "unplaced": list(report.unplaced),
            "plan": {
                "moves": [
                    {"task": m.task, "from": m.source, "to": m.target} for m in report.plan.moves
                ],
                "allocations": [
                    {"task": a.task, "server": a.server} for a in report.plan.allocations
                ],
            },
            "before": _rows_json(report.before_table()),
            "after": _rows_json(report.after_table()),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if fmt == "plotdata":
        lines = ["series,x,y"]
        lines += _plot_lines("before", report.before_table())
        lines += _plot_lines("after", report.after_table())
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


_COMPARISON_FIELDS = (
    "algorithm", "mode", "servers_used", "servers_released",
    "tasks_migrated", "cost", "benefit", "unplaced",
)


def render_comparison(rows: list[ComparisonRow], fmt: str, scenario_id: str) -> str:
    if fmt == "plotdata":
        raise ValueError("plotdata is not defined for comparison output")
    if fmt == "json":
        payload = {
            "scenario": scenario_id,
            "rows": [dataclasses.asdict(r) for r in rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    cells = [list(_COMPARISON_FIELDS)]
    for row in rows:
        cells.append([_fmt_num(getattr(row, f)) for f in _COMPARISON_FIELDS])
    if fmt == "csv":
        return "\n".join(",".join(line) for line in cells) + "\n"
    widths = [max(len(line[c]) for line in cells) for c in range(len(_COMPARISON_FIELDS))]
    lines = [f"scenario: {scenario_id}", ""]
    for line in cells:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())
    return "\n".join(lines) + "\n"


_BATCH_FIELDS = (
    "algorithm", "mode", "scenarios", "mean_servers_used", "mean_servers_released",
    "mean_tasks_migrated", "mean_cost", "mean_benefit", "mean_unplaced",
)


def batch_runs(config: Config, count: int, algorithms) -> list[dict]:
    """Generate `count` seeded scenarios and aggregate per-algorithm means.

    Scenario seeds split off config.seed; reports are aggregated in
    scenario-id order, which the generated ids already follow.
    """
    master = random.Random(config.seed)
    width = max(4, len(str(count)))
    seeds = [(f"batch-{i + 1:0{width}d}", master.getrandbits(64)) for i in range(count)]
    per_algorithm: dict[str, list[RunReport]] = {a: [] for a in algorithms}
    for scenario_id, child_seed in seeds:
        state = generate_scenario(WorkloadSpec(n_servers=4, seed=child_seed))
        for algorithm in algorithms:
            per_algorithm[algorithm].append(run(state, config, algorithm, scenario_id))
    aggregates = []
    for algorithm in algorithms:
        reports = per_algorithm[algorithm]
        n = len(reports)

        def mean(values) -> float:
            return sum(values) / n if n else 0.0

        aggregates.append(
            {
                "algorithm": algorithm,
                "mode": reports[0].mode if reports else "",
                "scenarios": n,
                "mean_servers_used": mean(r.metrics.servers_used for r in reports),
                "mean_servers_released": mean(r.metrics.servers_released for r in reports),
                "mean_tasks_migrated": mean(r.metrics.tasks_migrated for r in reports),
                "mean_cost": mean(r.cost_benefit.cost for r in reports),
                "mean_benefit": mean(r.cost_benefit.benefit for r in reports),
                "mean_unplaced": mean(len(r.unplaced) for r in reports),
            }
        )
    return aggregates


def render_batch(aggregates: list[dict], fmt: str) -> str:
    if fmt == "plotdata":
        raise ValueError("plotdata is not defined for batch output")
    if fmt == "json":
        return json.dumps({"aggregates": aggregates}, indent=2, sort_keys=True) + "\n"

    def cell(row, field):
        value = row[field]
        return f"{value:.4f}" if isinstance(value, float) else str(value)

    cells = [list(_BATCH_FIELDS)]
    for row in aggregates:
        cells.append([cell(row, f) for f in _BATCH_FIELDS])
    if fmt == "csv":
        return "\n".join(",".join(line) for line in cells) + "\n"
    widths = [max(len(line[c]) for line in cells) for c in range(len(_BATCH_FIELDS))]
    lines = []
    for line in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip())
    return "\n".join(lines) + "\n"


def emit(report: RunReport, fmt: str, out=None) -> None:
    """Write a rendered report to a path, or stdout when no path is given."""
    text = render_report(report, fmt)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _apply_overrides(config: Config, args) -> Config:
    updates = {}
    if args.pre_max is not None:
        updates["pre_max"] = args.pre_max
    if args.post_max is not None:
        updates["post_max"] = args.post_max
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.target_order is not None:
        updates["target_order"] = {"asc": "ascending", "desc": "descending"}[args.target_order]
    return dataclasses.replace(config, **updates) if updates else config


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="serverpack",
        description="Run consolidation and packing algorithms over datacenter scenarios.",
    )
    parser.add_argument("--scenario", metavar="PATH", help="scenario file to run")
    parser.add_argument(
        "--algorithm",
        choices=[*ALGORITHMS, "all"],
        help="algorithm to run ('all' compares every algorithm); default drma",
    )
    parser.add_argument("--pre-max", type=float, dest="pre_max", metavar="N",
                        help="utilization threshold before migration, in points")
    parser.add_argument("--post-max", type=float, dest="post_max", metavar="N",
                        help="utilization threshold after migration, in points")
    parser.add_argument("--seed", type=int, metavar="N", help="RNG seed override")
    parser.add_argument("--emit", choices=FORMATS, default="table", help="output format")
    parser.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    parser.add_argument("--batch", type=int, metavar="COUNT",
                        help="run COUNT seeded generated scenarios and emit per-algorithm means")
    parser.add_argument("--target-order", choices=["asc", "desc"], dest="target_order",
                        help="migration target scan order (default asc)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.batch is not None and args.scenario is not None:
            raise ValueError("--scenario and --batch are mutually exclusive")
        if args.batch is None and args.scenario is None:
            raise ValueError("one of --scenario or --batch is required")

        if args.batch is not None:
            if args.batch < 1:
                raise ValueError("--batch must be >= 1")
            config = _apply_overrides(Config(), args)
            if config.pre_max < BATCH_WORKLOAD_MAX_TOTAL:
                raise ValueError(
                    f"batch scenarios draw totals up to {BATCH_WORKLOAD_MAX_TOTAL}; "
                    f"pre_max {config.pre_max} is below that"
                )
            algorithms = ALGORITHMS if args.algorithm in (None, "all") else (args.algorithm,)
            _write(render_batch(batch_runs(config, args.batch, algorithms), args.emit), args.out)
            return 0

        state, config = load_scenario(args.scenario)
        config = _apply_overrides(config, args)
        scenario_id = Path(args.scenario).stem
        if args.algorithm == "all":
            rows = compare(state, config, ALGORITHMS, scenario_id)
            _write(render_comparison(rows, args.emit, scenario_id), args.out)
            return 0
        report = run(state, config, args.algorithm or "drma", scenario_id)
        _write(render_report(report, args.emit), args.out)
        if report.unplaced:
            print(f"infeasible run: {len(report.unplaced)} task(s) could not be placed", file=sys.stderr)
            return 3
        return 0
    except Infeasible as exc:
        print(f"infeasible run: {exc}", file=sys.stderr)
        return 3
    except (ParseError, SchemaError, ValueError, ServerpackError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
