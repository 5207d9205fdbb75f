"""Server-consolidation engine.

Places tasks on servers with first-fit/best-fit heuristics, plans
migrations that release underutilized servers, and reports consolidation
metrics. Scenarios live in JSON files; the bundled fixtures reproduce the
reference before/after tables.
"""

from .allocator import (
    FIT_CLOSEST,
    FIT_EXACT,
    FIT_FIRST,
    PlacementDecision,
    best_fit_allocate,
    find_closest_fit,
    find_exact_fit,
    first_fit_allocate,
    pack_all,
    sort_tasks_desc,
)
from .cli import ComparisonRow, RunReport, compare, emit, run
from .errors import (
    CapacityViolation,
    Infeasible,
    InfeasibleItem,
    InfeasibleTotal,
    InstanceTooLarge,
    IntermediateCapacityViolation,
    InvalidMove,
    NoFit,
    ParseError,
    SchemaError,
    ServerpackError,
    StateMismatch,
)
from .metrics import ConsolidationMetrics, UtilizationRow, compute_metrics, servers_used, utilization_report
from .model import (
    Allocation,
    Config,
    DatacenterState,
    MigrationMove,
    Plan,
    ResourceVector,
    Server,
    Task,
    Violation,
    apply_plan,
    free_capacity,
    validate_state,
)
from .oracle import MAX_ORACLE_ITEMS, OracleResult, min_migrations_to_release, optimal_bin_count
from .planner import (
    ConsolidationReport,
    CostBenefit,
    FeasibilityVerdict,
    GateDecision,
    allocation_infeasible,
    consolidate,
    cost_benefit_gate,
    drma_allocate_with_migration,
    migration_feasible,
    pairwise_max_free,
    pairwise_min_free,
    select_release_candidate,
)
from .scenario import fixture_path, load_scenario, save_scenario
from .workload import WorkloadSpec, generate_scenario, generate_server_load

__version__ = "0.1.0"
