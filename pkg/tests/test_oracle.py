import pytest

from serverpack import (
    Config,
    Infeasible,
    InfeasibleItem,
    InstanceTooLarge,
    ResourceVector,
    min_migrations_to_release,
    optimal_bin_count,
)
from serverpack.oracle import MAX_ORACLE_ITEMS

from helpers import build_state, vec

CAPACITY = ResourceVector((100,))

TABLE_DEMANDS = [vec(d) for d in (10, 30, 30, 30, 20, 20, 20, 20, 10, 10, 40, 10)]


def loads_of(demands, witness):
    loads = {}
    for demand, bin_index in zip(demands, witness):
        loads.setdefault(bin_index, [0] * len(demand))
        for d in range(len(demand)):
            loads[bin_index][d] += demand[d]
    return loads


class TestOptimalBinCount:
    def test_table_demands_need_three_servers(self):
        result = optimal_bin_count(TABLE_DEMANDS, CAPACITY, 100)
        assert result.optimum == 3

    def test_table_demands_at_lower_threshold(self):
        assert optimal_bin_count(TABLE_DEMANDS, CAPACITY, 70).optimum == 4

    def test_single_item(self):
        assert optimal_bin_count([vec(50)], CAPACITY, 100).optimum == 1

    def test_pairwise_incompatible_items(self):
        result = optimal_bin_count([vec(60), vec(60), vec(60)], CAPACITY, 100)
        assert result.optimum == 3
        assert result.witness == (0, 1, 2)

    def test_empty_instance(self):
        assert optimal_bin_count([], CAPACITY, 100).optimum == 0

    def test_witness_is_valid_and_canonical(self):
        result = optimal_bin_count(TABLE_DEMANDS, CAPACITY, 100)
        loads = loads_of(TABLE_DEMANDS, result.witness)
        assert len(loads) == result.optimum
        assert all(total <= 100 for load in loads.values() for total in load)
        # bins are numbered by first use
        seen = []
        for b in result.witness:
            assert b <= len(seen)
            if b == len(seen):
                seen.append(b)

    def test_multi_dimensional_packing(self):
        demands = [ResourceVector((50, 10)), ResourceVector((50, 95))]
        capacity = ResourceVector((100, 100))
        # CPU alone would allow one bin; memory forces two
        assert optimal_bin_count(demands, capacity, 100).optimum == 2

    def test_instance_too_large(self):
        with pytest.raises(InstanceTooLarge):
            optimal_bin_count([vec(10)] * (MAX_ORACLE_ITEMS + 1), CAPACITY, 100)

    def test_infeasible_item(self):
        with pytest.raises(InfeasibleItem):
            optimal_bin_count([vec(80)], CAPACITY, 70)

    def test_deterministic(self):
        first = optimal_bin_count(TABLE_DEMANDS, CAPACITY, 100)
        second = optimal_bin_count(TABLE_DEMANDS, CAPACITY, 100)
        assert first == second


class TestMinMigrationsToRelease:
    def test_table_state_needs_three_moves(self, table1_state, config):
        assert min_migrations_to_release(table1_state, 1, config) == 3

    def test_zero_releases_cost_nothing(self, table1_state, config):
        assert min_migrations_to_release(table1_state, 0, config) == 0

    def test_stuck_pair_is_infeasible(self, config):
        state = build_state({"S1": [50, 40], "S2": [50, 40]})
        with pytest.raises(Infeasible):
            min_migrations_to_release(state, 1, config)

    def test_more_releases_than_nonempty_servers(self, config):
        state = build_state({"S1": [10], "S2": []})
        with pytest.raises(Infeasible):
            min_migrations_to_release(state, 2, config)

    def test_single_cheap_release(self, config):
        state = build_state({"S1": [20], "S2": [10]})
        assert min_migrations_to_release(state, 1, config) == 1

    def test_respects_post_max(self):
        state = build_state({"S1": [40], "S2": [40]})
        # at post_max 70 both directions fit; at 60 a 40-point move would
        # push the target to 80 points on a 100-point server
        assert min_migrations_to_release(state, 1, Config(pre_max=60, post_max=100)) == 1
        with pytest.raises(Infeasible):
            min_migrations_to_release(state, 1, Config(pre_max=60, post_max=60))

    def test_instance_too_large(self, config):
        state = build_state({"S1": [5] * (MAX_ORACLE_ITEMS + 1)})
        with pytest.raises(InstanceTooLarge):
            min_migrations_to_release(state, 1, config)
