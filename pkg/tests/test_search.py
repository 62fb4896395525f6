import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bnblab import knapsack, sk
from bnblab.core import INF, ROOT, TreeOracle, count_nodes, example_tree, iter_nodes, monotone_wrap, truncate
from bnblab.search import (
    SearchMemoryError,
    best_first,
    depth_first_incumbent,
    generic_truncated_size,
    tree_stats,
    truncated_size,
)


def sk_case(n, seed, fix_first_spin=True):
    inst = sk.discretize(sk.generate(n, seed))
    return inst, sk.sk_oracle(inst, fix_first_spin=fix_first_spin)


def brute_energy(inst):
    return sk.brute_force_ground_state(inst.a)[0]


@st.composite
def distinct_monotone_trees(draw):
    """Random trees whose node costs strictly increase downward and are all distinct."""
    shape = draw(
        st.recursive(st.just([]), lambda kids: st.lists(kids, min_size=1, max_size=3), max_leaves=20)
    )
    steps = iter(draw(st.lists(st.integers(1, 50), min_size=64, max_size=64)))

    def build(node, c):
        return (c, [build(k, c + next(steps, 1)) for k in node])

    tree = build(shape, 0)
    oracle = TreeOracle(tree)
    all_costs = [oracle.cost(v) for v in iter_nodes(oracle)]
    assume(len(set(all_costs)) == len(all_costs))
    return oracle


class TestBestFirst:
    def test_example_tree(self):
        out = best_first(example_tree())
        assert out.cost == 4
        assert out.solution == (1, 0, 1)
        # root, then two children for each of the five expansions
        assert out.explored_nodes == 11
        assert out.queries == 5
        assert out.settled_nodes == 6

    def test_single_solution_node(self):
        out = best_first(TreeOracle((0, [])))
        assert (out.solution, out.cost, out.explored_nodes) == (ROOT, 0, 1)

    def test_no_solution(self):
        out = best_first(TreeOracle((0, [(INF, []), (2, [(INF, [])])])))
        assert out.solution is None and out.cost == INF

    @pytest.mark.parametrize("seed", range(5))
    def test_sk_matches_brute_force(self, seed):
        inst, oracle = sk_case(8, seed)
        out = best_first(oracle)
        assert out.cost - inst.shift == brute_energy(inst)
        x = oracle.spins(out.solution)
        assert inst.energy(x) == out.cost - inst.shift

    def test_memory_budget(self):
        with pytest.raises(SearchMemoryError):
            best_first(example_tree(), max_live=1)

    @given(distinct_monotone_trees())
    @settings(max_examples=150, deadline=None)
    def test_settled_set_is_truncated_tree(self, oracle):
        out = best_first(oracle)
        assert out.settled_nodes == truncated_size(oracle, out.cost)


class TestDepthFirst:
    def test_example_tree(self):
        out = depth_first_incumbent(example_tree())
        assert out.cost == 4
        assert out.solution == (1, 0, 1)
        assert out.explored_nodes == 11
        assert out.explored_nodes >= 6

    def test_incumbent_equal_to_optimum(self):
        out = depth_first_incumbent(example_tree(), 4)
        assert out.cost == 4

    def test_incumbent_below_optimum_finds_nothing(self):
        out = depth_first_incumbent(example_tree(), 3)
        assert out.solution is None and out.cost == INF

    def test_cost_order(self):
        out = depth_first_incumbent(example_tree(), order="cost")
        assert out.cost == 4

    def test_knapsack_matches_dp(self):
        for seed in range(10):
            inst = knapsack.random_instance(12, seed)
            oracle = knapsack.knapsack_oracle(inst)
            out = depth_first_incumbent(oracle)
            assert oracle.value_of(out.cost) == knapsack.dp_oracle(inst)

    @pytest.mark.parametrize("seed", range(4))
    def test_raising_incumbent_keeps_optimum(self, seed):
        inst, oracle = sk_case(9, seed)
        c_min = best_first(oracle).cost
        for inc in (c_min, c_min + 1, c_min + 100, INF):
            assert depth_first_incumbent(oracle, inc).cost == c_min

    @pytest.mark.parametrize("n", range(2, 12))
    def test_generic_and_compiled_agree(self, n):
        inst, oracle = sk_case(n, 40 + n)
        generic = depth_first_incumbent(oracle)
        fast = oracle.depth_first()
        assert generic.cost == fast.cost
        assert generic.explored_nodes == fast.explored_nodes
        assert generic.cost - inst.shift == brute_energy(inst)


class TestExplorationFloor:
    @pytest.mark.parametrize("seed", range(8))
    def test_sk(self, seed):
        _, oracle = sk_case(12, seed)
        dfs = oracle.depth_first()
        bfs = best_first(oracle)
        t_min = truncated_size(oracle, dfs.cost)
        assert dfs.explored_nodes >= t_min
        assert bfs.explored_nodes >= t_min
        assert bfs.settled_nodes <= t_min

    @given(distinct_monotone_trees())
    @settings(max_examples=100, deadline=None)
    def test_random_trees(self, oracle):
        dfs = depth_first_incumbent(oracle)
        if dfs.solution is not None:
            assert dfs.explored_nodes >= truncated_size(oracle, dfs.cost)


class TestTruncatedSize:
    @pytest.mark.parametrize("c, size", [(4, 6), (INF, 13), (3, 5), (0, 0), (8, 11)])
    def test_example_tree(self, c, size):
        assert truncated_size(example_tree(), c) == size

    def test_limit(self):
        assert truncated_size(example_tree(), INF, limit=3) == 4

    @pytest.mark.parametrize("n", [5, 9, 12])
    def test_compiled_count_matches_generic(self, n):
        inst, oracle = sk_case(n, n)
        for c in np.linspace(0, inst.c_max, 7).astype(int):
            assert truncated_size(oracle, int(c)) == generic_truncated_size(oracle, int(c))
            assert truncated_size(oracle, int(c), limit=10) == min(generic_truncated_size(oracle, int(c)), 11)


class TestTreeStats:
    def test_example_tree(self):
        s = tree_stats(example_tree())
        assert (s.total_nodes, s.leaf_count, s.min_solution_cost, s.truncated_size_at_min) == (13, 7, 4, 6)

    def test_solutionless(self):
        tree = TreeOracle((0, [(1, [(INF, [])]), (INF, [])]))
        s = tree_stats(tree)
        assert s.min_solution_cost == INF
        assert s.truncated_size_at_min == s.total_nodes == 4

    def test_sk_n10(self):
        inst, oracle = sk_case(10, 3)
        s = tree_stats(oracle)
        assert s.total_nodes == 2**10 - 1
        assert s.min_solution_cost - inst.shift == brute_energy(inst)
        assert s.truncated_size_at_min <= s.total_nodes
        assert s.truncated_size_at_min == count_nodes(truncate(oracle, s.min_solution_cost))
        assert best_first(oracle).settled_nodes <= s.truncated_size_at_min

    def test_monotone_wrapped_sk_is_unchanged(self):
        _, oracle = sk_case(7, 1)
        m = monotone_wrap(oracle)
        assert all(m.cost(v) == oracle.cost(v) for v in iter_nodes(oracle))
