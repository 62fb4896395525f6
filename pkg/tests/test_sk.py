import itertools
import math

import numpy as np
import pytest

from bnblab import sk
from bnblab.core import count_nodes, iter_nodes
from bnblab.search import best_first


def pair_instance(a12, p=2):
    a = np.zeros((2, 2))
    a[0, 1] = a12
    return sk.discretize(sk.SKInstance(2, a), p)


def all_spins(n):
    return [np.array(x) for x in itertools.product((1, -1), repeat=n)]


def min_completion(inst, prefix):
    rest = inst.n - len(prefix)
    return min(inst.energy(np.concatenate([prefix, tail])) for tail in all_spins(rest)) if rest else inst.energy(prefix)


class TestGenerate:
    def test_single_spin(self):
        inst = sk.generate(1, 0)
        assert inst.a.shape == (1, 1)
        assert not inst.a.any()

    def test_deterministic(self):
        a = sk.generate(9, (4, 2)).a
        b = sk.generate(9, (4, 2)).a
        assert np.array_equal(a, b)
        assert not np.array_equal(a, sk.generate(9, (4, 3)).a)

    def test_strictly_upper_triangular(self):
        a = sk.generate(7, 1).a
        assert np.array_equal(a, np.triu(a, 1))
        assert np.count_nonzero(a) == 21

    def test_coupling_moments(self):
        N = 1000
        x = np.array([sk.generate(4, (11, i)).a[0, 1] for i in range(N)])
        assert abs(x.mean()) <= 4 / math.sqrt(N)
        assert abs(x.var() - 1) <= 0.1

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sk.generate(0, 0)


class TestDiscretize:
    def test_floor_positive(self):
        assert pair_instance(0.625).a[0, 1] == 2

    def test_floor_negative(self):
        assert pair_instance(-0.625).a[0, 1] == -3

    def test_shift_and_c_max(self):
        inst = sk.discretize(sk.generate(6, 3), 5)
        assert inst.shift == np.abs(inst.a).sum()
        assert inst.c_max >= 2 * inst.shift + 1
        assert inst.c_max & (inst.c_max - 1) == 0
        assert inst.c_max < 2 * (2 * inst.shift + 1)

    def test_entrywise_error(self):
        raw = sk.generate(10, 8)
        inst = sk.discretize(raw, 7)
        err = np.abs(inst.a / 2**7 - raw.a)
        assert err.max() < 2**-7

    def test_default_precision(self):
        assert sk.discretize(sk.generate(16, 0)).p == 4 + 6
        assert sk.discretize(sk.generate(17, 0)).p == 5 + 6

    @pytest.mark.parametrize("seed", range(3))
    def test_optimum_error_bound(self, seed):
        raw = sk.generate(8, seed)
        inst = sk.discretize(raw, 12)
        e_cont = min(raw.energy(x) for x in all_spins(8))
        e_disc = min(inst.energy(x) for x in all_spins(8))
        assert abs(e_disc / 2**12 - e_cont) <= 28 * 2**-12

    def test_shifted_energies_in_range(self):
        inst = sk.discretize(sk.generate(7, 2))
        for x in all_spins(7):
            assert 0 <= inst.energy(x) + inst.shift <= 2 * inst.shift <= inst.c_max

    def test_rejects_zero_bits(self):
        with pytest.raises(ValueError):
            sk.discretize(sk.generate(3, 0), 0)


class TestSuffixMinima:
    def test_two_spins(self):
        inst = pair_instance(1.0)
        assert inst.a[0, 1] == 4
        assert list(sk.suffix_minima(inst).E) == [-4, 0, 0]

    def test_three_spins(self):
        inst = sk.discretize(sk.generate(3, 5))
        E = sk.suffix_minima(inst).E
        assert E[0] == min(inst.energy(x) for x in all_spins(3))

    @pytest.mark.parametrize("n", [4, 7, 10])
    def test_every_suffix(self, n):
        inst = sk.discretize(sk.generate(n, n))
        E = sk.suffix_minima(inst).E
        assert len(E) == n + 1
        assert E[n] == 0 and E[n - 1] == 0
        for l in range(n + 1):
            sub = inst.a[l:, l:]
            expect = min((int(x @ sub @ x) for x in all_spins(n - l)), default=0)
            assert E[l] == expect
            assert E[l] <= 0
        for l in range(n):
            assert E[l] <= E[l + 1] + np.abs(inst.a[l, l + 1 :]).sum()


class TestBoundA:
    def setup_method(self):
        self.inst = sk.discretize(sk.generate(10, 21))
        self.suffix = sk.suffix_minima(self.inst)

    def test_full_assignment_is_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.choice([-1, 1], 10)
            assert sk.bound_a(self.inst, self.suffix, x) == self.inst.energy(x)

    def test_last_level_is_exact(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.choice([-1, 1], 9)
            assert sk.bound_a(self.inst, self.suffix, x) == min_completion(self.inst, x)

    def test_half_assignment(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            x = rng.choice([-1, 1], 5)
            assert sk.bound_a(self.inst, self.suffix, x) <= min_completion(self.inst, x)

    def test_soundness_random_pairs(self):
        rng = np.random.default_rng(3)
        for t in range(120):
            n = int(rng.integers(2, 11))
            inst = sk.discretize(sk.generate(n, (31, t)))
            suffix = sk.suffix_minima(inst)
            l = int(rng.integers(0, n + 1))
            x = rng.choice([-1, 1], l)
            assert sk.bound_a(inst, suffix, x) <= min_completion(inst, x)

    def test_oracle_cost_matches_direct_formula(self):
        oracle = sk.SKOracle(self.inst, self.suffix, fix_first_spin=False)
        rng = np.random.default_rng(4)
        for _ in range(50):
            l = int(rng.integers(1, 11))
            path = tuple(int(b) for b in rng.integers(0, 2, l))
            x = np.array(oracle.spins(path))
            direct = sk.bound_a(self.inst, self.suffix, x) + self.inst.shift
            assert oracle.raw_cost(path) == direct
            prefixes = [sk.bound_a(self.inst, self.suffix, x[:i]) + self.inst.shift for i in range(1, l + 1)]
            assert oracle.cost(path) == max([0] + prefixes)


class TestOracle:
    def test_two_spin_leaves(self):
        inst = pair_instance(1.0)
        oracle = sk.sk_oracle(inst, fix_first_spin=False)
        leaves = [oracle.cost(p) for p in [(0, 0), (0, 1), (1, 0), (1, 1)]]
        assert leaves == [8, 0, 0, 8]
        assert oracle.cost(()) == 0
        assert best_first(oracle).cost == 0

    def test_fixing_first_spin_halves_leaves(self):
        inst = sk.discretize(sk.generate(8, 6))
        full = sk.sk_oracle(inst, fix_first_spin=False)
        half = sk.sk_oracle(inst, fix_first_spin=True)
        assert count_nodes(full) == 2**9 - 1
        assert count_nodes(half) == 2**8 - 1
        assert best_first(full).cost == best_first(half).cost

    @pytest.mark.parametrize("seed", range(3))
    def test_n12_matches_brute_force(self, seed):
        inst = sk.discretize(sk.generate(12, (9, seed)))
        e, x = sk.brute_force_ground_state(inst.a)
        assert e == min(inst.energy(y) for y in all_spins(12))
        assert best_first(sk.sk_oracle(inst)).cost - inst.shift == e

    def test_costs_within_range(self):
        inst = sk.discretize(sk.generate(9, 13))
        oracle = sk.sk_oracle(inst, fix_first_spin=False)
        for v in iter_nodes(oracle):
            assert 0 <= oracle.cost(v) <= inst.c_max
            for w in oracle.children(v):
                assert oracle.cost(w) >= oracle.cost(v)

    @pytest.mark.parametrize("seed", range(5))
    def test_symmetry(self, seed):
        inst = sk.discretize(sk.generate(11, (2, seed)))
        on = sk.solve(inst, fix_first_spin=True)
        off = sk.solve(inst, fix_first_spin=False)
        assert on.energy == off.energy
        assert inst.energy(on.spins) == on.energy
        assert on.spins[0] == 1

    def test_solve_explored_counts_tree_nodes(self):
        g = sk.solve(sk.discretize(sk.generate(10, 0)))
        assert 1 <= g.explored <= 2**10 - 1


class TestParisi:
    def test_value(self):
        assert sk.parisi_reference() == -0.763167
        assert sk.parisi_reference() < 0


class TestInstanceFile:
    def test_round_trip(self, tmp_path):
        inst = sk.generate(7, (3, 4))
        path = tmp_path / "i.txt"
        sk.save_instance(inst, path, 9)
        back, p = sk.load_instance(path)
        assert p == 9
        assert back.n == 7 and back.seed == (3, 4)
        assert np.array_equal(back.a, inst.a)
        assert path.read_text().splitlines()[0] == "7 9 3:4"
        assert path.read_text().splitlines()[1].startswith("1 2 ")

    def test_unseeded(self, tmp_path):
        a = np.zeros((3, 3))
        a[0, 2] = -1.5
        path = tmp_path / "u.txt"
        sk.save_instance(sk.SKInstance(3, a), path, 4)
        back, _ = sk.load_instance(path)
        assert back.seed == () and back.a[0, 2] == -1.5

    @pytest.mark.parametrize("text", ["", "3 4\n1 1 0.5\n", "3 4\n1 2 abc\n", "3 4\n2 5 1.0\n"])
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(ValueError):
            sk.load_instance(path)
