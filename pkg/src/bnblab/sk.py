"""Sherrington-Kirkpatrick instances and their branch-and-bound tree.

Couplings ``a_ij`` (i < j) are standard normal.  They are discretized to
integers ``floor(a_ij * 2**p)`` and the tree over sequential spin
assignments is bounded by

    sum_{i<j<=l} a_ij x_i x_j  -  sum_{j>l} |sum_{i<=l} a_ij x_i|  +  E[l]

where ``E[l]`` is the exact ground-state energy of the couplings among
spins ``l+1..n``.  Energies are shifted by ``sum |a_ij|`` to make every
node cost a nonnegative integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .core import INF, ROOT, Cost, NodePath, ProblemOracle, max_nodes
from .search import SearchOutcome

PARISI_CONSTANT = -0.763167


def parisi_reference() -> float:
    """Limiting ground-state energy per n**1.5 of the S-K model."""
    return PARISI_CONSTANT


def _seed_tuple(seed) -> tuple[int, ...]:
    if isinstance(seed, (tuple, list)):
        return tuple(int(s) for s in seed)
    return (int(seed),)


@dataclass(frozen=True)
class SKInstance:
    n: int
    a: np.ndarray  # strictly upper triangular, float64
    seed: tuple[int, ...] = ()

    def energy(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.a @ x)


@dataclass(frozen=True)
class DiscretizedSKInstance:
    n: int
    a: np.ndarray  # strictly upper triangular, int64
    p: int
    shift: int
    c_max: int
    source: SKInstance | None = field(default=None, compare=False, repr=False)

    def energy(self, x) -> int:
        x = np.asarray(x, dtype=np.int64)
        return int(x @ self.a @ x)

    def to_continuous(self, energy: int) -> float:
        return energy / 2**self.p


@dataclass(frozen=True)
class SuffixMinima:
    E: np.ndarray  # E[l] = min energy of couplings among spins l..n-1 (0-based)
    explored: np.ndarray  # nodes explored by the search that produced E[l]


def generate(n: int, seed) -> SKInstance:
    """Random instance; deterministic in ``(n, seed)``.

    ``seed`` is an int or a tuple such as ``(base_seed, instance_index)``.
    Couplings are drawn row by row over the upper triangle.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    seed = _seed_tuple(seed)
    rng = np.random.default_rng(np.random.SeedSequence([*seed, n]))
    a = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    a[iu] = rng.standard_normal(len(iu[0]))
    return SKInstance(n, a, seed)


def default_precision(n: int) -> int:
    return math.ceil(math.log2(max(n, 1))) + 6


def next_power_of_two(x: int) -> int:
    return 1 << max(int(x) - 1, 0).bit_length()


def discretize(inst: SKInstance, p: int | None = None) -> DiscretizedSKInstance:
    if p is None:
        p = default_precision(inst.n)
    if p < 1:
        raise ValueError(f"precision must be >= 1 bit, got {p}")
    a = np.triu(np.floor(inst.a * 2.0**p).astype(np.int64), 1)
    shift = int(np.abs(a).sum())
    return DiscretizedSKInstance(inst.n, a, p, shift, next_power_of_two(2 * shift + 1), inst)


def brute_force_ground_state(a: np.ndarray):
    """Exhaustive minimum of ``sum_{i<j} a_ij x_i x_j``; returns (energy, x)."""
    a = np.ascontiguousarray(a)
    if a.shape[0] == 0:
        return 0, np.zeros(0, np.int64)
    e, x = _kernels.brute_force_min(a)
    return e.item() if hasattr(e, "item") else e, x


def suffix_minima(inst: DiscretizedSKInstance) -> SuffixMinima:
    """Exact minima of the trailing sub-Hamiltonians, computed bottom-up.

    Each ``E[l]`` comes from a depth-first branch-and-bound over spins
    ``l..n-1`` whose bound uses the already known ``E[l+1:]``.
    """
    n = inst.n
    E = np.zeros(n + 1, np.int64)
    explored = np.zeros(n + 1, np.int64)
    unbounded = np.int64(2**62)
    for l in range(n - 2, -1, -1):
        found, best, ex, _ = _kernels.dfs_min(inst.a, E, l, True, unbounded, False)
        assert found
        E[l] = best
        explored[l] = ex
    return SuffixMinima(E, explored)


def bound_a(inst: DiscretizedSKInstance, suffix: SuffixMinima, x) -> int:
    """Lower bound on the energy of every completion of the prefix ``x``."""
    x = np.asarray(x, dtype=np.int64)
    l = len(x)
    a = inst.a
    fixed = int(x @ a[:l, :l] @ x)
    cross = np.abs(x @ a[:l, l:]).sum() if l < inst.n else 0
    return fixed - int(cross) + int(suffix.E[l])


class SKOracle(ProblemOracle):
    """Binary branch-and-bound tree over sequential spin assignments.

    Branch 0 sets the next spin to +1, branch 1 to -1.  With
    ``fix_first_spin`` the first spin is pinned to +1 at the root, halving
    the tree (energies are invariant under a global flip).  Node costs are
    the shifted bounds, made monotone by a running maximum; the root costs 0.
    """

    def __init__(self, inst: DiscretizedSKInstance, suffix: SuffixMinima, fix_first_spin: bool = True):
        self.inst = inst
        self.suffix = suffix
        self.fix_first_spin = fix_first_spin
        self._offset = 1 if fix_first_spin else 0
        self.depth = max(inst.n - self._offset, 0)
        self.branching = 2
        self.c_max = inst.c_max
        self.t_max = max_nodes(2, self.depth)

    def spins(self, path: NodePath) -> list[int]:
        """Full spin prefix (including a pinned first spin) for ``path``."""
        return [1] * self._offset + [1 - 2 * b for b in path]

    def _raw_bounds(self, path: NodePath) -> list[int]:
        # incremental bounds at every node strictly below the root
        a, E = self.inst.a, self.suffix.E
        n = self.inst.n
        field = np.zeros(n, np.int64)
        fixed = 0
        out = []
        for g, s in enumerate(self.spins(path)):
            fixed += s * int(field[g])
            field[g + 1 :] += s * a[g, g + 1 :]
            if g >= self._offset:
                out.append(fixed - int(np.abs(field[g + 1 :]).sum()) + int(E[g + 1]))
        return out

    def raw_cost(self, path: NodePath) -> Cost:
        """Shifted bound at ``path`` before monotone wrapping."""
        if not path:
            return 0
        return self._raw_bounds(path)[-1] + self.inst.shift

    def children(self, path):
        if len(path) >= self.depth:
            return []
        return [path + (0,), path + (1,)]

    def cost(self, path):
        return max([0] + [b + self.inst.shift for b in self._raw_bounds(path)])

    def is_solution(self, path):
        return len(path) == self.depth

    def truncated_size(self, c: Cost, limit: int | None = None) -> int:
        if c < 0:
            return 0
        raw = 2**62 if c == INF else int(c) - self.inst.shift
        cap = 2**62 if limit is None else int(limit)
        return int(_kernels.count_truncated(self.inst.a, self.suffix.E, self.fix_first_spin, raw, cap))

    def depth_first(self, initial_incumbent: Cost = INF, order: str = "given") -> SearchOutcome:
        """Compiled equivalent of :func:`search.depth_first_incumbent`."""
        if initial_incumbent < 0:
            return SearchOutcome(None, INF, 1, 0)
        raw = 2**62 if initial_incumbent == INF else int(initial_incumbent) - self.inst.shift
        found, best, explored, x = _kernels.dfs_min(
            self.inst.a, self.suffix.E, 0, self.fix_first_spin, raw, order == "cost"
        )
        if not found:
            return SearchOutcome(None, INF, int(explored), 0)
        path = tuple(0 if s > 0 else 1 for s in x[self._offset :])
        cost = int(best) + self.inst.shift
        return SearchOutcome(path, cost, int(explored), (int(explored) - 1) // 2)

    def search_truncated(self, c: Cost):
        out = self.depth_first(c)
        if out.solution is None:
            return None
        return out.solution, out.cost


def sk_oracle(inst: DiscretizedSKInstance, suffix: SuffixMinima | None = None, fix_first_spin: bool = True) -> SKOracle:
    if suffix is None:
        suffix = suffix_minima(inst)
    return SKOracle(inst, suffix, fix_first_spin)


def save_instance(inst: SKInstance, path, p: int | None = None) -> None:
    """Write ``n p seed`` then ``i j a_ij`` lines (1-based, i < j)."""
    if p is None:
        p = default_precision(inst.n)
    seed = ":".join(str(s) for s in inst.seed) or "-"
    lines = [f"{inst.n} {p} {seed}"]
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            lines.append(f"{i + 1} {j + 1} {float(inst.a[i, j])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path) -> tuple[SKInstance, int]:
    """Parse an instance file; returns the instance and its precision."""
    path = Path(path)
    rows = [ln.split() for ln in path.read_text().splitlines() if ln.strip()]
    try:
        n, p = int(rows[0][0]), int(rows[0][1])
        seed_tok = rows[0][2] if len(rows[0]) > 2 else "-"
        seed = () if seed_tok == "-" else tuple(int(s) for s in seed_tok.split(":"))
        a = np.zeros((n, n))
        for r in rows[1:]:
            i, j = int(r[0]) - 1, int(r[1]) - 1
            if not 0 <= i < j < n:
                raise ValueError(f"bad coupling index pair ({i + 1}, {j + 1})")
            a[i, j] = float(r[2])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed instance file: {exc}") from exc
    return SKInstance(n, a, seed), p


@dataclass
class GroundState:
    energy: int  # discretized, unshifted
    spins: np.ndarray
    explored: int  # nodes explored by the top-level depth-first search
    oracle: SKOracle


def solve(inst: DiscretizedSKInstance, fix_first_spin: bool = True, order: str = "given") -> GroundState:
    """Ground state by depth-first branch-and-bound."""
    oracle = sk_oracle(inst, fix_first_spin=fix_first_spin)
    out = oracle.depth_first(order=order)
    spins = np.array(oracle.spins(out.solution))
    return GroundState(int(out.cost) - inst.shift, spins, out.explored_nodes, oracle)
