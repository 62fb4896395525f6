"""0/1 knapsack as an LP-relaxation branch-and-bound tree."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import INF, NodePath, ProblemOracle, max_nodes


class Infeasible(ValueError):
    """Fixed items already exceed the capacity."""


@dataclass(frozen=True)
class KnapsackInstance:
    weights: tuple[int, ...]
    values: tuple[int, ...]
    capacity: int

    def __post_init__(self):
        if len(self.weights) != len(self.values) or not self.weights:
            raise ValueError("need the same positive number of weights and values")
        if min(self.weights) <= 0 or min(self.values) <= 0:
            raise ValueError("weights and values must be positive")
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.weights)

    @cached_property
    def greedy_order(self) -> list[int]:
        # decreasing value density, ties by smaller index
        return sorted(range(self.n), key=lambda i: (-Fraction(self.values[i], self.weights[i]), i))


def random_instance(n: int, seed, max_weight: int = 30, max_value: int = 30, capacity: int | None = None):
    rng = np.random.default_rng(seed)
    w = rng.integers(1, max_weight + 1, n)
    v = rng.integers(1, max_value + 1, n)
    if capacity is None:
        capacity = int(rng.integers(0, int(w.sum()) // 2 + 2))
    return KnapsackInstance(tuple(map(int, w)), tuple(map(int, v)), int(capacity))


def dantzig_bound(inst: KnapsackInstance, fixed: dict[int, int]):
    """LP relaxation with some variables fixed.

    Returns ``(value, fractional_item)``: the relaxation optimum as a
    Fraction and the index of the single fractionally packed item (None if
    the relaxed solution is integral).

    Raises:
        Infeasible: if the items fixed to 1 do not fit.
    """
    room = inst.capacity - sum(inst.weights[i] for i, x in fixed.items() if x)
    if room < 0:
        raise Infeasible(f"fixed items overflow capacity by {-room}")
    value = Fraction(sum(inst.values[i] for i, x in fixed.items() if x))
    for i in inst.greedy_order:
        if i in fixed:
            continue
        if room == 0:
            break
        w = inst.weights[i]
        if w <= room:
            room -= w
            value += inst.values[i]
        else:
            return value + Fraction(inst.values[i] * room, w), i
    return value, None


def _greedy_fill(inst: KnapsackInstance, fixed: dict[int, int]) -> dict[int, int]:
    """Integral relaxed solution implied by ``fixed`` (assumes no fractional item)."""
    room = inst.capacity - sum(inst.weights[i] for i, x in fixed.items() if x)
    x = dict(fixed)
    for i in inst.greedy_order:
        if i in x:
            continue
        take = inst.weights[i] <= room
        x[i] = int(take)
        if take:
            room -= inst.weights[i]
        else:
            room = 0
    return x


class KnapsackOracle(ProblemOracle):
    """Branch on the fractional item; child 0 packs it, child 1 leaves it out.

    Cost is ``sum(values) - floor(relaxation)``, so minimal cost means
    maximal value.  A node whose relaxation is integral is a solution leaf;
    an overfull node costs INF.
    """

    def __init__(self, inst: KnapsackInstance):
        self.inst = inst
        self.total_value = sum(inst.values)
        self.depth = inst.n
        self.branching = 2
        self.c_max = self.total_value
        self.t_max = max_nodes(2, inst.n)

    def fixed_vars(self, path: NodePath):
        """Replay ``path`` from the root; returns (fixed, relaxation) or (fixed, None) if infeasible."""
        fixed: dict[int, int] = {}
        relax = dantzig_bound(self.inst, fixed)
        for choice in path:
            item = relax[1]
            if item is None:
                raise KeyError(f"path {path} continues below a leaf")
            fixed[item] = 1 - choice
            try:
                relax = dantzig_bound(self.inst, fixed)
            except Infeasible:
                return fixed, None
        return fixed, relax

    def children(self, path):
        _, relax = self.fixed_vars(path)
        if relax is None or relax[1] is None:
            return []
        return [path + (0,), path + (1,)]

    def cost(self, path):
        _, relax = self.fixed_vars(path)
        if relax is None:
            return INF
        return self.total_value - int(relax[0])  # floor for nonnegative Fractions

    def is_solution(self, path):
        _, relax = self.fixed_vars(path)
        return relax is not None and relax[1] is None

    def solution_items(self, path: NodePath) -> list[int]:
        fixed, relax = self.fixed_vars(path)
        if relax is None or relax[1] is not None:
            raise ValueError(f"{path} is not a solution node")
        x = _greedy_fill(self.inst, fixed)
        return sorted(i for i, v in x.items() if v)

    def value_of(self, cost) -> int:
        return self.total_value - int(cost)


def knapsack_oracle(inst: KnapsackInstance) -> KnapsackOracle:
    return KnapsackOracle(inst)


def dp_oracle(inst: KnapsackInstance, max_cells: int = 10**8) -> int:
    """Exact optimum by dynamic programming over residual capacity."""
    if inst.n * (inst.capacity + 1) > max_cells:
        raise MemoryError(f"DP table of {inst.n} x {inst.capacity + 1} exceeds {max_cells} cells")
    best = np.zeros(inst.capacity + 1, dtype=np.int64)
    for w, v in zip(inst.weights, inst.values):
        if w <= inst.capacity:
            best[w:] = np.maximum(best[w:], best[:-w] + v)
    return int(best[-1])


def save_instance(inst: KnapsackInstance, path) -> None:
    lines = [f"{inst.n} {inst.capacity}"] + [f"{w} {v}" for w, v in zip(inst.weights, inst.values)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path) -> KnapsackInstance:
    path = Path(path)
    rows = [ln.split() for ln in path.read_text().splitlines() if ln.strip()]
    try:
        n, cap = int(rows[0][0]), int(rows[0][1])
        items = [(int(r[0]), int(r[1])) for r in rows[1 : n + 1]]
        if len(items) != n:
            raise ValueError(f"expected {n} item lines, found {len(items)}")
        return KnapsackInstance(tuple(w for w, _ in items), tuple(v for _, v in items), cap)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed knapsack file: {exc}") from exc
