"""Classical branch-and-bound search strategies and truncated-tree statistics."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .core import INF, Cost, NodePath, ProblemOracle, ROOT, count_nodes, truncate


class SearchMemoryError(MemoryError):
    """Best-first search exceeded its live-node budget."""


@dataclass
class SearchOutcome:
    solution: NodePath | None
    cost: Cost
    explored_nodes: int
    queries: int
    # queried nodes whose cost is <= the returned optimum
    settled_nodes: int = 0


@dataclass
class TreeStats:
    total_nodes: int
    leaf_count: int
    min_solution_cost: Cost
    truncated_size_at_min: int


def best_first(oracle: ProblemOracle, max_live: int = 10_000_000) -> SearchOutcome:
    """Expand the cheapest live node until a solution is popped.

    Ties are broken by depth (deeper first) and then by path order, so runs
    are reproducible.  ``explored_nodes`` counts cost queries and
    ``queries`` counts children queries.

    Raises:
        SearchMemoryError: if more than ``max_live`` nodes are live at once.
    """
    if not oracle.root_alive():
        return SearchOutcome(None, INF, 0, 0)
    root_cost = oracle.cost(ROOT)
    explored, expansions = 1, 0
    queried_costs = [root_cost]
    live = []
    if root_cost != INF:
        live.append((root_cost, 0, ROOT))
    while live:
        cost, _, path = heapq.heappop(live)
        if oracle.is_solution(path):
            settled = sum(1 for c in queried_costs if c <= cost)
            return SearchOutcome(path, cost, explored, expansions, settled)
        expansions += 1
        for child in oracle.children(path):
            c = oracle.cost(child)
            explored += 1
            queried_costs.append(c)
            if c == INF:
                continue
            heapq.heappush(live, (c, -len(child), child))
        if len(live) > max_live:
            raise SearchMemoryError(
                f"best-first search holds {len(live)} live nodes (limit {max_live})"
            )
    return SearchOutcome(None, INF, explored, expansions, explored)


def depth_first_incumbent(
    oracle: ProblemOracle, initial_incumbent: Cost = INF, order: str = "given"
) -> SearchOutcome:
    """Depth-first branch-and-bound with an incumbent.

    A node is pruned when its cost is strictly greater than the incumbent
    (or infinite), so subtrees tied with the incumbent are still visited.
    A solution is recorded when its cost is <= ``initial_incumbent`` and
    strictly better than any solution found so far.

    Args:
        oracle: monotone problem oracle.
        initial_incumbent: known upper bound on the optimum, INF if none.
        order: ``"given"`` visits children in oracle order, ``"cost"``
            visits cheaper children first (stable).
    """
    if not oracle.root_alive():
        return SearchOutcome(None, INF, 0, 0)
    bound = initial_incumbent
    best_path, best_cost = None, INF
    explored, expansions = 1, 0
    root_cost = oracle.cost(ROOT)
    if root_cost == INF or root_cost > bound:
        return SearchOutcome(None, INF, explored, expansions)
    if oracle.is_solution(ROOT):
        return SearchOutcome(ROOT, root_cost, explored, expansions, 1)

    # each frame: iterator over (cost, child) still to visit
    stack = []

    def expand(path):
        nonlocal explored, expansions
        expansions += 1
        kids = [(oracle.cost(w), w) for w in oracle.children(path)]
        explored += len(kids)
        if order == "cost":
            kids.sort(key=lambda t: t[0])
        return iter(kids)

    stack.append(expand(ROOT))
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            continue
        c, path = nxt
        if c == INF or c > bound:
            continue
        if oracle.is_solution(path):
            if best_path is None or c < best_cost:
                best_path, best_cost, bound = path, c, c
            continue
        stack.append(expand(path))
    return SearchOutcome(best_path, best_cost, explored, expansions)


def truncated_size(oracle: ProblemOracle, c: Cost, limit: int | None = None) -> int:
    """Size of the tree truncated at cost ``c`` (capped at ``limit + 1``)."""
    return oracle.truncated_size(c, limit)


def generic_truncated_size(oracle: ProblemOracle, c: Cost, limit: int | None = None) -> int:
    return count_nodes(truncate(oracle, c), limit=limit)


def tree_stats(oracle: ProblemOracle) -> TreeStats:
    total = leaves = 0
    stack = [ROOT]
    while stack:
        path = stack.pop()
        total += 1
        kids = oracle.children(path)
        if not kids:
            leaves += 1
        stack.extend(kids)
    c_min = best_first(oracle).cost
    t_min = total if c_min == INF else truncated_size(oracle, c_min)
    return TreeStats(total, leaves, c_min, t_min)
