"""Abstract branch-and-bound tree model.

A search tree is exposed through a :class:`ProblemOracle`: nodes are
identified by the tuple of branch choices leading to them from the root,
and the oracle answers ``children``, ``cost`` and ``is_solution`` queries.
Costs are nonnegative integers or ``INF`` (no valid solution below).
"""

from __future__ import annotations

import math
from typing import Sequence, Union

INF = math.inf

Cost = Union[int, float]
NodePath = tuple

ROOT: NodePath = ()

INT64_MAX = 2**63 - 1


def is_finite(cost: Cost) -> bool:
    return cost != INF


def max_nodes(k: int, d: int) -> int:
    """Number of nodes in a complete ``k``-ary tree of depth ``d``."""
    if k <= 1:
        return d + 1
    return (k ** (d + 1) - 1) // (k - 1)


class ProblemOracle:
    """Query interface over an implicit rooted tree.

    Subclasses implement :meth:`children`, :meth:`cost` and
    :meth:`is_solution`, and set the metadata attributes ``depth`` (bound
    on path length), ``branching`` (max children per node), ``c_max``
    (bound on finite costs) and ``t_max`` (bound on the node count).

    Oracles are read-only after construction, so a single instance can be
    queried from several threads.
    """

    depth: int
    branching: int
    c_max: int
    t_max: int

    def children(self, path: NodePath) -> list[NodePath]:
        raise NotImplementedError

    def cost(self, path: NodePath) -> Cost:
        raise NotImplementedError

    def is_solution(self, path: NodePath) -> bool:
        raise NotImplementedError

    def root_alive(self) -> bool:
        """False when the root itself has been cut away (truncated trees)."""
        return True

    # Hooks that accelerated oracles may override.  The defaults fall back
    # to the generic traversals.

    def truncated_size(self, c: Cost, limit: int | None = None) -> int:
        return count_nodes(truncate(self, c), limit=limit)

    def search_truncated(self, c: Cost):
        """Lowest-cost solution with cost <= c, as ``(path, cost)`` or None."""
        from .search import depth_first_incumbent

        out = depth_first_incumbent(self, c)
        if out.solution is None:
            return None
        return out.solution, out.cost


class TreeOracle(ProblemOracle):
    """Explicit tree given as nested ``(cost, [children...])`` tuples.

    Leaves with finite cost are solutions.  Meant for fixtures and tests.
    """

    def __init__(self, tree, c_max: int | None = None):
        self._tree = tree
        depth, branching, finite_max = 0, 0, 0
        stack = [(tree, 0)]
        while stack:
            (c, kids), d = stack.pop()
            depth = max(depth, d)
            branching = max(branching, len(kids))
            if is_finite(c):
                finite_max = max(finite_max, int(c))
            stack.extend((kid, d + 1) for kid in kids)
        self.depth = depth
        self.branching = max(branching, 1)
        self.c_max = finite_max if c_max is None else c_max
        self.t_max = max_nodes(self.branching, depth)

    def _node(self, path: NodePath):
        node = self._tree
        for i in path:
            node = node[1][i]
        return node

    def children(self, path):
        return [path + (i,) for i in range(len(self._node(path)[1]))]

    def cost(self, path):
        return self._node(path)[0]

    def is_solution(self, path):
        c, kids = self._node(path)
        return not kids and is_finite(c)


def example_tree() -> TreeOracle:
    """The 13-node example tree with optimal solution cost 4."""
    leaf = lambda c: (c, [])
    left = (1, [leaf(INF), (2, [leaf(7), leaf(INF)])])
    right = (3, [(3, [leaf(6), leaf(4)]), (5, [leaf(6), leaf(8)])])
    return TreeOracle((1, [left, right]), c_max=8)


class _Wrapper(ProblemOracle):
    def __init__(self, inner: ProblemOracle):
        self.inner = inner
        self.depth = inner.depth
        self.branching = inner.branching
        self.c_max = inner.c_max
        self.t_max = inner.t_max

    def children(self, path):
        return self.inner.children(path)

    def cost(self, path):
        return self.inner.cost(path)

    def is_solution(self, path):
        return self.inner.is_solution(path)

    def root_alive(self):
        return self.inner.root_alive()


class MonotoneOracle(_Wrapper):
    """Reports the running maximum of costs along the root-to-node path."""

    def cost(self, path):
        best = self.inner.cost(ROOT)
        for i in range(1, len(path) + 1):
            best = max(best, self.inner.cost(path[:i]))
        return best


class TruncatedOracle(_Wrapper):
    """Drops every node whose cost exceeds ``bound``."""

    def __init__(self, inner: ProblemOracle, bound: Cost):
        super().__init__(inner)
        self.bound = bound

    def _keep(self, cost: Cost) -> bool:
        return cost <= self.bound

    def children(self, path):
        return [w for w in self.inner.children(path) if self._keep(self.inner.cost(w))]

    def cost(self, path):
        c = self.inner.cost(path)
        return c if self._keep(c) else INF

    def root_alive(self):
        return self.inner.root_alive() and self._keep(self.inner.cost(ROOT))


class BinarizedOracle(_Wrapper):
    """Replaces every node of degree k > 2 by a balanced binary tree.

    A node of the binarized tree is a tuple of 0/1 choices.  It decodes to
    an original node plus a half-open range ``[lo, hi)`` of that node's
    children; ranges of width > 1 below the original node are splitter
    nodes carrying the original node's cost.
    """

    def __init__(self, inner: ProblemOracle):
        super().__init__(inner)
        self.branching = 2
        k = max(inner.branching, 2)
        self.depth = inner.depth * math.ceil(math.log2(k))
        self.t_max = 2 * inner.t_max

    def _decode(self, path: NodePath):
        orig = ROOT
        kids = None  # children of ``orig`` under the active range
        lo = hi = 0
        for bit in path:
            if kids is None:
                kids = self.inner.children(orig)
                lo, hi = 0, len(kids)
            if hi - lo <= 2:
                # a range of width <= 2 branches directly to original children
                orig = kids[lo + bit]
                kids = None
                continue
            mid = lo + (hi - lo) // 2
            lo, hi = (lo, mid) if bit == 0 else (mid, hi)
            if hi - lo == 1:
                orig = kids[lo]
                kids = None
        return orig, kids, lo, hi

    def children(self, path):
        orig, kids, lo, hi = self._decode(path)
        if kids is None:
            kids = self.inner.children(orig)
            lo, hi = 0, len(kids)
        width = hi - lo
        if width <= 2:
            return [path + (b,) for b in range(width)]
        return [path + (0,), path + (1,)]

    def cost(self, path):
        return self.inner.cost(self._decode(path)[0])

    def is_solution(self, path):
        orig, kids, _, _ = self._decode(path)
        return kids is None and self.inner.is_solution(orig)

    def original(self, path: NodePath) -> NodePath | None:
        """Original node for ``path``, or None for a splitter."""
        orig, kids, _, _ = self._decode(path)
        return orig if kids is None else None


def monotone_wrap(oracle: ProblemOracle) -> ProblemOracle:
    return MonotoneOracle(oracle)


def truncate(oracle: ProblemOracle, c: Cost) -> ProblemOracle:
    if c == INF:
        return oracle
    return TruncatedOracle(oracle, c)


def binarize(oracle: ProblemOracle) -> ProblemOracle:
    if oracle.branching <= 2:
        return oracle
    return BinarizedOracle(oracle)


def count_nodes(oracle: ProblemOracle, limit: int | None = None) -> int:
    """Exact number of nodes reachable from the root.

    With ``limit`` the traversal stops as soon as the count exceeds it and
    returns ``limit + 1``.
    """
    if not oracle.root_alive():
        return 0
    total = 0
    stack = [ROOT]
    while stack:
        path = stack.pop()
        total += 1
        if limit is not None and total > limit:
            return total
        if total > INT64_MAX:
            raise OverflowError("node count exceeds 64-bit range")
        stack.extend(oracle.children(path))
    return total


def iter_nodes(oracle: ProblemOracle):
    """Depth-first preorder over all reachable node paths."""
    if not oracle.root_alive():
        return
    stack = [ROOT]
    while stack:
        path = stack.pop()
        yield path
        stack.extend(reversed(oracle.children(path)))


def running_max(costs: Sequence[Cost]) -> list[Cost]:
    out, best = [], -INF
    for c in costs:
        best = max(best, c)
        out.append(best)
    return out
