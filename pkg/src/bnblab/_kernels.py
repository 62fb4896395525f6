"""Compiled inner loops for the spin-glass branch-and-bound tree.

All kernels walk the binary tree whose depth-``l`` nodes fix spins
``start .. start+l-1`` of an integer coupling matrix ``a`` (strictly upper
triangular).  A node's raw bound is

    fixed(x) - sum_{j > l} |field_j(x)| + E[l]

and both ``fixed`` and ``field`` are updated incrementally, so each child
costs O(n).  Child 0 sets the spin to +1, child 1 to -1.

Pruning on raw bounds is equivalent to pruning on running-max costs: an
ancestor that survived is already <= the threshold.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def dfs_min(a, E, start, fix_first, bound, order_by_cost):
    """Depth-first search for the minimum-energy leaf with energy <= bound.

    Returns ``(found, best, explored, x)``; ``explored`` counts bound
    evaluations including the root, ``x`` is the best assignment of spins
    ``start..n-1`` (other entries zero).
    """
    n = a.shape[0]
    fields = np.zeros((n + 1, n), np.int64)
    fixed = np.zeros(n + 1, np.int64)
    b = np.zeros((n + 1, 2), np.int64)
    first = np.zeros(n + 1, np.int64)
    state = np.zeros(n + 1, np.int64)
    x = np.zeros(n, np.int64)
    bestx = np.zeros(n, np.int64)
    found = False
    best = bound
    explored = 1
    g0 = start
    if fix_first and start < n:
        x[start] = 1
        for j in range(start + 1, n):
            fields[start + 1, j] = a[start, j]
        g0 = start + 1
    if g0 >= n:
        # the root is already a complete assignment
        energy = 0
        if energy <= bound:
            bestx[:] = x
            return True, energy, explored, bestx
        return False, bound, explored, bestx
    lvl = g0
    state[lvl] = 0
    while lvl >= g0:
        st = state[lvl]
        if st == 0:
            for k in range(2):
                s = 1 - 2 * k
                f = fixed[lvl] + s * fields[lvl, lvl]
                acc = 0
                for j in range(lvl + 1, n):
                    acc += abs(fields[lvl, j] + s * a[lvl, j])
                b[lvl, k] = f - acc + E[lvl + 1]
            explored += 2
            if order_by_cost and b[lvl, 1] < b[lvl, 0]:
                first[lvl] = 1
            else:
                first[lvl] = 0
        elif st == 2:
            lvl -= 1
            continue
        state[lvl] = st + 1
        k = first[lvl] if st == 0 else 1 - first[lvl]
        c = b[lvl, k]
        if c > best:
            continue
        s = 1 - 2 * k
        x[lvl] = s
        if lvl + 1 == n:
            if (not found) or c < best:
                found = True
                best = c
                bestx[:] = x
            continue
        fixed[lvl + 1] = fixed[lvl] + s * fields[lvl, lvl]
        for j in range(lvl + 1, n):
            fields[lvl + 1, j] = fields[lvl, j] + s * a[lvl, j]
        lvl += 1
        state[lvl] = 0
    return found, best, explored, bestx


@njit(cache=True)
def count_truncated(a, E, fix_first, c, limit):
    """Number of nodes of the full tree (start = 0) with raw bound <= c.

    The root is always counted.  Stops once the count exceeds ``limit``.
    """
    n = a.shape[0]
    fields = np.zeros((n + 1, n), np.int64)
    fixed = np.zeros(n + 1, np.int64)
    state = np.zeros(n + 1, np.int64)
    total = 1
    g0 = 0
    if fix_first and n > 0:
        for j in range(1, n):
            fields[1, j] = a[0, j]
        g0 = 1
    lvl = g0
    while lvl >= g0:
        st = state[lvl]
        if st == 2 or lvl == n:
            lvl -= 1
            continue
        state[lvl] = st + 1
        s = 1 - 2 * st
        f = fixed[lvl] + s * fields[lvl, lvl]
        acc = 0
        for j in range(lvl + 1, n):
            v = fields[lvl, j] + s * a[lvl, j]
            fields[lvl + 1, j] = v
            acc += abs(v)
        if f - acc + E[lvl + 1] > c:
            continue
        total += 1
        if total > limit:
            return total
        fixed[lvl + 1] = f
        lvl += 1
        state[lvl] = 0
    return total


@njit(cache=True)
def brute_force_min(a):
    """Exact ground-state energy of ``sum_{i<j} a_ij x_i x_j`` by Gray code.

    Spin 0 is pinned to +1 (the energy is invariant under global flip).
    Works for float or integer matrices; returns ``(energy, x)``.
    """
    n = a.shape[0]
    x = np.ones(n, np.int64)
    sym = a + a.T
    local = np.zeros(n, sym.dtype)
    for i in range(n):
        for j in range(n):
            local[i] += sym[i, j] * x[j]
    energy = a[0, 0] * 0
    for i in range(n):
        for j in range(i + 1, n):
            energy += a[i, j] * x[i] * x[j]
    best = energy
    bestx = x.copy()
    m = n - 1
    for step in range(1, 1 << m):
        # flip the spin given by the lowest set bit of step
        bit = 0
        t = step
        while (t & 1) == 0:
            t >>= 1
            bit += 1
        i = bit + 1
        energy -= 2 * x[i] * local[i]
        x[i] = -x[i]
        for j in range(n):
            local[j] += 2 * x[i] * sym[j, i]
        if energy < best:
            best = energy
            bestx[:] = x
    return best, bestx
