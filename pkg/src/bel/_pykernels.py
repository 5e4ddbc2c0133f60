"""Pure-Python implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` mirrors them line for
line and must return identical results.
"""
from __future__ import annotations

import sys

# Relative slack when comparing accumulated roof sums against a budget.
ROOF_RTOL = 1e-12


def reduce_columns(columns):
    """Standard column reduction of an F2 boundary matrix.

    ``columns[j]`` lists the row indices of the nonzero entries of column j
    (any order). Returns ``low`` with ``low[j]`` the pivot row of the reduced
    column j, or -1 when it reduced to zero.
    """
    n = len(columns)
    cols = [set(c) for c in columns]
    low = [-1] * n
    owner = {}
    for j in range(n):
        col = cols[j]
        while col:
            piv = max(col)
            k = owner.get(piv)
            if k is None:
                owner[piv] = j
                low[j] = piv
                break
            col ^= cols[k]
    return low


def lyndon_census(adj, roof, smax, first_symbols=None):
    """Count admissible Lyndon words by symbol-count vector.

    A Lyndon word w = w_1..w_n is admissible when every transition
    w_i -> w_{i+1} and the closing transition w_n -> w_1 is allowed by
    ``adj``. Only words whose roof sum is at most ``smax`` are visited.
    Enumeration is the FKM prenecklace recursion with branches cut as soon
    as a linear transition is forbidden or the roof budget is exceeded.

    Returns a dict mapping the count tuple (c_0, ..., c_{k-1}) to the number
    of such words.
    """
    k = len(roof)
    budget = smax * (1.0 + ROOF_RTOL) + ROOF_RTOL
    rmin = min(roof)
    nmax = int(budget // rmin) if rmin > 0 else 0
    if first_symbols is None:
        first_symbols = range(k)
    census = {}
    if nmax < 1:
        return census

    a = [0] * (nmax + 2)
    counts = [0] * k
    ok = [[bool(adj[i][j]) for j in range(k)] for i in range(k)]

    limit = sys.getrecursionlimit()
    if nmax + 50 > limit:
        sys.setrecursionlimit(nmax + 50)

    def visit(t, p, total):
        # a[1..t-1] is a prenecklace whose longest Lyndon prefix has length p.
        length = t - 1
        if p == length and ok[a[length]][a[1]]:
            key = tuple(counts)
            census[key] = census.get(key, 0) + 1
        if length >= nmax:
            return
        prev = a[length]
        base = a[t - p]
        for j in range(base, k):
            if not ok[prev][j]:
                continue
            nt = total + roof[j]
            if nt > budget:
                continue
            a[t] = j
            counts[j] += 1
            visit(t + 1, p if j == base else t, nt)
            counts[j] -= 1

    for first in first_symbols:
        if roof[first] > budget:
            continue
        a[1] = first
        counts[first] += 1
        visit(2, 1, roof[first])
        counts[first] -= 1
    return census
