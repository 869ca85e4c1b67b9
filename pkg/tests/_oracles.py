"""Independent reference computations used by the tests.

Nothing here calls into the compiled kernels.
"""

import itertools
import math

import numpy as np


def lp_vertex_enumeration(g, a, L, h):
    """Best vertex of {0<=x<=1, sum x = L, x.a >= h} by brute force.

    Vertices are either integral L-subsets or have exactly two fractional
    coordinates pinned by sum x = L and x.a = h. Returns (objective, x) or
    (None, None) when infeasible.
    """
    g = np.asarray(g, float)
    a = np.asarray(a, float)
    K = g.size
    best, best_x = -math.inf, None
    for U in itertools.combinations(range(K), L):
        x = np.zeros(K)
        x[list(U)] = 1.0
        if x @ a >= h and x @ g > best:
            best, best_x = float(x @ g), x
    for i, j in itertools.combinations(range(K), 2):
        if a[i] == a[j]:
            continue
        rest = [k for k in range(K) if k not in (i, j)]
        for m in range(max(0, L - 2), min(L, len(rest)) + 1):
            for U in itertools.combinations(rest, m):
                s = L - m
                r = h - a[list(U)].sum()
                xj = (r - a[i] * s) / (a[j] - a[i])
                xi = s - xj
                if -1e-12 <= xi <= 1 + 1e-12 and -1e-12 <= xj <= 1 + 1e-12:
                    x = np.zeros(K)
                    x[list(U)] = 1.0
                    x[i], x[j] = xi, xj
                    if x @ g > best:
                        best, best_x = float(x @ g), x
    if best_x is None:
        return None, None
    return best, best_x


def naive_means(samples):
    """Plain-Python running sums -> (n, a_bar, g_bar) with the n+1 denominator."""
    n = 0
    sa = 0.0
    sg = 0.0
    for a, b in samples:
        n += 1
        sa += a
        sg += a * b
    return n, sa / (n + 1), sg / (n + 1)
