"""Depth-first enumeration of integer points inside an ellipsoid.

Both kernels work on an upper-triangular ``R`` and target ``q`` (real
coordinates, last coordinate enumerated first) and visit every integer
vector ``x`` with ``||R x - q||^2 <= r2`` inside optional per-coordinate
bounds ``lo <= x <= hi``. They return -1 once ``budget`` nodes are visited.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _level_range(R, q, x, k, n, rem, lo, hi):
    s = q[k]
    for j in range(k + 1, n):
        s -= R[k, j] * x[j]
    rkk = R[k, k]
    c = s / rkk
    w = math.sqrt(rem) / abs(rkk) if rem > 0.0 else 0.0
    a = np.ceil(c - w)
    b = np.floor(c + w)
    if a < lo[k]:
        a = lo[k]
    if b > hi[k]:
        b = hi[k]
    return s, a, b


@njit(cache=True)
def count_points(R, q, r2, lo, hi, limit, budget):
    """Number of lattice points within the ellipsoid, capped at ``limit``."""
    n = R.shape[0]
    if r2 < 0.0:
        return 0
    x = np.zeros(n, dtype=np.float64)
    ub = np.zeros(n, dtype=np.float64)
    s_at = np.zeros(n, dtype=np.float64)
    dist = np.zeros(n + 1, dtype=np.float64)
    k = n - 1
    s, a, b = _level_range(R, q, x, k, n, r2, lo, hi)
    s_at[k] = s
    x[k] = a
    ub[k] = b
    count = 0
    nodes = 0
    while True:
        if x[k] > ub[k]:
            k += 1
            if k == n:
                return count
            x[k] += 1.0
            continue
        nodes += 1
        if nodes > budget:
            return -1
        d = R[k, k] * x[k] - s_at[k]
        nd = dist[k + 1] + d * d
        if nd > r2:
            x[k] += 1.0
            continue
        if k == 0:
            count += 1
            if count >= limit:
                return count
            x[0] += 1.0
            continue
        dist[k] = nd
        k -= 1
        s, a, b = _level_range(R, q, x, k, n, r2 - nd, lo, hi)
        s_at[k] = s
        x[k] = a
        ub[k] = b


@njit(cache=True)
def rank_point(R, q, r2, lo, hi, target, d0, tol, budget):
    """Count points strictly closer than ``target`` (squared distance ``d0``).

    Points within ``tol`` of ``d0`` count as ties and are ranked ahead of
    ``target`` when lexicographically smaller. ``target`` itself is skipped.
    """
    n = R.shape[0]
    if r2 < 0.0:
        return 0
    x = np.zeros(n, dtype=np.float64)
    ub = np.zeros(n, dtype=np.float64)
    s_at = np.zeros(n, dtype=np.float64)
    dist = np.zeros(n + 1, dtype=np.float64)
    k = n - 1
    s, a, b = _level_range(R, q, x, k, n, r2, lo, hi)
    s_at[k] = s
    x[k] = a
    ub[k] = b
    ahead = 0
    nodes = 0
    while True:
        if x[k] > ub[k]:
            k += 1
            if k == n:
                return ahead
            x[k] += 1.0
            continue
        nodes += 1
        if nodes > budget:
            return -1
        d = R[k, k] * x[k] - s_at[k]
        nd = dist[k + 1] + d * d
        if nd > r2:
            x[k] += 1.0
            continue
        if k == 0:
            same = True
            for j in range(n):
                if x[j] != target[j]:
                    same = False
                    break
            if not same:
                if nd < d0 - tol:
                    ahead += 1
                elif nd <= d0 + tol:
                    for j in range(n):
                        if x[j] != target[j]:
                            if x[j] < target[j]:
                                ahead += 1
                            break
            x[0] += 1.0
            continue
        dist[k] = nd
        k -= 1
        s, a, b = _level_range(R, q, x, k, n, r2 - nd, lo, hi)
        s_at[k] = s
        x[k] = a
        ub[k] = b
