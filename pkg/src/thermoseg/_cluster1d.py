"""Exact 1-D sum-of-squares clustering on weighted distinct values.

Clusters of an SSE-optimal 1-D k-means partition are intervals in sorted
order, and an optimum always exists that keeps equal values together, so
the search runs over cut positions between distinct values. k = 2 is a
vectorized exhaustive split; k >= 3 uses the dynamic program with
divide-and-conquer over the (monotone) optimal cut positions.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError, ParameterError


def _distinct_weighted(values: np.ndarray):
    vals = np.asarray(values, dtype=np.float64).ravel()
    if vals.size == 0:
        raise DegenerateInputError("cannot cluster an empty sample")
    if not np.isfinite(vals).all():
        raise ParameterError("values must be finite")
    uniq, counts = np.unique(vals, return_counts=True)
    return uniq, counts.astype(np.float64)


class _IntervalCost:
    """Weighted within-interval SSE via prefix sums; cost(i, j) inclusive."""

    def __init__(self, uniq: np.ndarray, weights: np.ndarray):
        self.w = np.concatenate([[0.0], np.cumsum(weights)])
        self.s1 = np.concatenate([[0.0], np.cumsum(weights * uniq)])
        self.s2 = np.concatenate([[0.0], np.cumsum(weights * uniq * uniq)])

    def cost(self, i: int, j: int) -> float:
        w = self.w[j + 1] - self.w[i]
        s1 = self.s1[j + 1] - self.s1[i]
        s2 = self.s2[j + 1] - self.s2[i]
        return s2 - s1 * s1 / w

    def mean(self, i: int, j: int) -> float:
        return (self.s1[j + 1] - self.s1[i]) / (self.w[j + 1] - self.w[i])


def best_two_split(uniq: np.ndarray, weights: np.ndarray):
    """Optimal 2-cluster cut; returns (cut_index, low_mean, high_mean).

    cut_index c puts uniq[:c] in the low cluster. Equal computed costs take
    the smallest cut; mathematically tied splits may resolve either way
    depending on rounding, but always the same way for the same input.
    """
    if uniq.size < 2:
        raise DegenerateInputError(
            f"need at least 2 distinct values, got {uniq.size}"
        )
    w = np.cumsum(weights)
    s1 = np.cumsum(weights * uniq)
    s2 = np.cumsum(weights * uniq * uniq)
    total_w, total_s1, total_s2 = w[-1], s1[-1], s2[-1]

    wl = w[:-1]
    sl = s1[:-1]
    ql = s2[:-1]
    wr = total_w - wl
    sr = total_s1 - sl
    qr = total_s2 - ql
    sse = (ql - sl * sl / wl) + (qr - sr * sr / wr)
    cut = int(np.argmin(sse)) + 1
    low_mean = float(sl[cut - 1] / wl[cut - 1])
    high_mean = float((total_s1 - sl[cut - 1]) / (total_w - wl[cut - 1]))
    return cut, low_mean, high_mean


def kmeans_1d_cuts(values: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Exact k-means over a 1-D sample.

    Returns (distinct values, cut indices of length k-1, cluster means).
    Cut c_m is the first distinct-value index of cluster m+1.
    """
    if not (isinstance(k, int) and k >= 1):
        raise ParameterError(f"k must be an int >= 1, got {k!r}")
    uniq, weights = _distinct_weighted(values)
    if uniq.size < k:
        raise DegenerateInputError(
            f"need at least {k} distinct values, got {uniq.size}"
        )
    ic = _IntervalCost(uniq, weights)
    n = uniq.size
    if k == 1:
        return uniq, np.array([], dtype=np.int64), [ic.mean(0, n - 1)]
    if k == 2:
        cut, lo, hi = best_two_split(uniq, weights)
        return uniq, np.array([cut], dtype=np.int64), [lo, hi]

    # DP over layers: D[m][i] = best cost of clustering uniq[0..i] into m+1 clusters
    prev = np.array([ic.cost(0, i) for i in range(n)])
    cuts_by_layer = []
    for m in range(1, k):
        cur = np.full(n, np.inf)
        arg = np.zeros(n, dtype=np.int64)

        def solve(lo_i, hi_i, lo_j, hi_j):
            if lo_i > hi_i:
                return
            mid = (lo_i + hi_i) // 2
            best_cost = np.inf
            best_j = lo_j
            j_hi = min(hi_j, mid)
            for j in range(max(lo_j, m), j_hi + 1):
                c = prev[j - 1] + ic.cost(j, mid)
                if c < best_cost - 1e-15:
                    best_cost = c
                    best_j = j
            cur[mid] = best_cost
            arg[mid] = best_j
            solve(lo_i, mid - 1, lo_j, best_j)
            solve(mid + 1, hi_i, best_j, hi_j)

        solve(m, n - 1, m, n - 1)
        cuts_by_layer.append(arg.copy())
        prev = cur

    cuts = np.zeros(k - 1, dtype=np.int64)
    end = n - 1
    for m in range(k - 1, 0, -1):
        cuts[m - 1] = cuts_by_layer[m - 1][end]
        end = cuts[m - 1] - 1
    bounds = [0, *cuts.tolist(), n]
    means = [ic.mean(bounds[m], bounds[m + 1] - 1) for m in range(k)]
    return uniq, cuts, means
