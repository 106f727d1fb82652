"""Utility functions over (dataset, quantile-candidate) pairs.

Three utilities are provided:

* ``u_je`` penalises deviations of the interval counts from n*(p_i - p_{i-1});
* ``u_is_tilde`` is the almost-everywhere simplification of the inverse
  sensitivity with half-open bins and ceil-rank targets;
* ``u_is_exact`` is the collision-free inverse sensitivity, with a closed
  first bin and an extra +1 whenever a bin in excess (or exactly full) must
  give up a point for its quantile.

``brute_force_inverse_sensitivity`` is the independent oracle: an exhaustive
search over the minimal number of substitutions that force the empirical
quantiles to a target vector.  It never looks at the closed-form utilities.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import Bounds, ceil_rank

__all__ = [
    "u_je",
    "u_is_tilde",
    "u_is_exact",
    "brute_force_inverse_sensitivity",
]

# Convention adopted for the indicator on R+: zero counts as non-negative,
# so a bin that is exactly full still pays the +1 replacement cost.  The
# brute-force oracle adjudicates this choice in the tests.


def _bin_counts(x_sorted: np.ndarray, q: np.ndarray, bounds: Bounds, first_closed: bool) -> np.ndarray:
    """Counts of data points per quantile interval.

    Bin i (1-indexed, i = 1..m+1) is (q_{i-1}, q_i] with q_0 = a, q_{m+1} = b.
    With `first_closed`, bin 1 is [a, q_1] instead.
    """
    edges_hi = np.append(q, bounds.b)
    edges_lo = np.concatenate(([bounds.a], q))
    hi = np.searchsorted(x_sorted, edges_hi, side="right")
    lo = np.searchsorted(x_sorted, edges_lo, side="right")
    counts = hi - lo
    if first_closed:
        counts[0] = hi[0]
    return counts


def _prepare(x, q):
    x_sorted = np.sort(np.asarray(x, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    return x_sorted, q


def u_je(x, q, p, bounds: Bounds) -> float:
    """JointExp utility -(1/2) sum |n(p_i - p_{i-1}) - #(X in (q_{i-1}, q_i])|."""
    x_sorted, q = _prepare(x, q)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    n = x_sorted.size
    targets = n * np.diff(np.concatenate(([0.0], p, [1.0])))
    delta = targets - _bin_counts(x_sorted, q, bounds, first_closed=False)
    return -0.5 * float(np.abs(delta).sum())


def _rank_targets(n: int, p: np.ndarray) -> np.ndarray:
    """Per-bin targets ceil(n p_i) - ceil(n p_{i-1}) with rank 0 and n at the ends."""
    ranks = np.array([0] + [ceil_rank(n, pj) for pj in p] + [n])
    return np.diff(ranks)


def u_is_tilde(x, q, p, bounds: Bounds) -> float:
    """Simplified inverse-sensitivity utility (valid up to Lebesgue-null sets)."""
    x_sorted, q = _prepare(x, q)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    n = x_sorted.size
    delta = _bin_counts(x_sorted, q, bounds, first_closed=False) - _rank_targets(n, p)
    indicators = (delta[:-1] >= 0).sum()  # bins 1..m only
    return -(0.5 * float(np.abs(delta).sum()) + float(indicators))


def u_is_exact(x, q, p, bounds: Bounds) -> float:
    """Exact inverse-sensitivity utility for collision-free candidates.

    Requires q strictly increasing and disjoint from the dataset (exact
    float comparison); the first bin is the closed interval [a, q_1].
    """
    x_sorted, q = _prepare(x, q)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    n = x_sorted.size
    if np.any(np.diff(q) <= 0):
        raise ValueError("q must be strictly increasing (collision within q)")
    pos = np.searchsorted(x_sorted, q)
    if np.any((pos < n) & (x_sorted[np.minimum(pos, n - 1)] == q)):
        raise ValueError("q collides with a data point")
    delta = _bin_counts(x_sorted, q, bounds, first_closed=True) - _rank_targets(n, p)
    m = q.size
    # Indicator fires on the closed first bin and on bins 2..m, never on m+1.
    indicators = (delta[0] >= 0) + (delta[1:m] >= 0).sum()
    return -(0.5 * float(np.abs(delta).sum()) + float(indicators))


def _region_classes(q: np.ndarray, bounds: Bounds):
    """Classes of values relative to q: R_0, {q_1}, R_1, ..., {q_m}, R_m.

    Class 2j is the open region between q_j and q_{j+1} (clipped to [a, b]),
    class 2j+1 is the singleton {q_{j+1}}.  Returns the per-class
    realizability flags (whether a fresh point can be placed in the class).
    """
    m = q.size
    edges = np.concatenate(([bounds.a], q, [bounds.b]))
    realizable = []
    for c in range(2 * m + 1):
        if c % 2 == 1:
            realizable.append(True)  # the quantile value itself
        else:
            j = c // 2
            lo, hi = edges[j], edges[j + 1]
            if j == 0:
                lo_ok = hi > lo  # [a, q_1) non-empty
            elif j == m:
                lo_ok = hi > lo  # (q_m, b] non-empty
            else:
                lo_ok = hi > lo  # open (q_j, q_{j+1}) non-empty
            realizable.append(bool(lo_ok))
    return realizable


def _classify(x_sorted: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Counts of data points in each of the 2m+1 classes of _region_classes."""
    m = q.size
    counts = np.zeros(2 * m + 1, dtype=int)
    lo = np.searchsorted(x_sorted, q, side="left")
    hi = np.searchsorted(x_sorted, q, side="right")
    prev = 0
    for j in range(m):
        counts[2 * j] = lo[j] - prev
        counts[2 * j + 1] = hi[j] - lo[j]
        prev = hi[j]
    counts[2 * m] = x_sorted.size - prev
    return counts


def brute_force_inverse_sensitivity(x, q, p, bounds: Bounds) -> int:
    """Minimal k such that k substitutions in x yield empirical quantiles q.

    Exhaustive search over k = 0, 1, ..., n.  Only the placement of values
    relative to the target quantiles matters for order statistics, so the
    search enumerates, for every k, all ways of removing k points from the
    2m+1 order classes of x and re-inserting k points into the realizable
    classes (each open region is witnessed by any of its points, each
    quantile by the value itself).  This is the multiset search over the
    finite candidate set, enumerated through its sufficient statistic.
    Intended for small instances (n <= 8 recommended).
    """
    x_sorted, q = _prepare(x, q)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    n = x_sorted.size
    m = q.size
    ranks = [ceil_rank(n, pj) for pj in p]
    cx = _classify(x_sorted, q)
    realizable = _region_classes(q, bounds)
    add_classes = [c for c in range(2 * m + 1) if realizable[c]]
    rem_classes = [c for c in range(2 * m + 1) if cx[c] > 0]

    # lt[j] = classes strictly below q_j; class index of {q_j} is 2j - 1.
    def quantiles_ok(y: np.ndarray) -> bool:
        cum = 0
        c = 0
        for j in range(m):
            while c < 2 * j + 1:
                cum += y[c]
                c += 1
            lt = cum
            le = lt + y[2 * j + 1]
            if not (lt <= ranks[j] - 1 < le):
                return False
        return True

    def compositions(total, slots, caps):
        # All ways to split `total` over `slots` positions with per-slot caps.
        if not slots:
            if total == 0:
                yield ()
            return
        head_cap = min(total, caps[0])
        for v in range(head_cap + 1):
            for rest in compositions(total - v, slots[1:], caps[1:]):
                yield (v,) + rest

    for k in range(n + 1):
        rem_caps = [int(cx[c]) for c in rem_classes]
        for rem in compositions(k, rem_classes, rem_caps):
            base = cx.copy()
            for c, v in zip(rem_classes, rem):
                base[c] -= v
            for add in compositions(k, add_classes, [k] * len(add_classes)):
                y = base.copy()
                for c, v in zip(add_classes, add):
                    y[c] += v
                if quantiles_ok(y):
                    return k
    raise RuntimeError("no dataset maps to q (infeasible target)")
