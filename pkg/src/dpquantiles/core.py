"""Domain primitives: bounds, datasets, quantile vectors, order statistics.

All mechanisms operate on a bounded feature space [a, b].  Conventions used
throughout the package (enforced by the helpers here rather than by padded
storage): order statistics are 1-indexed, X_0 = a, X_{n+1} = b, p_0 = 0 and
p_{m+1} = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Bounds",
    "QuantileSpecError",
    "ceil_rank",
    "validate_quantiles",
    "check_dataset",
    "empirical_quantiles",
    "hamming_distance",
]

# Relative slack used when deciding whether n * p sits on an integer.  n * p
# for p like 0.3 is not exactly representable and a naive ceil would jump a
# full rank; every caller in the package must agree on ranks bit-for-bit.
_CEIL_RTOL = 1e-9


@dataclass(frozen=True)
class Bounds:
    """Closed data range [a, b], both endpoints finite."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("bounds must be finite")
        if not self.a < self.b:
            raise ValueError(f"bounds require a < b, got [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a


class QuantileSpecError(ValueError):
    """A probability vector violates ordering, range or spacing constraints."""


def ceil_rank(n: int, p: float) -> int:
    """Order-statistic rank ceil(n*p), robust to float noise in n*p."""
    v = n * p
    return int(math.ceil(v - _CEIL_RTOL * max(1.0, abs(v))))


def validate_quantiles(p, n: int) -> np.ndarray:
    """Check a probability vector against a sample size.

    Requires p strictly increasing in (0, 1) and n*(p[j+1] - p[j]) >= 1 so
    that no data point is selected twice as a quantile representant.  Raises
    QuantileSpecError naming the first violated constraint and index.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise QuantileSpecError("p must be a non-empty 1-d vector")
    for j, pj in enumerate(p):
        if not 0.0 < pj < 1.0:
            raise QuantileSpecError(f"p[{j}]={pj} outside the open interval (0, 1)")
    for j in range(1, p.size):
        if not p[j] > p[j - 1]:
            raise QuantileSpecError(f"not increasing at j={j}: p[{j}]={p[j]} <= p[{j-1}]={p[j-1]}")
        if n * (p[j] - p[j - 1]) < 1.0 - _CEIL_RTOL:
            raise QuantileSpecError(
                f"spacing violated at j={j}: n*(p[{j}]-p[{j-1}]) = {n * (p[j] - p[j-1])} < 1"
            )
    return p


def check_dataset(values, bounds: Bounds) -> np.ndarray:
    """Validate a dataset against its bounds and return it as an array."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("dataset must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(x)):
        raise ValueError("dataset contains non-finite values")
    if np.any(x < bounds.a) or np.any(x > bounds.b):
        raise ValueError(f"dataset values outside bounds [{bounds.a}, {bounds.b}]")
    return x


def empirical_quantiles(values, p, n: int | None = None) -> np.ndarray:
    """Order statistics at 1-indexed ranks ceil(n * p[j]).

    Permutation-invariant in `values`; the output is non-decreasing.
    """
    x = np.sort(np.asarray(values, dtype=float))
    if n is None:
        n = x.size
    p = np.atleast_1d(np.asarray(p, dtype=float))
    ranks = np.array([ceil_rank(n, pj) for pj in p])
    return x[ranks - 1]


def hamming_distance(x, y) -> int:
    """Substitutions needed to turn x into a permutation of y.

    Computed as n minus the largest common multiset, via a sorted
    two-pointer sweep.  Exact float equality; ties are legal.
    """
    xs = sorted(map(float, x))
    ys = sorted(map(float, y))
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} != {len(ys)}")
    common = 0
    i = j = 0
    while i < len(xs) and j < len(ys):
        if xs[i] == ys[j]:
            common += 1
            i += 1
            j += 1
        elif xs[i] < ys[j]:
            i += 1
        else:
            j += 1
    return len(xs) - common
