"""Self-contained oracle suites behind the `verify` CLI subcommand.

Each suite returns (name, passed, detail) triples; the CLI exits nonzero if
any check fails.  The same oracles back the full acceptance tests, at
larger scale.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import Bounds
from .sampler import MechanismFlavor, BlockSampler, brute_force_distribution
from .utility import brute_force_inverse_sensitivity, u_is_exact, u_is_tilde, u_je

__all__ = ["verify_theorem_equivalence", "verify_sampler", "verify_sensitivity", "run_all"]

_BOUNDS = Bounds(0.0, 1.0)


def _grid_datasets(n, values=np.arange(0.1, 1.0, 0.1)):
    return itertools.combinations_with_replacement(np.round(values, 10), n)


def verify_theorem_equivalence(max_n: int = 5, max_m: int = 2, stride: int = 7):
    """Closed-form inverse sensitivity vs exhaustive search on grid instances.

    `stride` subsamples the dataset grid to keep the CLI quick; the full
    acceptance test runs stride 1.
    """
    failures = 0
    checked = 0
    q_grid = np.round(np.arange(0.05, 1.0, 0.1), 10)
    for n in range(2, max_n + 1):
        for m in range(1, max_m + 1):
            p = np.array([0.5]) if m == 1 else np.array([0.25, 0.75])
            for ds_idx, x in enumerate(_grid_datasets(n)):
                if ds_idx % stride:
                    continue
                x = np.asarray(x)
                for q in itertools.combinations(q_grid, m):
                    q = np.asarray(q)
                    checked += 1
                    exact = -u_is_exact(x, q, p, _BOUNDS)
                    oracle = brute_force_inverse_sensitivity(x, q, p, _BOUNDS)
                    if int(round(exact)) != oracle:
                        failures += 1
    return ("theorem-1-equivalence", failures == 0, f"{checked} instances, {failures} mismatches")


def verify_sampler(instances: int = 30, seed: int = 0, tol: float = 1e-9):
    """Chain normalizer vs exhaustive enumeration on random tiny instances."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 3))
        x = np.sort(rng.uniform(0, 1, n))
        if rng.random() < 0.3:  # exercise ties
            x[rng.integers(0, n)] = x[rng.integers(0, n)]
            x = np.sort(x)
        p = np.array([0.5]) if m == 1 else np.array([0.3, 0.7])
        eps = float(rng.uniform(0.2, 4.0))
        for flavor in MechanismFlavor:
            bf = brute_force_distribution(flavor, x, _BOUNDS, p, eps)
            dp = BlockSampler(flavor, x, _BOUNDS, p, eps)
            worst = max(worst, abs(bf.log_normalizer - dp.log_normalizer))
    return ("sampler-normalizer", worst <= tol, f"max |log Z| gap {worst:.2e}")


def verify_sensitivity(trials: int = 2000, seed: int = 0):
    """Neighbor sensitivity of both utilities stays below 1."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 12))
        m = int(rng.integers(1, 4))
        x = rng.uniform(0, 1, n)
        y = x.copy()
        y[rng.integers(0, n)] = rng.uniform(0, 1)
        q = np.sort(rng.uniform(0, 1, m))
        p = np.sort(rng.uniform(0.05, 0.95, m))
        if np.any(np.diff(p) * n < 1) or np.any(np.diff(p) <= 0):
            continue
        for u in (u_je, u_is_tilde):
            worst = max(worst, abs(u(x, q, p, _BOUNDS) - u(y, q, p, _BOUNDS)))
    return ("utility-sensitivity", worst <= 1.0 + 1e-12, f"max neighbor gap {worst:.4f}")


def run_all(max_n: int = 5, max_m: int = 2, seed: int = 0):
    return [
        verify_theorem_equivalence(max_n=max_n, max_m=max_m),
        verify_sampler(seed=seed),
        verify_sensitivity(seed=seed),
    ]
