"""Noise-sweep experiment runner and its fixed CSV schema."""

from __future__ import annotations

import csv
import io
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Bounds, empirical_quantiles
from .mechanisms import (
    NoiseConfig,
    composed_single_quantiles,
    hs_joint_exp,
    inverse_sensitivity_mechanism,
    joint_exp,
    recommended_sigma,
)

__all__ = [
    "SweepConfig",
    "SweepRow",
    "CSV_HEADER",
    "default_noise_ratios",
    "default_probability_vector",
    "metrics",
    "run_sweep",
    "rows_to_csv",
]

CSV_HEADER = [
    "dataset_id",
    "mechanism",
    "noise_family",
    "noise_ratio",
    "m",
    "eps",
    "mse_mean",
    "mse_std",
    "linf_mean",
    "runtime_ms",
]

MECHANISMS = ("joint_exp", "inverse_sensitivity", "hs_joint_exp", "composed_baseline")


def default_noise_ratios(points: int = 17) -> np.ndarray:
    """Log-spaced sigma/(b-a) sweep over [1e-8, 1]."""
    return np.logspace(-8, 0, points)


def default_probability_vector(m: int) -> np.ndarray:
    return np.arange(1, m + 1) / (m + 1)


def metrics(q, reference) -> tuple[float, float]:
    """(mse, linf) between an estimate and a reference quantile vector."""
    q = np.asarray(q, dtype=float)
    r = np.asarray(reference, dtype=float)
    if q.shape != r.shape:
        raise ValueError(f"length mismatch: {q.shape} vs {r.shape}")
    diff = q - r
    return float(np.mean(diff**2)), float(np.max(np.abs(diff)))


@dataclass(frozen=True)
class SweepConfig:
    mechanisms: tuple = MECHANISMS
    noise_families: tuple = ("uniform",)
    noise_ratios: tuple = tuple(default_noise_ratios())
    m_values: tuple = (5,)
    eps_values: tuple = (1.0,)
    replications: int = 100
    seed: int = 0
    dataset_id: str = "data"
    # Reference for the error metrics: empirical quantiles of the clean
    # dataset by default; a {m: vector} map switches to population mode.
    population_reference: dict | None = None
    measure_runtime: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for r in self.noise_ratios:
            if r != "auto" and not r > 0:
                raise ValueError("noise ratios must be positive (or 'auto')")
        for mech in self.mechanisms:
            if mech not in MECHANISMS:
                raise ValueError(f"unknown mechanism {mech!r}")


@dataclass
class SweepRow:
    dataset_id: str
    mechanism: str
    noise_family: str
    noise_ratio: float
    m: int
    eps: float
    mse_mean: float
    mse_std: float
    linf_mean: float
    runtime_ms: float


def _cells(cfg: SweepConfig, bounds: Bounds, n: int):
    """Cross-product of sweep cells, in deterministic config order.

    The literal ratio "auto" resolves to recommended_sigma / (b - a) for the
    cell's (n, eps, m), so the emitted noise_ratio column records the value
    actually used.
    """
    for mech in cfg.mechanisms:
        for m in cfg.m_values:
            for eps in cfg.eps_values:
                if mech == "hs_joint_exp":
                    for family in cfg.noise_families:
                        for ratio in cfg.noise_ratios:
                            if ratio == "auto":
                                ratio = recommended_sigma(n, eps, m, bounds) / bounds.width
                            yield mech, m, eps, family, float(ratio)
                else:
                    yield mech, m, eps, "none", 0.0


def _run_cell(mech, data, bounds, p, eps, family, ratio, rng):
    if mech == "joint_exp":
        return joint_exp(data, bounds, p, eps, rng)
    if mech == "inverse_sensitivity":
        return inverse_sensitivity_mechanism(data, bounds, p, eps, rng)
    if mech == "composed_baseline":
        return composed_single_quantiles(data, bounds, p, eps, rng)
    cfg = NoiseConfig.from_std(family, ratio * bounds.width)
    return hs_joint_exp(data, bounds, p, eps, cfg, rng)


def run_sweep(data, bounds: Bounds, cfg: SweepConfig) -> list[SweepRow]:
    """Run every sweep cell for `replications` independent draws.

    RNG streams are derived per (cell, replication) from the root seed, so
    row results do not depend on execution order.  The special ratio value
    "auto" in noise_ratios is resolved to recommended_sigma beforehand by
    the CLI; here ratios are plain numbers.
    """
    data = np.asarray(data, dtype=float)
    rows = []
    for cell_idx, (mech, m, eps, family, ratio) in enumerate(_cells(cfg, bounds, data.size)):
        p = default_probability_vector(m)
        if cfg.population_reference is not None:
            reference = np.asarray(cfg.population_reference[m], dtype=float)
        else:
            reference = empirical_quantiles(data, p)
        def one_rep(rep):
            rng = np.random.default_rng([cfg.seed, cell_idx, rep])
            q = _run_cell(mech, data, bounds, p, eps, family, ratio, rng)
            return metrics(np.atleast_1d(q), reference)

        t0 = time.perf_counter()
        workers = int(os.environ.get("DPQUANTILES_THREADS", "1"))
        if workers > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(workers) as pool:
                results = list(pool.map(one_rep, range(cfg.replications)))
        else:
            results = [one_rep(rep) for rep in range(cfg.replications)]
        mses = [r[0] for r in results]
        linfs = [r[1] for r in results]
        elapsed_ms = (time.perf_counter() - t0) * 1000.0 / cfg.replications
        rows.append(
            SweepRow(
                dataset_id=cfg.dataset_id,
                mechanism=mech,
                noise_family=family,
                noise_ratio=ratio,
                m=m,
                eps=eps,
                mse_mean=float(np.mean(mses)),
                mse_std=float(np.std(mses)),
                linf_mean=float(np.mean(linfs)),
                runtime_ms=round(elapsed_ms, 3) if cfg.measure_runtime else 0.0,
            )
        )
    return rows


def rows_to_csv(rows) -> str:
    """Fixed-header RFC-4180-style CSV; byte-stable for identical rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                row.dataset_id,
                row.mechanism,
                row.noise_family,
                repr(float(row.noise_ratio)),
                row.m,
                repr(float(row.eps)),
                repr(float(row.mse_mean)),
                repr(float(row.mse_std)),
                repr(float(row.linf_mean)),
                repr(float(row.runtime_ms)),
            ]
        )
    return buf.getvalue()
