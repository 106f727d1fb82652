"""Synthetic dataset generation and CSV ingestion for the experiment harness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .core import Bounds

__all__ = ["SyntheticSpec", "generate", "LoadReport", "load_csv", "PRESETS"]


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for an i.i.d. synthetic sample.

    kinds: "constant" (value), "uniform" (lo, hi), "gaussian" (mean, std,
    clipped to bounds), "dirac_mixture" (atoms: [(location, weight)],
    pieces: [(lo, hi, weight)], weights summing to 1).
    """

    kind: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind not in ("constant", "uniform", "gaussian", "dirac_mixture"):
            raise ValueError(f"unknown synthetic kind {self.kind!r}")


# Stand-ins for the unshipped census columns: heavy accumulation at zero
# plus a continuous body, scaled to [0, 1] bounds.
PRESETS = {
    "dividends-like": {"atoms": [(0.0, 0.6)], "pieces": [(0.0, 1.0, 0.4)]},
    "earnings-like": {"atoms": [(0.0, 0.25)], "pieces": [(0.1, 1.0, 0.75)]},
}


def generate(spec: SyntheticSpec, bounds: Bounds) -> np.ndarray:
    """Draw spec.n i.i.d. points from the specified law, within bounds."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "constant":
        value = float(spec.params["value"])
        if not bounds.a <= value <= bounds.b:
            raise ValueError("constant value outside bounds")
        return np.full(spec.n, value)
    if spec.kind == "uniform":
        lo = float(spec.params.get("lo", bounds.a))
        hi = float(spec.params.get("hi", bounds.b))
        if not (bounds.a <= lo < hi <= bounds.b):
            raise ValueError("uniform support outside bounds")
        return rng.uniform(lo, hi, spec.n)
    if spec.kind == "gaussian":
        mean = float(spec.params["mean"])
        std = float(spec.params["std"])
        return np.clip(rng.normal(mean, std, spec.n), bounds.a, bounds.b)
    atoms = list(spec.params.get("atoms", []))
    pieces = list(spec.params.get("pieces", []))
    weights = [w for _, w in atoms] + [w for _, _, w in pieces]
    if not np.isclose(sum(weights), 1.0):
        raise ValueError(f"mixture weights sum to {sum(weights)}, expected 1")
    for loc, _ in atoms:
        if not bounds.a <= loc <= bounds.b:
            raise ValueError("atom outside bounds")
    for lo, hi, _ in pieces:
        if not (bounds.a <= lo < hi <= bounds.b):
            raise ValueError("mixture piece outside bounds")
    comp = rng.choice(len(weights), size=spec.n, p=weights)
    out = np.empty(spec.n)
    for c, (loc, _) in enumerate(atoms):
        out[comp == c] = loc
    for c, (lo, hi, _) in enumerate(pieces, start=len(atoms)):
        mask = comp == c
        out[mask] = rng.uniform(lo, hi, mask.sum())
    return out


@dataclass
class LoadReport:
    values: np.ndarray
    clamped: int
    skipped: int


def load_csv(path, column, bounds: Bounds, subsample_n: int, seed: int) -> LoadReport:
    """Uniform subsample (without replacement) of a numeric CSV column.

    Values outside the bounds are clamped and counted; non-numeric rows are
    skipped and counted.  Bounds are caller-provided, never inferred from
    the data (inference would leak privacy).
    """
    df = pd.read_csv(path)
    if column is None:
        column = df.columns[0]
    if column not in df.columns:
        raise KeyError(f"column {column!r} not in {list(df.columns)}")
    raw = pd.to_numeric(df[column], errors="coerce")
    skipped = int(raw.isna().sum())
    values = raw.dropna().to_numpy(dtype=float)
    if subsample_n > values.size:
        raise ValueError(f"subsample_n={subsample_n} exceeds {values.size} usable rows")
    rng = np.random.default_rng(seed)
    sample = values[rng.choice(values.size, subsample_n, replace=False)]
    clamped = int(np.sum((sample < bounds.a) | (sample > bounds.b)))
    return LoadReport(np.clip(sample, bounds.a, bounds.b), clamped, skipped)
