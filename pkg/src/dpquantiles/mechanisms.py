"""End-to-end private multi-quantile estimators.

All mechanisms take an explicit numpy Generator; with a fixed seed the
output is reproducible draw-for-draw.  Tests rely on that contract; in
deployment the generator should be cryptographically adequate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Bounds, check_dataset, validate_quantiles
from .sampler import BlockSampler, MechanismFlavor, sample_within_block

__all__ = [
    "NoiseConfig",
    "joint_exp",
    "inverse_sensitivity_mechanism",
    "exponential_quantile",
    "composed_single_quantiles",
    "generate_noise",
    "extended_bounds",
    "hs_joint_exp",
    "recommended_sigma",
]

_NOISE_FAMILIES = ("uniform", "laplace", "gaussian")

# Unbounded noise families are clamped to 5 scales beyond the data range:
# the per-point clipping probability stays below ~1% (gaussian) while the
# domain enlargement stays bounded.
_TAIL_SCALES = 5.0

# Noise below float64 resolution is absorbed by the addition and silently
# turns smoothing off; keep the scale representable relative to the bounds.
_SIGMA_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class NoiseConfig:
    """Noise family and scale for pre-smoothing.

    `scale` is the family-native parameter: half-width for uniform, scale
    for laplace, standard deviation for gaussian.
    """

    family: str
    scale: float

    def __post_init__(self):
        if self.family not in _NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}")
        if not self.scale > 0:
            raise ValueError("noise scale must be positive")

    @property
    def std(self) -> float:
        if self.family == "uniform":
            return self.scale / math.sqrt(3.0)
        if self.family == "laplace":
            return self.scale * math.sqrt(2.0)
        return self.scale

    @classmethod
    def from_std(cls, family: str, std: float) -> "NoiseConfig":
        if family == "uniform":
            return cls(family, std * math.sqrt(3.0))
        if family == "laplace":
            return cls(family, std / math.sqrt(2.0))
        return cls(family, std)


def _run_flavor(flavor: MechanismFlavor, x, bounds: Bounds, p, eps: float, rng: np.random.Generator) -> np.ndarray:
    x = check_dataset(x, bounds)
    p = validate_quantiles(p, x.size)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    x_sorted = np.sort(x)
    sampler = BlockSampler(flavor, x_sorted, bounds, p, eps)
    block = sampler.sample(rng)
    return sample_within_block(block, x_sorted, bounds, rng)


def joint_exp(x, bounds: Bounds, p, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Exponential mechanism over the interval-count utility (JointExp)."""
    return _run_flavor(MechanismFlavor.JOINT_EXP, x, bounds, p, eps, rng)


def inverse_sensitivity_mechanism(x, bounds: Bounds, p, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Exponential mechanism over the inverse-sensitivity utility."""
    return _run_flavor(MechanismFlavor.INVERSE_SENSITIVITY, x, bounds, p, eps, rng)


def exponential_quantile(x, bounds: Bounds, p_single: float, eps: float, rng: np.random.Generator) -> float:
    """Single-quantile special case (m = 1) of joint_exp."""
    return float(joint_exp(x, bounds, [p_single], eps, rng)[0])


def composed_single_quantiles(x, bounds: Bounds, p, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Baseline: m independent single-quantile runs at eps/m each (basic
    composition), output sorted."""
    p = validate_quantiles(p, np.asarray(x).size)
    m = p.size
    draws = [exponential_quantile(x, bounds, pj, eps / m, rng) for pj in p]
    return np.sort(np.asarray(draws))


def generate_noise(n: int, cfg: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws from the configured family (exchangeable by construction)."""
    if cfg.family == "uniform":
        return rng.uniform(-cfg.scale, cfg.scale, size=n)
    if cfg.family == "laplace":
        return rng.laplace(0.0, cfg.scale, size=n)
    return rng.normal(0.0, cfg.scale, size=n)


def extended_bounds(bounds: Bounds, cfg: NoiseConfig) -> Bounds:
    """Enlarged domain the noisy data is projected onto.

    Uniform noise never overflows [a - alpha, b + alpha]; the unbounded
    families are clamped at _TAIL_SCALES scales.
    """
    pad = cfg.scale if cfg.family == "uniform" else _TAIL_SCALES * cfg.scale
    return Bounds(bounds.a - pad, bounds.b + pad)


def hs_joint_exp(x, bounds: Bounds, p, eps: float, cfg: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    """Heuristically smoothed JointExp.

    Adds i.i.d. noise to the data, projects onto the extended bounds and
    runs joint_exp there.  The noise is exchangeable and the projection
    deterministic, so the composition keeps the eps-DP guarantee.
    """
    x = check_dataset(x, bounds)
    ext = extended_bounds(bounds, cfg)
    noisy = np.clip(x + generate_noise(x.size, cfg, rng), ext.a, ext.b)
    return joint_exp(noisy, ext, p, eps, rng)


def recommended_sigma(n: int, eps: float, m: int, bounds: Bounds) -> float:
    """Heuristic noise standard deviation (b-a) * min(1e-2, e^{-n eps / (20 sqrt(m))}).

    Floored at a resolution-aware minimum: below roughly 1e-16 of the data
    magnitude the addition X + w is a float no-op and smoothing silently
    degenerates to the raw mechanism.
    """
    base = bounds.width * min(1e-2, math.exp(-n * eps / (20.0 * math.sqrt(m))))
    floor = _SIGMA_FLOOR_REL * max(bounds.width, abs(bounds.a), abs(bounds.b))
    return max(base, floor)
