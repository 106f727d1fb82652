"""Differentially private multi-quantile estimation.

Exact samplers for the joint exponential mechanism and its inverse
sensitivity variant, a heuristically smoothed estimator for atomic data,
verification oracles, a privacy-loss auditor and an experiment harness.
"""

from .core import Bounds, QuantileSpecError, empirical_quantiles, hamming_distance, validate_quantiles
from .mechanisms import (
    NoiseConfig,
    composed_single_quantiles,
    exponential_quantile,
    hs_joint_exp,
    inverse_sensitivity_mechanism,
    joint_exp,
    recommended_sigma,
)
from .sampler import MechanismFlavor
from .utility import brute_force_inverse_sensitivity, u_is_exact, u_is_tilde, u_je

__all__ = [
    "Bounds",
    "QuantileSpecError",
    "empirical_quantiles",
    "hamming_distance",
    "validate_quantiles",
    "NoiseConfig",
    "MechanismFlavor",
    "joint_exp",
    "inverse_sensitivity_mechanism",
    "exponential_quantile",
    "composed_single_quantiles",
    "hs_joint_exp",
    "recommended_sigma",
    "u_je",
    "u_is_tilde",
    "u_is_exact",
    "brute_force_inverse_sensitivity",
]

__version__ = "0.1.0"
