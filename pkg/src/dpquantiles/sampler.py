"""Exact sampling from the block distribution of the quantile mechanisms.

The mechanism density is constant on "blocks": products of data gaps
[X_{i_1}, X_{i_1+1}) x ... x [X_{i_m}, X_{i_m+1}) intersected with the
non-decreasing cone, indexed by non-decreasing tuples i in {0..n}^m.  The
block probability factorizes over consecutive indices,

    P(i)  proportional to  (1/gamma(i)) * prod_j phi(i_{j-1}, i_j, j) * prod_j tau(i_j),

which admits an exact forward/backward chain sampler.  The 1/gamma(i)
factor (inverse product of run-length factorials) is realized inside the
chain by augmenting the state with the length of the current run of
repeated gap indices: extending a run to length r multiplies the prefix
weight by 1/r.

All weight arithmetic is in natural-log space; zero-width gaps map to -inf.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import Bounds, ceil_rank

__all__ = [
    "MechanismFlavor",
    "BlockDistribution",
    "logsumexp",
    "tau",
    "gamma",
    "log_phi",
    "block_log_weight",
    "brute_force_distribution",
    "BlockSampler",
    "dp_sample_block",
    "sample_within_block",
    "mechanism_log_density",
]

NEG_INF = -np.inf

# Below this many gaps the O(n^2) masked matvec is used for the chain
# recursion; above it, the FFT-based Toeplitz product.
_DIRECT_GAP_LIMIT = 700

_BRUTE_FORCE_LIMIT = 10**6


class MechanismFlavor(enum.Enum):
    JOINT_EXP = "joint_exp"
    INVERSE_SENSITIVITY = "inverse_sensitivity"


@dataclass
class BlockDistribution:
    """Unnormalized log-weights over all non-decreasing index tuples."""

    log_weights: dict[tuple[int, ...], float]
    log_normalizer: float


def logsumexp(values) -> float:
    """log(sum(exp(v))), max-shifted; -inf for empty or all -inf input."""
    v = np.asarray(values, dtype=float)
    if v.size == 0 or np.all(np.isneginf(v)):
        return NEG_INF
    return float(special.logsumexp(v))


def tau(i: int, x_sorted, bounds: Bounds) -> float:
    """Gap length X_{i+1} - X_i with X_0 = a and X_{n+1} = b."""
    x = np.asarray(x_sorted, dtype=float)
    n = x.size
    if not 0 <= i <= n:
        raise ValueError(f"gap index {i} outside 0..{n}")
    lo = bounds.a if i == 0 else x[i - 1]
    hi = bounds.b if i == n else x[i]
    return float(hi - lo)


def gamma(block) -> int:
    """Product of factorials of the multiplicities of repeated gap indices."""
    g = 1
    for _, run in itertools.groupby(block):
        g *= math.factorial(sum(1 for _ in run))
    return g


def _log_phi_table(flavor: MechanismFlavor, n: int, p: np.ndarray, eps: float) -> np.ndarray:
    """Table t[d, j-1] = log phi(i, i + d, j) for d = 0..n and j = 1..m+1.

    phi depends on (i, i') only through the difference d = i' - i.  For the
    JointExp flavor the exponent is -(eps/4)|d - n(p_j - p_{j-1})|; for the
    inverse-sensitivity flavor it is -(eps/2)[|d_hat|/2 + 1{d_hat >= 0}] for
    j <= m and -(eps/4)|d_hat| for the final bin, with
    d_hat = d - (ceil(n p_j) - ceil(n p_{j-1})).  The indicator sits inside
    the -(eps/2) exponent, matching the utility whose exponential this is.
    """
    m = p.size
    d = np.arange(n + 1, dtype=float)[:, None]
    if flavor is MechanismFlavor.JOINT_EXP:
        targets = n * np.diff(np.concatenate(([0.0], p, [1.0])))[None, :]
        return -(eps / 4.0) * np.abs(d - targets)
    ranks = np.array([0] + [ceil_rank(n, pj) for pj in p] + [n])
    targets = np.diff(ranks)[None, :]
    delta = d - targets
    table = 0.5 * np.abs(delta)
    table[:, :m] += (delta[:, :m] >= 0).astype(float)
    return -(eps / 2.0) * table


def log_phi(flavor: MechanismFlavor, i: int, i2: int, j: int, n: int, p, eps: float) -> float:
    """log phi(i, i', j); -inf whenever i' < i."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if not 1 <= j <= p.size + 1:
        raise ValueError(f"bin index {j} outside 1..{p.size + 1}")
    if i2 < i:
        return NEG_INF
    return float(_log_phi_table(flavor, n, p, eps)[i2 - i, j - 1])


def _log_tau(x_sorted: np.ndarray, bounds: Bounds) -> np.ndarray:
    gaps = np.diff(np.concatenate(([bounds.a], x_sorted, [bounds.b])))
    with np.errstate(divide="ignore"):
        return np.where(gaps > 0, np.log(np.maximum(gaps, 1e-300)), NEG_INF)


def block_log_weight(flavor: MechanismFlavor, block, x_sorted, bounds: Bounds, p, eps: float) -> float:
    """Unnormalized log-weight of one block; -inf if any selected gap is empty."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    x = np.asarray(x_sorted, dtype=float)
    n = x.size
    block = tuple(int(i) for i in block)
    if any(b2 < b1 for b1, b2 in zip(block, block[1:])):
        raise ValueError("block index must be non-decreasing")
    phi = _log_phi_table(flavor, n, p, eps)
    log_tau = _log_tau(x, bounds)
    path = (0,) + block + (n,)
    total = -math.log(gamma(block))
    for j in range(1, len(path)):
        d = path[j] - path[j - 1]
        if d < 0:
            return NEG_INF
        total += phi[d, j - 1]
    for i in block:
        if np.isneginf(log_tau[i]):
            return NEG_INF
        total += log_tau[i]
    return float(total)


def brute_force_distribution(flavor: MechanismFlavor, x_sorted, bounds: Bounds, p, eps: float) -> BlockDistribution:
    """Enumerate all of O' and normalize by stable logsumexp.

    Guarded to (n+1)^m <= 1e6 enumerable tuples.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    x = np.sort(np.asarray(x_sorted, dtype=float))
    n, m = x.size, p.size
    if (n + 1) ** m > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"instance too large: (n+1)^m = {(n + 1) ** m} > {_BRUTE_FORCE_LIMIT}")
    weights = {
        block: block_log_weight(flavor, block, x, bounds, p, eps)
        for block in itertools.combinations_with_replacement(range(n + 1), m)
    }
    return BlockDistribution(weights, logsumexp(list(weights.values())))


def _log_toeplitz_matvec(col: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """out[i] = log sum_{i' <= i} exp(col[i - i'] + vec[i']).

    Direct masked logsumexp for small sizes, FFT product of the shifted
    exponentials for large ones (entries far below the running maximum lose
    precision there, which is harmless: they carry negligible mass).
    """
    size = col.size
    if size <= _DIRECT_GAP_LIMIT:
        mat = col[np.maximum(np.subtract.outer(np.arange(size), np.arange(size)), 0)]
        mat = mat + vec[None, :]
        mat[np.triu_indices(size, k=1)] = NEG_INF
        with np.errstate(invalid="ignore"):
            return special.logsumexp(mat, axis=1)
    max_c = np.max(col[np.isfinite(col)], initial=NEG_INF)
    max_v = np.max(vec[np.isfinite(vec)], initial=NEG_INF)
    if np.isneginf(max_c) or np.isneginf(max_v):
        return np.full(size, NEG_INF)
    exp_c = np.exp(col - max_c)
    exp_v = np.exp(vec - max_v)
    fft_len = 1 << int(np.ceil(np.log2(2 * size - 1)))
    prod = np.fft.irfft(np.fft.rfft(exp_c, n=fft_len) * np.fft.rfft(exp_v, n=fft_len))[:size]
    # FFT roundoff leaves garbage of order eps * max(prod) where the true
    # convolution is exactly zero; left unclamped it would assign finite
    # log-weight to impossible transitions and break the backward pass.
    prod[prod < np.max(prod) * 1e-12] = 0.0
    with np.errstate(divide="ignore"):
        return np.log(prod) + max_c + max_v


class BlockSampler:
    """Forward/backward chain sampler for the block distribution.

    The forward pass fills log_alpha[j, i, r]: the log-sum of the weights of
    all length-(j+1) prefixes ending at gap i whose current run of repeated
    indices has length r+1.  Construction is O(n m^2 + m n log n); drawing a
    block afterwards is O(n m^2) per sample.
    """

    def __init__(self, flavor: MechanismFlavor, x_sorted, bounds: Bounds, p, eps: float):
        self.flavor = flavor
        self.x = np.asarray(x_sorted, dtype=float)
        if np.any(np.diff(self.x) < 0):
            raise ValueError("dataset must be sorted")
        self.bounds = bounds
        self.p = np.atleast_1d(np.asarray(p, dtype=float))
        self.eps = float(eps)
        self.n = self.x.size
        self.m = self.p.size
        self.log_tau = _log_tau(self.x, bounds)
        self.phi = _log_phi_table(flavor, self.n, self.p, eps)
        self._forward()

    def _forward(self):
        n, m = self.n, self.m
        log_alpha = np.full((m, n + 1, m), NEG_INF)
        log_alpha[0, :, 0] = self.phi[:, 0] + self.log_tau
        no_repeat = self.phi[:, 1:].copy()
        no_repeat[0, :] = NEG_INF  # d = 0 transitions belong to the run branch
        for j in range(1, m):
            with np.errstate(invalid="ignore"):
                hat = special.logsumexp(log_alpha[j - 1], axis=1)
            fresh = self.log_tau + _log_toeplitz_matvec(no_repeat[:, j - 1], hat)
            fresh[0] = NEG_INF  # gap 0 cannot start a fresh run past position 1
            log_alpha[j, :, 0] = fresh
            run = self.phi[0, j] + self.log_tau
            log_alpha[j, :, 1 : j + 1] = (
                run[:, None] + log_alpha[j - 1, :, 0:j] - np.log(np.arange(2, j + 2))
            )
        self.log_alpha = log_alpha
        # phi(i, n, m+1) closes the chain at the upper boundary.
        end_col = self.phi[:, m][::-1]
        self.log_end = log_alpha[m - 1] + end_col[:, None]
        self.log_normalizer = logsumexp(self.log_end)
        if np.isneginf(self.log_normalizer):
            raise RuntimeError("degenerate block distribution: all weights are -inf")

    def _draw_categorical(self, log_w: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
        flat = log_w.reshape(-1)
        total = logsumexp(flat)
        if flat.size == 0 or np.isneginf(total):
            raise RuntimeError("backward sampling reached an impossible state (sampler bug)")
        probs = np.exp(flat - total)
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        return np.searchsorted(cdf, uniforms, side="right")

    def sample_blocks(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        """Draw `size` independent blocks, exactly distributed as P_{O'}.

        The backward pass samples the final (gap, run-length) state from the
        closed chain, then walks left, conditioning each earlier state on
        the gap that started the following run.  Draws sharing a pending
        state are resolved against the same conditional table.
        """
        n, m = self.n, self.m
        blocks = np.empty((size, m), dtype=np.int64)
        flat_idx = self._draw_categorical(self.log_end, rng.random(size))
        pending: dict[tuple[int, int], list[int]] = {}
        for d in range(size):
            i, r = divmod(int(flat_idx[d]), m)
            blocks[d, m - 1 - r : m] = i
            j = m - 2 - r
            if j >= 0:
                pending.setdefault((j, i), []).append(d)
        while pending:
            (j, next_i), draws = pending.popitem()
            # States (i < next_i, r <= j); transition phi(i, next_i, j+2).
            log_w = self.log_alpha[j, :next_i, : j + 1] + self.phi[next_i - np.arange(next_i), j + 1][:, None]
            idx = self._draw_categorical(log_w, rng.random(len(draws)))
            for d, f in zip(draws, idx):
                i, r = divmod(int(f), j + 1)
                blocks[d, j - r : j + 1] = i
                j2 = j - r - 1
                if j2 >= 0:
                    pending.setdefault((j2, i), []).append(d)
        return blocks

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_blocks(rng, 1)[0]


def dp_sample_block(flavor: MechanismFlavor, x_sorted, bounds: Bounds, p, eps: float, rng: np.random.Generator) -> np.ndarray:
    """One exact draw from the block distribution via the chain sampler."""
    return BlockSampler(flavor, x_sorted, bounds, p, eps).sample(rng)


def sample_within_block(block, x_sorted, bounds: Bounds, rng: np.random.Generator) -> np.ndarray:
    """Independent uniforms in the selected gaps, returned sorted."""
    x = np.asarray(x_sorted, dtype=float)
    edges = np.concatenate(([bounds.a], x, [bounds.b]))
    block = np.asarray(block, dtype=np.int64)
    lo, hi = edges[block], edges[block + 1]
    if np.any(hi <= lo):
        raise RuntimeError("sampled a zero-volume gap (sampler bug)")
    return np.sort(rng.uniform(lo, hi))


def mechanism_log_density(flavor: MechanismFlavor, x_sorted, bounds: Bounds, p, eps: float, q) -> float:
    """Exact log-density of the mechanism output at q.

    The density is exp((eps/2) u(X, q)) / Z with Z the chain normalizer:
    per-block utilities are constant, and the constrained volume of a block
    is prod tau / gamma, so Z coincides with the forward normalizer.
    """
    from .utility import u_is_tilde, u_je

    q = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q <= bounds.a) or np.any(q >= bounds.b):
        raise ValueError("q must lie strictly inside the bounds")
    if np.any(np.diff(q) < 0):
        raise ValueError("q must be non-decreasing")
    sampler = BlockSampler(flavor, x_sorted, bounds, p, eps)
    u = u_je if flavor is MechanismFlavor.JOINT_EXP else u_is_tilde
    return (eps / 2.0) * u(sampler.x, q, sampler.p, bounds) - sampler.log_normalizer
