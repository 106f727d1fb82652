"""Tests for the block distribution, its sampler and density evaluation."""

import itertools
import math

import numpy as np
import pytest
from scipy import stats

from dpquantiles.core import Bounds
from dpquantiles.sampler import (
    BlockSampler,
    MechanismFlavor,
    block_log_weight,
    brute_force_distribution,
    dp_sample_block,
    gamma,
    log_phi,
    logsumexp,
    mechanism_log_density,
    sample_within_block,
    tau,
)

B01 = Bounds(0.0, 1.0)
P5 = np.array([0.5])
FLAVORS = list(MechanismFlavor)


class TestLogSumExp:
    def test_two_zeros(self):
        assert logsumexp([0.0, 0.0]) == pytest.approx(math.log(2.0))

    def test_neg_inf_passthrough(self):
        assert logsumexp([-np.inf, 3.5]) == pytest.approx(3.5)

    def test_shift_stability(self):
        expected = -1000.0 + math.log1p(math.exp(-0.5))
        assert logsumexp([-1000.0, -1000.5]) == pytest.approx(expected, abs=1e-12)

    def test_empty_and_degenerate(self):
        assert logsumexp([]) == -np.inf
        assert logsumexp([-np.inf, -np.inf]) == -np.inf


class TestGapsAndMultiplicities:
    def test_tau_collision(self):
        x = np.array([0.5, 0.5])
        assert tau(1, x, B01) == 0.0
        assert tau(0, x, B01) == 0.5
        assert tau(2, x, B01) == 0.5

    def test_tau_interior(self):
        assert tau(1, np.array([0.2, 0.8]), B01) == pytest.approx(0.6)

    def test_gamma(self):
        assert gamma((2, 2, 5)) == 2
        assert gamma((1, 2, 3)) == 1
        assert gamma((4, 4, 4)) == 6


class TestLogPhi:
    def test_decreasing_index_forbidden(self):
        for fl in FLAVORS:
            assert log_phi(fl, 3, 2, 1, 4, P5, 1.0) == -np.inf

    def test_joint_exp_exact_count(self):
        assert log_phi(MechanismFlavor.JOINT_EXP, 0, 2, 1, 4, P5, 1.0) == 0.0

    def test_is_zero_delta_pays_indicator(self):
        # rank difference 0 between two equal ceil targets; delta-hat = 0
        # fires the indicator on an interior bin
        p = np.array([0.41, 0.45])  # ceil(4.1) == ceil(4.5) == 5
        eps = 1.0
        got = log_phi(MechanismFlavor.INVERSE_SENSITIVITY, 3, 3, 2, 10, p, eps)
        assert got == pytest.approx(-eps / 2.0)

    def test_is_last_bin_carries_no_indicator(self):
        # j = m+1 with matching count: no indicator, weight 1
        got = log_phi(MechanismFlavor.INVERSE_SENSITIVITY, 2, 4, 2, 4, P5, 1.0)
        assert got == 0.0


class TestBlockWeights:
    def test_zero_volume_block(self):
        x = np.array([0.5, 0.5])
        for fl in FLAVORS:
            assert block_log_weight(fl, (1,), x, B01, P5, 1.0) == -np.inf

    def test_weight_composition(self):
        x = np.array([0.4, 0.6])
        fl = MechanismFlavor.JOINT_EXP
        expected = (
            math.log(0.2)
            + log_phi(fl, 0, 1, 1, 2, P5, 1.0)
            + log_phi(fl, 1, 2, 2, 2, P5, 1.0)
        )
        assert block_log_weight(fl, (1,), x, B01, P5, 1.0) == pytest.approx(expected)

    def test_gamma_discount_on_repeats(self):
        x = np.array([0.2, 0.5, 0.8])
        p = np.array([0.3, 0.7])
        fl = MechanismFlavor.JOINT_EXP
        w_rep = block_log_weight(fl, (1, 1), x, B01, p, 1.0)
        # same phi/tau product built by hand, without the 1/gamma discount
        raw = (
            log_phi(fl, 0, 1, 1, 3, p, 1.0)
            + log_phi(fl, 1, 1, 2, 3, p, 1.0)
            + log_phi(fl, 1, 3, 3, 3, p, 1.0)
            + 2 * math.log(tau(1, x, B01))
        )
        assert w_rep == pytest.approx(raw - math.log(2.0))


class TestBruteForceDistribution:
    def test_block_counts(self):
        x2 = np.array([0.3, 0.7])
        d = brute_force_distribution(MechanismFlavor.JOINT_EXP, x2, B01, P5, 1.0)
        assert len(d.log_weights) == 3
        x3 = np.array([0.2, 0.5, 0.8])
        p2 = np.array([0.25, 0.75])
        d2 = brute_force_distribution(MechanismFlavor.JOINT_EXP, x3, B01, p2, 1.0)
        assert len(d2.log_weights) == 10

    def test_all_collision_dataset(self):
        x = np.array([0.4, 0.4, 0.4])
        d = brute_force_distribution(MechanismFlavor.JOINT_EXP, x, B01, P5, 1.0)
        finite = [b for b, w in d.log_weights.items() if np.isfinite(w)]
        assert set(finite) == {(0,), (3,)}
        assert np.isfinite(d.log_normalizer)

    def test_guard_on_large_instances(self):
        x = np.linspace(0.01, 0.99, 200)
        p = np.linspace(0.1, 0.9, 4)
        with pytest.raises(ValueError):
            brute_force_distribution(MechanismFlavor.JOINT_EXP, x, B01, p, 1.0)


def _tiny_instances(rng, count):
    for _ in range(count):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 3))
        if n < 2 * m:
            m = 1
        x = np.sort(np.round(rng.uniform(size=n), 1))
        p = np.arange(1, m + 1) / (m + 1)
        eps = float(rng.choice([0.5, 1.0, 4.0]))
        yield x, p, eps


class TestDynamicProgramAgainstEnumeration:
    def test_normalizer_equality(self):
        rng = np.random.default_rng(23)
        for x, p, eps in _tiny_instances(rng, 40):
            for fl in FLAVORS:
                bf = brute_force_distribution(fl, x, B01, p, eps)
                dp = BlockSampler(fl, x, B01, p, eps)
                assert dp.log_normalizer == pytest.approx(bf.log_normalizer, abs=1e-9)

    def test_sampled_blocks_have_positive_volume(self):
        rng = np.random.default_rng(29)
        x = np.sort(np.array([0.2, 0.2, 0.5, 0.5, 0.9]))
        for fl in FLAVORS:
            s = BlockSampler(fl, x, B01, np.array([0.3, 0.7]), 1.0)
            blocks = s.sample_blocks(rng, size=500)
            for blk in blocks:
                w = block_log_weight(fl, tuple(blk), x, B01, np.array([0.3, 0.7]), 1.0)
                assert np.isfinite(w)

    def test_constant_data_boundary_blocks_only(self):
        rng = np.random.default_rng(31)
        x = np.full(4, 0.5)
        blocks = BlockSampler(MechanismFlavor.JOINT_EXP, x, B01, P5, 1.0).sample_blocks(
            rng, size=200
        )
        assert set(map(tuple, blocks)) <= {(0,), (4,)}

    def test_frequencies_match_enumeration(self):
        # chi-square on one moderate instance per flavor; the 20-instance
        # version lives in the acceptance suite
        rng = np.random.default_rng(37)
        x = np.sort(np.array([0.1, 0.3, 0.3, 0.8]))
        p = np.array([0.25, 0.75])
        for fl in FLAVORS:
            bf = brute_force_distribution(fl, x, B01, p, 1.0)
            keys = sorted(bf.log_weights)
            probs = np.exp(
                np.array([bf.log_weights[k] for k in keys]) - bf.log_normalizer
            )
            draws = BlockSampler(fl, x, B01, p, 1.0).sample_blocks(rng, size=20000)
            counts = np.zeros(len(keys))
            index = {k: i for i, k in enumerate(keys)}
            for blk in draws:
                counts[index[tuple(blk)]] += 1
            keep = probs > 1e-12
            res = stats.chisquare(counts[keep], 20000 * probs[keep] / probs[keep].sum())
            assert res.pvalue > 0.01


class TestWithinBlockSampling:
    def test_single_gap_uniform_support(self):
        rng = np.random.default_rng(41)
        x = np.array([0.5, 0.5])
        qs = np.array(
            [sample_within_block((0,), x, B01, rng)[0] for _ in range(500)]
        )
        assert np.all((qs >= 0.0) & (qs < 0.5))

    def test_repeated_gap_sorted(self):
        rng = np.random.default_rng(43)
        x = np.array([0.2, 0.8])
        for _ in range(200):
            q = sample_within_block((1, 1), x, B01, rng)
            assert q[0] <= q[1]
            assert np.all((q > 0.2) & (q < 0.8))

    def test_zero_volume_gap_raises(self):
        rng = np.random.default_rng(47)
        with pytest.raises(RuntimeError):
            sample_within_block((1,), np.array([0.5, 0.5]), B01, rng)

    def test_seeded_reproducibility(self):
        x = np.sort(np.random.default_rng(0).uniform(size=20))
        a = dp_sample_block(
            MechanismFlavor.JOINT_EXP, x, B01, P5, 1.0, np.random.default_rng(5)
        )
        b = dp_sample_block(
            MechanismFlavor.JOINT_EXP, x, B01, P5, 1.0, np.random.default_rng(5)
        )
        np.testing.assert_array_equal(a, b)


class TestMechanismDensity:
    def test_integrates_to_one(self):
        # m=1 densities are piecewise constant between data points, so the
        # cell-midpoint quadrature is exact
        x = np.array([0.3, 0.5, 0.5, 0.9])
        for fl in FLAVORS:
            pts = np.unique(np.concatenate(([0.0], x, [1.0])))
            mids = 0.5 * (pts[:-1] + pts[1:])
            widths = np.diff(pts)
            dens = np.array(
                [math.exp(mechanism_log_density(fl, x, B01, P5, 2.0, [q])) for q in mids]
            )
            assert float(dens @ widths) == pytest.approx(1.0, abs=1e-9)

    def test_constant_data_uniform_density(self):
        x = np.zeros(6)
        b = Bounds(-1.0, 1.0)
        for q in (-0.9, -0.2, 0.4, 0.8):
            d = mechanism_log_density(MechanismFlavor.JOINT_EXP, x, b, P5, 1.0, [q])
            assert math.exp(d) == pytest.approx(0.5, abs=1e-12)

    def test_piecewise_constant_within_block(self):
        x = np.array([0.2, 0.6, 0.9])
        for fl in FLAVORS:
            d1 = mechanism_log_density(fl, x, B01, P5, 1.0, [0.3])
            d2 = mechanism_log_density(fl, x, B01, P5, 1.0, [0.55])
            assert d1 == pytest.approx(d2, abs=1e-12)

    def test_rejects_out_of_bounds(self):
        with pytest.raises(ValueError):
            mechanism_log_density(
                MechanismFlavor.JOINT_EXP, np.array([0.5]), B01, P5, 1.0, [1.5]
            )
