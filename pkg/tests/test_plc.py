import itertools
import math

import numpy as np
import pytest

from conftest import brute_plc
from plcbounds.errors import (
    InfeasibleC,
    NonPositiveUtility,
    NormalizerZero,
    UniverseTooLargeForExact,
)
from plcbounds.plackett_luce import pl_ranking_prob
from plcbounds.plc import (
    BinnedAccumulator,
    McConfig,
    nonidentifiability_witness,
    plc_prob_binned,
    plc_prob_exact,
    plc_prob_mc,
    plc_ranking_distribution,
    plc_top_l_matrix,
    plc_top_l_prob,
    sample_plc_rankings,
    total_variation,
)


class TestExact:
    def test_single_item(self):
        assert plc_prob_exact((0,), [0.3], [0.7], 1) == pytest.approx(1.0)

    def test_full_consideration_is_pl(self, rng):
        u = rng.normal(size=5)
        r = (3, 1, 4)
        assert plc_prob_exact(r, u, np.ones(5), 3) == pytest.approx(
            pl_ranking_prob(r, range(5), u), rel=1e-12
        )

    def test_two_item_hand_value(self):
        # sets {0}, {1}, {0,1} each 1/3; ranking <0> wins {0} and half of {0,1}
        assert plc_prob_exact((0,), [0, 0], [0.5, 0.5], 1) == pytest.approx(0.5)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, min(3, n) + 1))
        u = rng.normal(size=n)
        p = rng.uniform(0.05, 1, n)
        for r in itertools.islice(itertools.permutations(range(n), k), 12):
            assert plc_prob_exact(r, u, p, k) == pytest.approx(brute_plc(r, u, p, k), abs=1e-12)

    def test_distribution_sums_to_one(self, rng):
        dist = plc_ranking_distribution(rng.normal(size=6), rng.uniform(0.1, 1, 6), 3)
        assert len(dist) == 6 * 5 * 4
        assert sum(dist.values()) == pytest.approx(1, abs=1e-10)

    def test_universe_guard(self):
        with pytest.raises(UniverseTooLargeForExact):
            plc_prob_exact((0,), np.zeros(30), np.full(30, 0.5), 1)

    def test_zero_normalizer(self):
        with pytest.raises(NormalizerZero):
            # the product underflows to zero
            plc_prob_exact((0, 1, 2), [0, 0, 0, 0], [1e-120] * 4, 3)

    def test_top_l(self, rng):
        u = rng.normal(size=5)
        p = rng.uniform(0.2, 1, 5)
        stats = plc_top_l_matrix(u, p, 2)
        dist = plc_ranking_distribution(u, p, 2)
        first = sum(v for r, v in dist.items() if r[0] == 2)
        assert plc_top_l_prob(2, 1, u, p, 2) == pytest.approx(first)
        assert stats.pr_top[2, 0] == pytest.approx(first)
        np.testing.assert_allclose(stats.pr_top.sum(axis=0), [1, 2])


class TestSampler:
    def test_empirical_matches_exact(self, rng):
        u = np.array([1.0, 0.2, -0.5, 0.7])
        p = np.array([0.4, 0.9, 0.6, 0.3])
        m = 100_000
        R = sample_plc_rankings(u, p, 2, m, rng)
        exact = plc_top_l_matrix(u, p, 2).pr_top
        for i in range(4):
            for ell in (1, 2):
                emp = np.mean((R[:, :ell] == i).any(axis=1))
                se = math.sqrt(exact[i, ell - 1] * (1 - exact[i, ell - 1]) / m)
                assert abs(emp - exact[i, ell - 1]) <= 3 * se + 1e-12

    def test_seeded(self):
        a = sample_plc_rankings([0, 1, 2], [0.5, 0.5, 0.5], 2, 50, np.random.default_rng(3))
        b = sample_plc_rankings([0, 1, 2], [0.5, 0.5, 0.5], 2, 50, np.random.default_rng(3))
        np.testing.assert_array_equal(a, b)


class TestMonteCarlo:
    def test_sample_counts(self):
        assert McConfig(0.05, 0.1).samples == 738
        assert McConfig(0.02, 0.05).samples == 5478

    def test_full_consideration(self, rng):
        u = rng.normal(size=4)
        got = plc_prob_mc((0, 1), u, np.ones(4), 2, McConfig(0.1, 0.1, seed=1))
        assert got == pytest.approx(pl_ranking_prob((0, 1), range(4), u), rel=1e-12)

    def test_seed_reproducible(self):
        args = ((0, 2), [0.1, 0.5, 0.3, 0.0], [0.5, 0.6, 0.7, 0.4], 2, McConfig(0.05, 0.1, seed=9))
        assert plc_prob_mc(*args) == plc_prob_mc(*args)

    def test_within_band(self, rng):
        u = rng.normal(size=6)
        p = rng.uniform(0.2, 1, 6)
        exact = plc_prob_exact((1, 4), u, p, 2)
        assert abs(plc_prob_mc((1, 4), u, p, 2, McConfig(0.02, 0.01), rng) - exact) <= 0.02


class TestBinned:
    def test_accumulator_mass_conserved(self):
        acc = BinnedAccumulator.empty(0.01, 400)
        for p_i, e_i in [(0.3, 2.0), (0.9, 5.0), (0.5, 1.5)]:
            acc.add_item(p_i, e_i)
        assert acc.mass.sum() == pytest.approx(1.0)
        assert acc.mass[0] == pytest.approx(0.7 * 0.1 * 0.5)
        assert acc.representatives()[0] == 0.0

    def test_k_equals_n(self, rng):
        u = rng.uniform(0.1, 3, 3)
        assert plc_prob_binned((2, 0, 1), u, [0.3, 0.4, 0.5], 3, 0.1) == pytest.approx(
            pl_ranking_prob((2, 0, 1), range(3), u)
        )

    def test_non_positive_utility(self):
        with pytest.raises(NonPositiveUtility) as exc:
            plc_prob_binned((0,), [1.0, -0.5, 2.0], [0.5] * 3, 1, 0.1)
        assert exc.value.index == 1

    @pytest.mark.parametrize("eps", [0.1, 0.01])
    def test_ratio(self, rng, eps):
        for _ in range(10):
            u = rng.uniform(0.1, 3, 7)
            p = rng.uniform(0.05, 1, 7)
            r = tuple(rng.permutation(7)[:2].tolist())
            exact = plc_prob_exact(r, u, p, 2)
            approx = plc_prob_binned(r, u, p, 2, eps)
            # bin representatives undercount, so the estimate errs high
            assert exact <= approx * (1 + 1e-12)
            assert approx <= exact * (1 + eps)


class TestWitness:
    def test_hand_value(self):
        a, _ = nonidentifiability_witness(3, 2, 0.5, 0.5, 0.2)
        assert a.p[-1] == pytest.approx(0.25)

    def test_distinct_but_equivalent(self):
        a, b = nonidentifiability_witness(4, 2, 0.3, 0.6, 0.1)
        assert not np.allclose(a.p, b.p)
        np.testing.assert_array_equal(a.u, b.u)
        assert total_variation(a, b) <= 1e-6

    def test_infeasible(self):
        with pytest.raises(InfeasibleC):
            nonidentifiability_witness(4, 2, 0.3, 0.9, 0.1)
