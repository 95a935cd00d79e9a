"""Multiset emulation: rounding, layout, conditionals, bit-string marginals."""

import random
from fractions import Fraction as F

import pytest

from ce_sampler import (
    Game,
    JointDistribution,
    JointStrategy,
    conditional_expected_utility,
    emulate,
    expected_utility,
    l1_distance,
    marginal,
    normalize,
    rounds_for,
)
from ce_sampler.emulation import bits_to_index, index_to_bits
from conftest import random_distribution, random_rational_game


class TestRoundCount:
    def test_power_of_two_cover(self):
        assert rounds_for(4, F(1, 2)) == 3  # 8 = 4 / (1/2)
        assert rounds_for(4, F(1, 8)) == 5
        assert rounds_for(2, F(1, 2)) == 2
        assert rounds_for(1, F(2)) == 0

    def test_rejects_nonpositive_budget(self):
        with pytest.raises(ValueError):
            rounds_for(4, F(0))


class TestEmulate:
    def test_fair_ce_table(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        assert em.k == 3
        assert em.table == ((0, 0),) * 4 + ((1, 1),) * 4
        assert l1_distance(em.induced_distribution().probs, bos_fair_ce.probs) == 0

    def test_dyadic_probabilities_are_exact(self):
        game = Game.from_payoffs([[1, 0]], [[0, 1]])
        p = JointDistribution({JointStrategy(0, 0): F(3, 4), JointStrategy(0, 1): F(1, 4)})
        em = emulate(game, p, F(1, 2))
        assert em.k == 2
        assert em.counts() == {JointStrategy(0, 0): 3, JointStrategy(0, 1): 1}
        assert l1_distance(em.induced_distribution().probs, p.probs) == 0

    def test_uniform_on_power_of_two_support(self):
        game = Game.from_payoffs([[1, 2, 3, 4]], [[4, 3, 2, 1]])
        p = JointDistribution.uniform(list(game.cells()))
        em = emulate(game, p, F(1))
        assert l1_distance(em.induced_distribution().probs, p.probs) == 0

    def test_largest_remainder_properties(self):
        rng = random.Random(13)
        for _ in range(40):
            game = random_rational_game(rng, rng.randint(1, 3), rng.randint(1, 4))
            p = random_distribution(rng, list(game.cells()))
            delta = rng.choice([F(1, 2), F(1, 3), F(1, 8)])
            em = emulate(game, p, delta)
            counts = em.counts()
            size = em.size
            assert sum(counts.values()) == size
            assert len(em.table) == size
            for cell in game.cells():
                assert abs(F(counts.get(cell, 0), size) - p.prob(cell)) < F(1, size)
            gap = l1_distance(em.induced_distribution().probs, p.probs)
            assert gap <= F(game.n_cells, size) <= delta

    def test_payoff_gap_bounded_by_budget(self):
        rng = random.Random(17)
        for _ in range(20):
            game = normalize(random_rational_game(rng, 2, rng.randint(2, 3)))
            p = random_distribution(rng, list(game.cells()))
            delta = rng.choice([F(1, 2), F(1, 4)])
            em = emulate(game, p, delta)
            induced = em.induced_distribution()
            for player in (1, 2):
                gap = abs(
                    expected_utility(game, induced, player) - expected_utility(game, p, player)
                )
                assert gap <= delta

    def test_layout_permutation(self, bos, bos_fair_ce):
        order = list(bos.cells())[::-1]
        em = emulate(bos, bos_fair_ce, F(1, 2), order=order)
        assert em.table == ((1, 1),) * 4 + ((0, 0),) * 4

    def test_order_must_be_permutation(self, bos, bos_fair_ce):
        with pytest.raises(ValueError):
            emulate(bos, bos_fair_ce, F(1, 2), order=[JointStrategy(0, 0)])

    def test_rejects_nonpositive_budget(self, bos, bos_fair_ce):
        with pytest.raises(ValueError):
            emulate(bos, bos_fair_ce, F(-1, 2))


class TestConditionals:
    def test_branch_averages(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        assert conditional_expected_utility(em, bos, (), 0, 1) == 4
        assert conditional_expected_utility(em, bos, (), 1, 1) == 2
        assert conditional_expected_utility(em, bos, (), 0, 2) == 2
        assert conditional_expected_utility(em, bos, (), 1, 2) == 4

    def test_full_prefix_is_single_entry(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        for index in range(em.size):
            bits = index_to_bits(index, em.k)
            value = conditional_expected_utility(em, bos, bits[:-1], bits[-1], 1)
            assert value == bos.utility(1, em.table[index])

    def test_prefix_too_long_rejected(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        with pytest.raises(ValueError):
            conditional_expected_utility(em, bos, (0, 1, 1), 0, 1)


class TestBitHelpers:
    def test_roundtrip(self):
        for k in (1, 3, 6):
            for index in range(1 << k):
                assert bits_to_index(index_to_bits(index, k)) == index

    def test_validation(self):
        with pytest.raises(ValueError):
            bits_to_index((0, 2))
        with pytest.raises(ValueError):
            index_to_bits(8, 3)


class TestBitstringDistributions:
    def test_marginal_to_empty_prefix(self):
        dist = {(0, 1): F(1, 3), (1, 1): F(2, 3)}
        assert marginal(dist, 0) == {(): F(1)}

    def test_marginal_of_uniform(self):
        dist = {bits: F(1, 4) for bits in [(0, 0), (0, 1), (1, 0), (1, 1)]}
        assert marginal(dist, 1) == {(0,): F(1, 2), (1,): F(1, 2)}

    def test_marginal_of_point_mass(self):
        dist = {(1, 0, 1): F(1)}
        assert marginal(dist, 2) == {(1, 0): F(1)}

    def test_l1_identical(self):
        dist = {(0,): F(1, 2), (1,): F(1, 2)}
        assert l1_distance(dist, dict(dist)) == 0

    def test_l1_disjoint_points(self):
        assert l1_distance({(0, 0): F(1)}, {(1, 1): F(1)}) == 2

    def test_l1_two_outcome_skew(self):
        for b in (F(1, 100), F(1, 7), F(1, 2)):
            skewed = {(0,): F(1, 2) + b, (1,): F(1, 2) - b}
            fair = {(0,): F(1, 2), (1,): F(1, 2)}
            assert l1_distance(skewed, fair) == 2 * b

    def test_marginals_contract_l1(self):
        rng = random.Random(19)
        k = 4
        keys = [tuple((i >> (k - 1 - j)) & 1 for j in range(k)) for i in range(1 << k)]
        for _ in range(20):
            def rand_dist():
                weights = [F(rng.randint(0, 6)) for _ in keys]
                if not any(weights):
                    weights[0] = F(1)
                total = sum(weights)
                return {key: w / total for key, w in zip(keys, weights) if w}

            d1, d2 = rand_dist(), rand_dist()
            full = l1_distance(d1, d2)
            for m in range(k + 1):
                assert l1_distance(marginal(d1, m), marginal(d2, m)) <= full
