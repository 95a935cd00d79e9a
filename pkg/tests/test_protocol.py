"""Protocol state machines: rounds, transcripts, behaviors, exact distribution."""

import itertools
import random
from fractions import Fraction as F

import pytest

from ce_sampler import (
    HonestParty,
    JointDistribution,
    JointStrategy,
    PolicyParty,
    ProtocolConfig,
    RandomStream,
    ScriptedParty,
    compute_preference,
    emulate,
    conditional_expected_utility,
    run_protocol,
    simulate_outputs,
)
from ce_sampler.analysis import honest_output_distribution, worst_case_adversary
from ce_sampler.emulation import PreferenceOracle
from ce_sampler.protocol import run_round
from conftest import random_distribution, random_rational_game


class ScriptedCoins:
    """Stand-in stream whose bernoulli draws follow a fixed script.

    Lets a test walk the protocol down a chosen branch of the round tree
    and account for its exact probability.
    """

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.consumed = 0

    def bernoulli(self, p: F) -> bool:
        assert p == F(1, 2), "honest rounds flip fair coins"
        self.consumed += 1
        return self.outcomes.pop(0)


def exact_output_distribution(game, p, config, em):
    """Oracle: enumerate every coin script and weight it by (1/2)^flips."""
    dist: dict = {}
    k = config.k
    for script in itertools.product([True, False], repeat=k):
        stream = ScriptedCoins(script)
        transcript = run_protocol(
            game, p, config, HonestParty(), HonestParty(), stream,
            em=em, record_messages=False, warn_not_ce=False,
        )
        # Each distinct run with n consumed flips is enumerated 2^(k-n)
        # times here, so adding 2^-k per enumeration weights it 2^-n.
        dist[transcript.ell] = dist.get(transcript.ell, F(0)) + F(1, 2**k)
    return dist


class TestPreferences:
    def test_bos_root_preferences(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        assert compute_preference(em, bos, (), 1) == 1
        assert compute_preference(em, bos, (), 2) == -1

    def test_tie_prefers_zero(self, bos):
        point = JointDistribution.point_mass(JointStrategy(0, 0))
        em = emulate(bos, point, F(1, 2))
        for player in (1, 2):
            assert compute_preference(em, bos, (), player) == 1

    def test_matches_conditional_utilities(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        for player in (1, 2):
            zero = conditional_expected_utility(em, bos, (), 0, player)
            one = conditional_expected_utility(em, bos, (), 1, player)
            expected = 1 if zero >= one else -1
            assert compute_preference(em, bos, (), player) == expected


class TestRunRound:
    @pytest.fixture
    def bound_parties(self, bos, bos_fair_ce):
        def bind(party1, party2):
            em = emulate(bos, bos_fair_ce, F(1, 2))
            config = ProtocolConfig(F(1, 10), F(1, 2), em.k)
            oracle = PreferenceOracle(em, bos)
            party1.start(bos, em, config, 1, oracle)
            party2.start(bos, em, config, 2, oracle)
            return config

        return bind

    def test_matching_positive_signs_fix_zero(self, bound_parties):
        p1 = ScriptedParty(announce={(): 1})
        p2 = ScriptedParty(announce={(): 1})
        config = bound_parties(p1, p2)
        record = run_round(1, (), config, p1, p2, RandomStream(0))
        assert (record.resolution, record.c1, record.c2) == ("agreed", 0, 0)

    def test_matching_negative_signs_fix_one(self, bound_parties):
        p1 = ScriptedParty(announce={(): -1})
        p2 = ScriptedParty(announce={(): -1})
        config = bound_parties(p1, p2)
        record = run_round(1, (), config, p1, p2, RandomStream(0))
        assert (record.resolution, record.c1, record.c2) == ("agreed", 1, 1)

    def test_disagreement_flips_fairly(self, bound_parties):
        p1 = HonestParty()
        p2 = HonestParty()
        config = bound_parties(p1, p2)
        outcomes = {
            run_round(1, (), config, p1, p2, RandomStream(0).child(i)).c1
            for i in range(40)
        }
        assert outcomes == {0, 1}

    def test_both_cheaters_rejected(self, bound_parties):
        p1 = ScriptedParty(win_request={(): F(1, 2)})
        p2 = ScriptedParty(win_request={(): F(1, 2)})
        config = bound_parties(p1, p2)
        with pytest.raises(RuntimeError):
            run_round(1, (), config, p1, p2, RandomStream(0))


class TestRunProtocol:
    def test_honest_run_matches_exact_distribution(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        config = ProtocolConfig(F(1, 10), F(1, 2), em.k)
        oracle_dist = exact_output_distribution(bos, bos_fair_ce, config, em)
        assert oracle_dist == honest_output_distribution(em, bos)
        assert oracle_dist == {(0, 0, 0): F(1, 2), (1, 0, 0): F(1, 2)}

    def test_honest_run_matches_exact_distribution_random(self):
        rng = random.Random(101)
        for _ in range(6):
            game = random_rational_game(rng, 2, rng.randint(2, 3))
            p = random_distribution(rng, list(game.cells()))
            em = emulate(game, p, F(1, 2))
            config = ProtocolConfig(F(1, 10), F(1, 2), em.k)
            assert exact_output_distribution(game, p, config, em) == honest_output_distribution(
                em, game
            )

    def test_point_mass_never_flips(self, bos):
        point = JointDistribution.point_mass(JointStrategy(1, 1))
        em = emulate(bos, point, F(1, 2))
        config = ProtocolConfig(F(1, 10), F(1, 2), em.k)
        for seed in range(5):
            transcript = run_protocol(
                bos, point, config, HonestParty(), HonestParty(), RandomStream(seed),
                warn_not_ce=False,
            )
            assert all(r.resolution == "agreed" for r in transcript.rounds)
            assert transcript.output == (1, 1)

    def test_transcript_structure(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        config = ProtocolConfig(F(1, 10), F(1, 2), em.k)
        assert config.per_round_bias == F(1, 10) / (2 * 3)
        transcript = run_protocol(
            bos, bos_fair_ce, config, HonestParty(), HonestParty(), RandomStream(2)
        )
        assert len(transcript.rounds) == config.k
        assert transcript.output_1 == transcript.output_2 == em.table[
            sum(b << (em.k - 1 - i) for i, b in enumerate(transcript.ell))
        ]
        preference_messages = [m for m in transcript.messages if m.kind == "preference"]
        assert len(preference_messages) == 2 * config.k
        coin_messages = [m for m in transcript.messages if m.kind == "coin_result"]
        coin_rounds = [r for r in transcript.rounds if r.resolution == "coin"]
        assert len(coin_messages) == 2 * len(coin_rounds)

    def test_rejects_mismatched_round_count(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        config = ProtocolConfig(F(1, 10), F(1, 2), em.k + 1)
        with pytest.raises(ValueError):
            run_protocol(bos, bos_fair_ce, config, HonestParty(), HonestParty(),
                         RandomStream(0), em=em)

    def test_warns_on_non_equilibrium_input(self, bos):
        lopsided = JointDistribution.point_mass(JointStrategy(0, 1))
        config = ProtocolConfig.plan(bos, F(1, 10), F(1, 2))
        with pytest.warns(UserWarning):
            run_protocol(bos, lopsided, config, HonestParty(), HonestParty(), RandomStream(0))

    def test_agreed_rounds_improve_both_players(self):
        # Wherever the honest parties agree, the chosen branch must be
        # weakly better than the alternative for both of them.
        rng = random.Random(103)
        for _ in range(8):
            game = random_rational_game(rng, rng.randint(2, 3), rng.randint(2, 3))
            p = random_distribution(rng, list(game.cells()))
            em = emulate(game, p, F(1, 2))

            def walk(prefix):
                if len(prefix) == em.k:
                    return
                signs = [compute_preference(em, game, prefix, pl) for pl in (1, 2)]
                if signs[0] == signs[1]:
                    chosen = 0 if signs[0] == 1 else 1
                    for player in (1, 2):
                        better = conditional_expected_utility(em, game, prefix, chosen, player)
                        worse = conditional_expected_utility(em, game, prefix, 1 - chosen, player)
                        assert better >= worse
                walk(prefix + (0,))
                walk(prefix + (1,))

            walk(())


class TestBehaviors:
    def test_policy_party_requests_logged(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        config = ProtocolConfig(F(1, 10), F(1, 2), em.k)
        adv = worst_case_adversary(em, bos, config.per_round_bias, dishonest=1)
        transcript = run_protocol(
            bos, bos_fair_ce, config, PolicyParty(adv.policy), HonestParty(), RandomStream(11)
        )
        coin_rounds = [r for r in transcript.rounds if r.resolution == "coin"]
        assert coin_rounds and all(r.cheater == 1 for r in coin_rounds)
        assert coin_rounds[0].win_request == F(1, 2) + config.per_round_bias

    def test_scripted_party_defaults_to_honest(self, bos, bos_fair_ce):
        em = emulate(bos, bos_fair_ce, F(1, 2))
        config = ProtocolConfig(F(1, 10), F(1, 2), em.k)
        scripted = ScriptedParty()
        honest_counts = simulate_outputs(
            bos, bos_fair_ce, config, HonestParty(), HonestParty(), RandomStream(21), 500
        )
        scripted_counts = simulate_outputs(
            bos, bos_fair_ce, config, scripted, HonestParty(), RandomStream(21), 500
        )
        assert honest_counts == scripted_counts

    def test_simulation_counts_are_seed_stable(self, bos, bos_fair_ce):
        config = ProtocolConfig.plan(bos, F(1, 10), F(1, 2))
        first = simulate_outputs(
            bos, bos_fair_ce, config, HonestParty(), HonestParty(), RandomStream(31), 400
        )
        second = simulate_outputs(
            bos, bos_fair_ce, config, HonestParty(), HonestParty(), RandomStream(31), 400
        )
        assert first == second
        assert sum(first.values()) == 400

    def test_honest_empirical_frequencies(self, bos, bos_fair_ce):
        config = ProtocolConfig.plan(bos, F(1, 10), F(1, 2))
        counts = simulate_outputs(
            bos, bos_fair_ce, config, HonestParty(), HonestParty(), RandomStream(41), 4000
        )
        assert set(counts) == {(0, 0, 0), (1, 0, 0)}
        assert abs(counts[(0, 0, 0)] / 4000 - 0.5) < 0.05


class TestConfig:
    def test_plan_derives_round_count(self, bos):
        config = ProtocolConfig.plan(bos, F(1, 10), F(1, 2))
        assert config.k == 3
        assert config.per_round_bias == F(1, 60)

    def test_validation(self):
        with pytest.raises(ValueError):
            ProtocolConfig(F(0), F(1, 2), 3)
        with pytest.raises(ValueError):
            ProtocolConfig(F(1, 10), F(0), 3)

    def test_degenerate_zero_round_run(self, bos, bos_fair_ce):
        # A budget wider than the strategy space needs no index bits at
        # all: the table is one entry and the run is deterministic.
        config = ProtocolConfig.plan(bos, F(1, 10), F(8))
        assert config.k == 0
        assert config.per_round_bias == 0
        transcript = run_protocol(
            bos, bos_fair_ce, config, HonestParty(), HonestParty(), RandomStream(1)
        )
        assert transcript.rounds == []
        assert transcript.output == (0, 0)
