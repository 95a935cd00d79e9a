"""The two-party correlated strategy sampling protocol.

Both parties deterministically emulate the agreed joint distribution by
a 2^k table, then settle the k index bits one round at a time.  Each
round both announce which next bit they prefer (sign of the difference
in their conditional expected payoff, ties preferring 0).  Matching
announcements fix the bit outright; a mismatch is settled by a weak coin
flip whose bias budget is epsilon / (2k) per round, with player 1 in the
Alice role and player 1's announced bit as Alice's winning value.  After
k rounds both parties output the table entry at the assembled index.

Party behavior is pluggable: the honest behavior announces truthfully,
flips honestly, plays its own suggested strategy, and later accepts iff
the opponent played theirs.  Dishonest behaviors may lie in any of these
places; the channel itself is synchronous and lossless.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import coin_flip
from .coin_flip import CheaterRequest, WcfSpec
from .emulation import (
    BitPrefix,
    MultisetEmulation,
    PreferenceOracle,
    bits_to_index,
    emulate,
    rounds_for,
)
from .games import ZERO, Game, JointDistribution, JointStrategy, as_fraction, check_ce
from .rng import RandomStream

ACCEPT = "A"
REJECT = "R"

PreferenceSign = int  # +1 prefers next bit 0, -1 prefers next bit 1


def preferred_bit(sign: PreferenceSign) -> int:
    if sign == 1:
        return 0
    if sign == -1:
        return 1
    raise ValueError(f"preference sign must be +1 or -1, got {sign!r}")


def sign_for_bit(bit: int) -> PreferenceSign:
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    return 1 if bit == 0 else -1


def compute_preference(
    em: MultisetEmulation, game: Game, prefix: Sequence[int], player: int
) -> PreferenceSign:
    """Truthful announcement: sign of E[u | prefix,0] - E[u | prefix,1].

    A zero difference counts as preferring 0.
    """
    if len(prefix) >= em.k:
        raise ValueError("prefix must leave at least one undecided bit")
    return PreferenceOracle(em, game).preference(player, tuple(prefix))


@dataclass(frozen=True)
class ProtocolConfig:
    """Run parameters; the per-round coin bias is pinned to epsilon / (2k)."""

    epsilon: Fraction
    delta: Fraction
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.epsilon <= 0 or self.delta <= 0:
            raise ValueError("epsilon and delta must be positive")
        if self.k < 0:
            raise ValueError("round count cannot be negative")

    @property
    def per_round_bias(self) -> Fraction:
        if self.k == 0:
            return ZERO
        return self.epsilon / (2 * self.k)

    @classmethod
    def plan(cls, game: Game, epsilon, delta) -> "ProtocolConfig":
        """Derive the round count from the game size and the budget delta."""
        d = as_fraction(delta)
        return cls(as_fraction(epsilon), d, rounds_for(game.n_cells, d))


@dataclass(frozen=True)
class Message:
    """One wire message: preference, coin result, game move or check move."""

    kind: str  # "preference" | "coin_result" | "game_move" | "check_move"
    sender: int
    round_index: int | None
    value: object


@dataclass(frozen=True)
class RoundRecord:
    index: int
    sign1: PreferenceSign
    sign2: PreferenceSign
    resolution: str  # "agreed" | "coin"
    c1: int
    c2: int
    cheater: int | None = None
    win_request: Fraction | None = None


@dataclass
class Transcript:
    """Full record of one run; the game/check stages are filled in later."""

    config: ProtocolConfig
    rounds: list[RoundRecord]
    ell: BitPrefix
    output_1: JointStrategy | None
    output_2: JointStrategy | None
    messages: list[Message] = field(default_factory=list)
    stage2_moves: tuple[int, int] | None = None
    stage3_checks: tuple[str, str] | None = None
    payoffs: tuple[Fraction, Fraction] | None = None

    @property
    def output(self) -> JointStrategy | None:
        """The commonly sampled profile, or None if the parties disagree."""
        return self.output_1 if self.output_1 == self.output_2 else None


class PartyBehavior:
    """Honest behavior; subclasses override pieces to model deviations.

    ``start`` binds the behavior to one run.  ``announce`` returns a
    preference sign; ``coin_request`` returns None to flip honestly or a
    desired win probability to cheat; ``game_move`` picks the strategy
    actually played; ``check_move`` accepts or rejects after seeing the
    opponent's move.
    """

    player: int

    def start(
        self,
        game: Game,
        em: MultisetEmulation,
        config: ProtocolConfig,
        player: int,
        oracle: PreferenceOracle,
    ) -> None:
        self.game = game
        self.em = em
        self.config = config
        self.player = player
        self.oracle = oracle

    def announce(self, prefix: BitPrefix) -> PreferenceSign:
        return self.oracle.preference(self.player, prefix)

    def coin_request(
        self, prefix: BitPrefix, own_sign: PreferenceSign, opponent_sign: PreferenceSign
    ) -> Fraction | None:
        return None

    def game_move(self, suggestion: JointStrategy) -> int:
        return suggestion[self.player - 1]

    def check_move(
        self,
        suggestion: JointStrategy,
        opponent_move: int,
        opponent_check: str | None = None,
    ) -> str:
        expected = suggestion[2 - self.player]  # the opponent's suggested strategy
        return ACCEPT if opponent_move == expected else REJECT


class HonestParty(PartyBehavior):
    """The reference strategy: truthful, fair, obedient, checking."""


class PolicyParty(PartyBehavior):
    """Plays a per-prefix coin policy against an honest opponent.

    ``policy`` maps each prefix to the probability w of steering the next
    bit away from the honest side's preferred value: w == 0 is realized
    by announcing agreement (no coin at all), w > 0 by announcing the
    opposite preference and requesting w from the coin functionality.
    """

    def __init__(self, policy: Mapping[BitPrefix, Fraction]):
        self.policy = {tuple(k): as_fraction(v) for k, v in policy.items()}

    def _w(self, prefix: BitPrefix) -> Fraction:
        return self.policy.get(tuple(prefix), ZERO)

    def announce(self, prefix: BitPrefix) -> PreferenceSign:
        honest_player = 2 if self.player == 1 else 1
        honest_bit = self.oracle.preferred_bit(honest_player, prefix)
        bit = honest_bit if self._w(prefix) == 0 else 1 - honest_bit
        return sign_for_bit(bit)

    def coin_request(
        self, prefix: BitPrefix, own_sign: PreferenceSign, opponent_sign: PreferenceSign
    ) -> Fraction | None:
        w = self._w(prefix)
        return w if w > 0 else None


class ScriptedParty(PartyBehavior):
    """Behavior overridden pointwise from a script; honest where silent.

    ``announce``: prefix -> sign; ``win_request``: prefix -> probability;
    ``move``: strategy index to play instead of the suggestion;
    ``check``: a fixed "A" or "R".
    """

    def __init__(
        self,
        announce: Mapping[BitPrefix, int] | None = None,
        win_request: Mapping[BitPrefix, Fraction] | None = None,
        move: int | None = None,
        check: str | None = None,
    ):
        self.script_announce = {tuple(k): v for k, v in (announce or {}).items()}
        self.script_win = {tuple(k): as_fraction(v) for k, v in (win_request or {}).items()}
        self.script_move = move
        self.script_check = check

    def announce(self, prefix: BitPrefix) -> PreferenceSign:
        override = self.script_announce.get(tuple(prefix))
        return override if override is not None else super().announce(prefix)

    def coin_request(self, prefix, own_sign, opponent_sign):
        return self.script_win.get(tuple(prefix))

    def game_move(self, suggestion: JointStrategy) -> int:
        return self.script_move if self.script_move is not None else super().game_move(suggestion)

    def check_move(self, suggestion, opponent_move, opponent_check=None) -> str:
        if self.script_check is not None:
            return self.script_check
        return super().check_move(suggestion, opponent_move, opponent_check)


def _coin_specs(config: ProtocolConfig) -> tuple[WcfSpec, WcfSpec]:
    """One flip spec per possible player-1 preferred bit, built once per run."""
    bias = config.per_round_bias
    return WcfSpec(0, bias), WcfSpec(1, bias)


def _settle_bit(
    prefix: BitPrefix,
    specs: tuple[WcfSpec, WcfSpec],
    party1: PartyBehavior,
    party2: PartyBehavior,
    randomness: RandomStream,
) -> tuple[PreferenceSign, PreferenceSign, str, int, int | None, Fraction | None]:
    """One round: (sign1, sign2, resolution, bit, cheater, win_request)."""
    sign1 = party1.announce(prefix)
    sign2 = party2.announce(prefix)
    if sign1 == sign2:
        return sign1, sign2, "agreed", (0 if sign1 == 1 else 1), None, None

    spec = specs[0 if sign1 == 1 else 1]
    req1 = party1.coin_request(prefix, sign1, sign2)
    req2 = party2.coin_request(prefix, sign2, sign1)
    if req1 is not None and req2 is not None:
        raise RuntimeError(
            "both parties requested a biased coin; the functionality only "
            "bounds one cheater against an honest party"
        )
    if req1 is None and req2 is None:
        outcome = coin_flip.run_honest(spec, randomness)
        cheater, request = None, None
    else:
        cheater = 1 if req1 is not None else 2
        request = req1 if req1 is not None else req2
        outcome = coin_flip.run_with_cheater(
            spec,
            "alice" if cheater == 1 else "bob",
            CheaterRequest(request),
            randomness,
        )
    bit = outcome.resolved
    assert bit is not None  # the ideal functionality never disagrees
    return sign1, sign2, "coin", bit, cheater, request


def run_round(
    index: int,
    prefix: BitPrefix,
    config: ProtocolConfig,
    party1: PartyBehavior,
    party2: PartyBehavior,
    randomness: RandomStream,
) -> RoundRecord:
    """Settle one index bit: matching signs fix it, a mismatch flips for it."""
    sign1, sign2, resolution, bit, cheater, request = _settle_bit(
        tuple(prefix), _coin_specs(config), party1, party2, randomness
    )
    return RoundRecord(index, sign1, sign2, resolution, bit, bit, cheater, request)


def _execute_rounds(
    config: ProtocolConfig,
    party1: PartyBehavior,
    party2: PartyBehavior,
    randomness: RandomStream,
    keep_records: bool,
) -> tuple[BitPrefix, list[RoundRecord]]:
    specs = _coin_specs(config) if config.k else None
    bits: list[int] = []
    records: list[RoundRecord] = []
    for j in range(config.k):
        sign1, sign2, resolution, bit, cheater, request = _settle_bit(
            tuple(bits), specs, party1, party2, randomness
        )
        bits.append(bit)
        if keep_records:
            records.append(
                RoundRecord(j + 1, sign1, sign2, resolution, bit, bit, cheater, request)
            )
    return tuple(bits), records


def _start_parties(
    game: Game,
    p: JointDistribution,
    config: ProtocolConfig,
    party1: PartyBehavior,
    party2: PartyBehavior,
    em: MultisetEmulation | None,
) -> tuple[MultisetEmulation, PreferenceOracle]:
    if em is None:
        em = emulate(game, p, config.delta)
    if em.k != config.k:
        raise ValueError(f"emulation has k={em.k} but the config says k={config.k}")
    oracle = PreferenceOracle(em, game)
    party1.start(game, em, config, 1, oracle)
    party2.start(game, em, config, 2, oracle)
    return em, oracle


def run_protocol(
    game: Game,
    p: JointDistribution,
    config: ProtocolConfig,
    party1: PartyBehavior,
    party2: PartyBehavior,
    randomness: RandomStream,
    em: MultisetEmulation | None = None,
    record_messages: bool = True,
    warn_not_ce: bool = True,
) -> Transcript:
    """One full sampling run; returns the transcript with both outputs.

    The protocol happily samples any distribution, but its guarantees are
    stated for correlated equilibria, so a non-CE input draws a warning.
    """
    if warn_not_ce and not check_ce(game, p):
        warnings.warn("input distribution is not a correlated equilibrium", stacklevel=2)
    em, _ = _start_parties(game, p, config, party1, party2, em)
    ell, records = _execute_rounds(config, party1, party2, randomness, keep_records=True)
    output = em.table[bits_to_index(ell)]

    transcript = Transcript(config, records, ell, output, output)
    if record_messages:
        for rec in records:
            transcript.messages.append(Message("preference", 1, rec.index, rec.sign1))
            transcript.messages.append(Message("preference", 2, rec.index, rec.sign2))
            if rec.resolution == "coin":
                transcript.messages.append(Message("coin_result", 1, rec.index, rec.c1))
                transcript.messages.append(Message("coin_result", 2, rec.index, rec.c2))
    return transcript


def simulate_outputs(
    game: Game,
    p: JointDistribution,
    config: ProtocolConfig,
    party1: PartyBehavior,
    party2: PartyBehavior,
    randomness: RandomStream,
    trials: int,
    em: MultisetEmulation | None = None,
) -> Counter:
    """Empirical index distribution over many runs.

    Runs the real per-round machinery (announcements, agreements, coin
    flips) but skips transcript assembly; trial ``t`` draws from
    ``randomness.child(t)``, so counts are independent of execution order.
    """
    _start_parties(game, p, config, party1, party2, em)
    counts: Counter = Counter()
    for t in range(trials):
        ell, _ = _execute_rounds(config, party1, party2, randomness.child(t), keep_records=False)
        counts[ell] += 1
    return counts
