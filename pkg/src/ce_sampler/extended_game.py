"""The three-stage extended game: sample, play, then accept or reject.

Stage 1 runs the correlated sampling protocol, stage 2 plays the
underlying game, and stage 3 has each player submit Accept or Reject in
a fixed sequential order (player 1 first; the moves are deliberately not
simultaneous).  Any Reject zeroes both payoffs, which is what removes
the incentive to ignore the sampled suggestion: deviate in stage 2 and
an honest opponent rejects, leaving the deviator with nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .games import ZERO, Game, JointDistribution, JointStrategy
from .protocol import (
    ACCEPT,
    PartyBehavior,
    ProtocolConfig,
    Transcript,
    Message,
    run_protocol,
)
from .rng import RandomStream

HonestStrategySigma = PartyBehavior  # honest play is the behavior base class


def settle(
    game: Game, stage2: JointStrategy, checks: tuple[str, str]
) -> tuple[Fraction, Fraction]:
    """Final payoffs: the game's, unless anyone rejected — then (0, 0)."""
    if any(check != ACCEPT for check in checks):
        return ZERO, ZERO
    return game.payoffs(stage2)


@dataclass(frozen=True)
class ExtendedOutcome:
    stage2: JointStrategy
    checks: tuple[str, str]
    payoffs: tuple[Fraction, Fraction]
    transcript: Transcript


def play_extended_game(
    game: Game,
    p: JointDistribution,
    config: ProtocolConfig,
    party1: PartyBehavior,
    party2: PartyBehavior,
    randomness: RandomStream,
    **protocol_kwargs,
) -> ExtendedOutcome:
    """Run all three stages and settle the payoffs."""
    transcript = run_protocol(game, p, config, party1, party2, randomness, **protocol_kwargs)
    suggestion = transcript.output_1
    move1 = party1.game_move(suggestion)
    move2 = party2.game_move(suggestion)
    stage2 = JointStrategy(move1, move2)

    check1 = party1.check_move(suggestion, move2)
    check2 = party2.check_move(suggestion, move1, opponent_check=check1)
    checks = (check1, check2)
    payoffs = settle(game, stage2, checks)

    transcript.stage2_moves = (move1, move2)
    transcript.stage3_checks = checks
    transcript.payoffs = payoffs
    if transcript.messages:
        transcript.messages.append(Message("game_move", 1, None, move1))
        transcript.messages.append(Message("game_move", 2, None, move2))
        transcript.messages.append(Message("check_move", 1, None, check1))
        transcript.messages.append(Message("check_move", 2, None, check2))
    return ExtendedOutcome(stage2, checks, payoffs, transcript)


def augmented_normal_form(game: Game) -> Game:
    """Fold the Accept/Reject stage into one normal-form game.

    Each strategy becomes (strategy, Accept) or (strategy, Reject), with
    all Accept pairs listed first; a profile touching any Reject pays
    (0, 0).  The equilibrium structure of the original game survives: its
    correlated equilibria, re-read on the Accept block, are correlated
    equilibria here.
    """

    def labels(names: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(f"{n},Accept" for n in names) + tuple(f"{n},Reject" for n in names)

    rows, cols = game.rows, game.cols

    def payoff(matrix, r: int, c: int) -> Fraction:
        if r < rows and c < cols:
            return matrix[r][c]
        return ZERO

    u1 = tuple(tuple(payoff(game.u1, r, c) for c in range(2 * cols)) for r in range(2 * rows))
    u2 = tuple(tuple(payoff(game.u2, r, c) for c in range(2 * cols)) for r in range(2 * rows))
    return Game(labels(game.strategies_1), labels(game.strategies_2), u1, u2, normalized=game.normalized)
