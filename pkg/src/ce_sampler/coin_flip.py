"""Ideal weak coin flipping between two parties with a bounded-bias cheater.

Each party has a designated winning bit (Alice wins on ``a``, Bob on
``1 - a``).  Honest-vs-honest runs are fair.  A cheater facing an honest
party may request any win probability; the functionality clamps it to
1/2 + bias.  Losing on purpose is unrestricted — a cheater may hand the
opponent the win with certainty.  Nobody aborts: a party that wanted to
abort could simply have declared victory instead, so the disagreement
outcome exists in the types only for transcript-level bookkeeping.

The quantum protocol realizing this functionality for arbitrarily small
bias is deliberately out of scope; everything here treats it as a black
box with the interface above.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .games import as_fraction
from .rng import RandomStream

Party = Literal["alice", "bob"]
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class WcfSpec:
    """Parameters of one flip: Alice's winning bit and the cheater bias cap."""

    preferred_value_alice: int
    bias: Fraction

    def __post_init__(self) -> None:
        if self.preferred_value_alice not in (0, 1):
            raise ValueError("preferred value must be a bit")
        object.__setattr__(self, "bias", as_fraction(self.bias))
        if not 0 <= self.bias < HALF:
            raise ValueError("bias must satisfy 0 <= bias < 1/2")

    def winning_value(self, party: Party) -> int:
        if party == "alice":
            return self.preferred_value_alice
        if party == "bob":
            return 1 - self.preferred_value_alice
        raise ValueError(f"unknown party {party!r}")


@dataclass(frozen=True)
class WcfOutcome:
    """Both parties' output bits; ``resolved`` is None iff they disagree."""

    c_alice: int
    c_bob: int

    @property
    def resolved(self) -> int | None:
        return self.c_alice if self.c_alice == self.c_bob else None


@dataclass(frozen=True)
class CheaterRequest:
    """A cheating party's desired win probability (clamped by the functionality)."""

    win_probability: Fraction

    def __post_init__(self) -> None:
        w = as_fraction(self.win_probability)
        if not 0 <= w <= 1:
            raise ValueError("requested win probability must lie in [0, 1]")
        object.__setattr__(self, "win_probability", w)


def run_honest(spec: WcfSpec, randomness: RandomStream) -> WcfOutcome:
    """Both parties honest: Alice's bit comes up with probability exactly 1/2."""
    alice_wins = randomness.bernoulli(HALF)
    bit = spec.preferred_value_alice if alice_wins else 1 - spec.preferred_value_alice
    return WcfOutcome(bit, bit)


def cheater_win_probability(spec: WcfSpec, request: CheaterRequest) -> Fraction:
    """The exact win probability the functionality grants: min(w, 1/2 + bias)."""
    return min(request.win_probability, HALF + spec.bias)


def outcome_distribution(
    spec: WcfSpec, cheater: Party, request: CheaterRequest
) -> dict[int, Fraction]:
    """Exact distribution of the resolved bit with one cheating party."""
    win = cheater_win_probability(spec, request)
    winning_bit = spec.winning_value(cheater)
    return {winning_bit: win, 1 - winning_bit: 1 - win}


def run_with_cheater(
    spec: WcfSpec, cheater: Party, request: CheaterRequest, randomness: RandomStream
) -> WcfOutcome:
    """One cheating party against an honest one.

    The cheater's winning bit occurs with probability exactly
    ``min(w, 1/2 + bias)``; a request of 0 hands the honest party the win
    with certainty.  The honest party's output always matches the
    functionality's outcome.
    """
    win = cheater_win_probability(spec, request)
    winning_bit = spec.winning_value(cheater)
    bit = winning_bit if randomness.bernoulli(win) else 1 - winning_bit
    return WcfOutcome(bit, bit)
