import random
from fractions import Fraction as F

import pytest

from ce_sampler import Game, JointDistribution, JointStrategy


@pytest.fixture
def bos() -> Game:
    """Battle-of-the-Sexes-style coordination game with asymmetric stakes."""
    return Game.from_payoffs([[4, 0], [0, 2]], [[2, 0], [0, 4]], ["A", "B"], ["A", "B"])


@pytest.fixture
def coinflip() -> Game:
    """Each player wins (payoff 1) when the matched bit lands on their side."""
    return Game.from_payoffs([[1, 0], [0, 0]], [[0, 0], [0, 1]], ["0", "1"], ["0", "1"])


@pytest.fixture
def bos_fair_ce() -> JointDistribution:
    return JointDistribution({JointStrategy(0, 0): F(1, 2), JointStrategy(1, 1): F(1, 2)})


def random_rational_game(rng: random.Random, rows: int, cols: int) -> Game:
    def matrix():
        return [
            [F(rng.randint(0, 12), rng.choice([1, 1, 2, 3, 4])) for _ in range(cols)]
            for _ in range(rows)
        ]

    return Game.from_payoffs(matrix(), matrix())


def random_distribution(rng: random.Random, cells: list[JointStrategy]) -> JointDistribution:
    weights = [F(rng.randint(0, 9)) for _ in cells]
    if not any(weights):
        weights[0] = F(1)
    total = sum(weights)
    return JointDistribution(
        {c: w / total for c, w in zip(cells, weights) if w}
    )
