"""Correlated-equilibrium computation by exact linear programming.

The CE conditions of a finite two-player game are linear in the joint
distribution, so the set of correlated equilibria is a polytope: one
variable per strategy profile, one inequality per ordered pair of a
suggested and a replacement strategy, plus nonnegativity and the
sum-to-one row.  This module assembles that polytope, optimizes over it
under a few selectable objectives, and settles ties lexicographically so
that every solve is fully deterministic.
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .games import ZERO, Game, JointDistribution, JointStrategy
from .simplex import EQ, GE, Constraint, LpProblem, simplex_solve


class CeObjective(Enum):
    """Selection rule applied on top of the CE polytope.

    MAX_TOTAL_LEX maximizes the sum of both players' expected payoffs,
    then refines lexicographically (profile probabilities are maximized
    one at a time in row-major order).  MAX_FAIR first maximizes the
    worse player's payoff, then total payoff, then refines the same way.
    FEASIBLE skips straight to the lexicographic refinement.
    """

    MAX_TOTAL_LEX = "max-total-lex"
    MAX_FAIR = "max-fair"
    FEASIBLE = "feasible"

    @classmethod
    def from_string(cls, text: str) -> "CeObjective":
        for member in cls:
            if member.value == text:
                return member
        options = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown objective {text!r} (expected one of: {options})")


def cell_order(game: Game) -> list[JointStrategy]:
    """Canonical row-major ordering of profiles; fixes variable indices."""
    return list(game.cells())


def payoff_vector(game: Game, player: int) -> tuple[Fraction, ...]:
    """Coefficients of E[u_player] as a linear functional of the joint distribution."""
    return tuple(game.utility(player, s) for s in cell_order(game))


def total_payoff_vector(game: Game) -> tuple[Fraction, ...]:
    return tuple(a + b for a, b in zip(payoff_vector(game, 1), payoff_vector(game, 2)))


def deviation_constraints(game: Game) -> list[Constraint]:
    """One >=0 row per player and ordered (suggested, replacement) pair."""
    order = cell_order(game)
    index = {s: i for i, s in enumerate(order)}
    rows: list[Constraint] = []
    for suggested in range(game.rows):
        for alt in range(game.rows):
            if alt == suggested:
                continue
            coeffs = [ZERO] * len(order)
            for c in range(game.cols):
                coeffs[index[JointStrategy(suggested, c)]] = (
                    game.u1[suggested][c] - game.u1[alt][c]
                )
            rows.append(Constraint(tuple(coeffs), GE, ZERO))
    for suggested in range(game.cols):
        for alt in range(game.cols):
            if alt == suggested:
                continue
            coeffs = [ZERO] * len(order)
            for r in range(game.rows):
                coeffs[index[JointStrategy(r, suggested)]] = (
                    game.u2[r][suggested] - game.u2[r][alt]
                )
            rows.append(Constraint(tuple(coeffs), GE, ZERO))
    return rows


def _nonnegativity_constraints(n: int) -> list[Constraint]:
    rows = []
    for i in range(n):
        coeffs = [ZERO] * n
        coeffs[i] = Fraction(1)
        rows.append(Constraint(tuple(coeffs), GE, ZERO))
    return rows


def _sum_to_one(n: int) -> Constraint:
    return Constraint(tuple(Fraction(1) for _ in range(n)), EQ, Fraction(1))


def build_ce_lp(game: Game, objective: CeObjective = CeObjective.MAX_TOTAL_LEX) -> LpProblem:
    """The LP whose feasible region is exactly the game's CE polytope.

    The objective vector is the total payoff for MAX_TOTAL_LEX and zero
    otherwise (MAX_FAIR's maximin step is not a fixed linear functional;
    :func:`solve_ce` performs it via an epigraph reformulation).
    """
    n = game.n_cells
    rows = deviation_constraints(game) + _nonnegativity_constraints(n) + [_sum_to_one(n)]
    if objective is CeObjective.MAX_TOTAL_LEX:
        vector = total_payoff_vector(game)
    else:
        vector = tuple(ZERO for _ in range(n))
    return LpProblem(vector, tuple(rows))


def _maximize(vector: Sequence[Fraction], rows: Sequence[Constraint]) -> Fraction:
    return simplex_solve(LpProblem(tuple(vector), tuple(rows))).objective_value


def _unit(n: int, i: int) -> tuple[Fraction, ...]:
    coeffs = [ZERO] * n
    coeffs[i] = Fraction(1)
    return tuple(coeffs)


def _maximin_payoff(game: Game, rows: list[Constraint]) -> Fraction:
    """Best achievable min-player payoff, via an epigraph split t = t+ - t-."""
    n = game.n_cells
    wide = n + 2
    widened = [Constraint(c.coeffs + (ZERO, ZERO), c.relation, c.rhs) for c in rows]
    for player in (1, 2):
        coeffs = payoff_vector(game, player) + (Fraction(-1), Fraction(1))
        widened.append(Constraint(coeffs, GE, ZERO))
    objective = tuple([ZERO] * n + [Fraction(1), Fraction(-1)])
    assert len(objective) == wide
    return simplex_solve(LpProblem(objective, tuple(widened))).objective_value


def solve_ce(game: Game, objective: CeObjective = CeObjective.MAX_TOTAL_LEX) -> JointDistribution:
    """Compute a correlated equilibrium under the chosen selection rule.

    The CE polytope is never empty (every mixed equilibrium lies inside
    it), so this always returns a distribution; it passes
    :func:`ce_sampler.games.check_ce` exactly, and identical inputs yield
    identical output.
    """
    n = game.n_cells
    base = build_ce_lp(game, objective)
    rows = list(base.constraints)

    if objective is CeObjective.MAX_FAIR:
        floor = _maximin_payoff(game, rows)
        for player in (1, 2):
            rows.append(Constraint(payoff_vector(game, player), GE, floor))

    if objective in (CeObjective.MAX_FAIR, CeObjective.MAX_TOTAL_LEX):
        total = total_payoff_vector(game)
        best_total = _maximize(total, rows)
        rows.append(Constraint(total, EQ, best_total))

    order = cell_order(game)
    probs: dict[JointStrategy, Fraction] = {}
    for i, cell in enumerate(order):
        vector = _unit(n, i)
        value = _maximize(vector, rows)
        rows.append(Constraint(vector, EQ, value))
        if value:
            probs[cell] = value
    return JointDistribution(probs)


# ---------------------------------------------------------------------------
# Polytope geometry helpers (small games only)
# ---------------------------------------------------------------------------


def _solve_square(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gaussian elimination; None when the system is singular."""
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot_row is None:
            return None
        a[col], a[pivot_row] = a[pivot_row], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def ce_polytope_vertices(game: Game, max_systems: int = 100_000) -> list[JointDistribution]:
    """Enumerate every vertex of the CE polytope.

    Works by making n-1 of the inequality constraints tight alongside the
    sum-to-one equality and keeping the feasible, unique solutions.  The
    subset count explodes with game size, so this is guarded; larger games
    should use :func:`ce_slice_bounds` instead.
    """
    n = game.n_cells
    inequalities = deviation_constraints(game) + _nonnegativity_constraints(n)
    if n > 1 and math.comb(len(inequalities), n - 1) > max_systems:
        raise ValueError("game too large for vertex enumeration; use ce_slice_bounds")

    ones = [Fraction(1)] * n
    seen: set[tuple[Fraction, ...]] = set()
    vertices: list[JointDistribution] = []
    for chosen in combinations(inequalities, n - 1):
        rows = [ones] + [list(c.coeffs) for c in chosen]
        rhs = [Fraction(1)] + [c.rhs for c in chosen]
        x = _solve_square(rows, rhs)
        if x is None:
            continue
        if any(v < 0 for v in x):
            continue
        if any(
            sum((c * v for c, v in zip(con.coeffs, x)), ZERO) < con.rhs
            for con in inequalities
        ):
            continue
        key = tuple(x)
        if key not in seen:
            seen.add(key)
            vertices.append(
                JointDistribution({s: v for s, v in zip(cell_order(game), x) if v})
            )
    vertices.sort(key=lambda d: tuple(d.prob(s) for s in cell_order(game)), reverse=True)
    return vertices


def ce_slice_bounds(
    game: Game, extra: Sequence[Constraint] = ()
) -> list[tuple[Fraction, Fraction]]:
    """Per-profile (min, max) probability over the CE polytope cut by ``extra``.

    When min == max for every profile the slice is a single point — the
    workhorse for uniqueness arguments in games too large to enumerate.
    Raises LpInfeasibleError if the slice is empty.
    """
    n = game.n_cells
    rows = (
        deviation_constraints(game)
        + _nonnegativity_constraints(n)
        + [_sum_to_one(n)]
        + list(extra)
    )
    bounds = []
    for i in range(n):
        vector = _unit(n, i)
        hi = _maximize(vector, rows)
        lo = -_maximize(tuple(-c for c in vector), rows)
        bounds.append((lo, hi))
    return bounds
