"""Exact-arithmetic linear programming via a dense two-phase simplex.

The solver maximizes a linear objective over nonnegative rational
variables subject to <=, >= and == constraints.  All pivoting is done on
``fractions.Fraction`` values, and entering/leaving variables follow
Bland's rule (lowest eligible index, lowest basis index on ratio ties),
so every run terminates and identical inputs produce identical output —
the two properties the equilibrium layer depends on.

Sizes here are small (tens of rows); no effort is spent on sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .games import ZERO, as_fraction

LE, GE, EQ = "<=", ">=", "=="
_RELATIONS = (LE, GE, EQ)


class LpInfeasibleError(Exception):
    """The constraint system has no nonnegative solution."""


class LpUnboundedError(Exception):
    """The objective can grow without bound over the feasible region."""


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction

    def __post_init__(self) -> None:
        if self.relation not in _RELATIONS:
            raise ValueError(f"relation must be one of {_RELATIONS}")
        object.__setattr__(self, "coeffs", tuple(as_fraction(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", as_fraction(self.rhs))


def constraint(coeffs: Sequence, relation: str, rhs) -> Constraint:
    return Constraint(tuple(as_fraction(c) for c in coeffs), relation, as_fraction(rhs))


@dataclass(frozen=True)
class LpProblem:
    """Maximize ``objective . x`` subject to ``constraints`` and x >= 0."""

    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "objective", tuple(as_fraction(c) for c in self.objective))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        n = len(self.objective)
        for con in self.constraints:
            if len(con.coeffs) != n:
                raise ValueError("constraint width does not match objective length")

    @property
    def n_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpSolution:
    values: tuple[Fraction, ...]
    objective_value: Fraction


def _is_implied_nonnegativity(con: Constraint) -> bool:
    """Rows stating ``x_i >= 0`` are already enforced by the variable domain."""
    if con.rhs != 0:
        return False
    nonzero = [c for c in con.coeffs if c != 0]
    if len(nonzero) != 1:
        return False
    c = nonzero[0]
    return (con.relation == GE and c > 0) or (con.relation == LE and c < 0)


class _Tableau:
    def __init__(self, lp: LpProblem):
        rows = [c for c in lp.constraints if not _is_implied_nonnegativity(c)]
        self.n = lp.n_vars
        slack_rows = [i for i, c in enumerate(rows) if c.relation != EQ]
        self.n_slack = len(slack_rows)
        m = len(rows)
        width = self.n + self.n_slack + m  # structural + slack + artificial
        self.width = width
        self.matrix: list[list[Fraction]] = []
        self.rhs: list[Fraction] = []
        self.basis: list[int] = []

        slack_col = {row: self.n + j for j, row in enumerate(slack_rows)}
        for i, con in enumerate(rows):
            line = list(con.coeffs) + [ZERO] * (self.n_slack + m)
            if con.relation == LE:
                line[slack_col[i]] = Fraction(1)
            elif con.relation == GE:
                line[slack_col[i]] = Fraction(-1)
            b = con.rhs
            if b < 0:
                line = [-v for v in line]
                b = -b
            art = self.n + self.n_slack + i
            line[art] = Fraction(1)
            self.matrix.append(line)
            self.rhs.append(b)
            self.basis.append(art)
        self.first_artificial = self.n + self.n_slack

    def _objective_row(self, cost: list[Fraction]) -> tuple[list[Fraction], Fraction]:
        # reduced costs z_j - c_j for the current basis
        z = [ZERO] * self.width
        z0 = ZERO
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.matrix[i]
                for j in range(self.width):
                    if row[j]:
                        z[j] += cb * row[j]
                z0 += cb * self.rhs[i]
        return [z[j] - cost[j] for j in range(self.width)], z0

    def _pivot(self, row: int, col: int, zrow: list[Fraction]) -> None:
        pivot = self.matrix[row][col]
        line = self.matrix[row]
        inv = 1 / pivot
        self.matrix[row] = [v * inv for v in line]
        self.rhs[row] *= inv
        for i, other in enumerate(self.matrix):
            if i != row and other[col]:
                factor = other[col]
                src = self.matrix[row]
                self.matrix[i] = [a - factor * b for a, b in zip(other, src)]
                self.rhs[i] -= factor * self.rhs[row]
        if zrow[col]:
            factor = zrow[col]
            src = self.matrix[row]
            for j in range(self.width):
                zrow[j] -= factor * src[j]
        self.basis[row] = col

    def run(self, cost: list[Fraction], allowed: int) -> Fraction:
        """Bland-rule simplex over columns [0, allowed); returns the optimum."""
        zrow, z0 = self._objective_row(cost)
        while True:
            entering = next((j for j in range(allowed) if zrow[j] < 0), None)
            if entering is None:
                value = ZERO
                for i, b in enumerate(self.basis):
                    if cost[b]:
                        value += cost[b] * self.rhs[i]
                return value
            best_row, best_ratio = None, None
            for i, line in enumerate(self.matrix):
                coeff = line[entering]
                if coeff > 0:
                    ratio = self.rhs[i] / coeff
                    key = (ratio, self.basis[i])
                    if best_ratio is None or key < best_ratio:
                        best_ratio, best_row = key, i
            if best_row is None:
                raise LpUnboundedError(f"column {entering} has no blocking row")
            self._pivot(best_row, entering, zrow)

    def drive_out_artificials(self) -> None:
        limit = self.first_artificial
        row = 0
        while row < len(self.matrix):
            if self.basis[row] >= limit:
                col = next((j for j in range(limit) if self.matrix[row][j] != 0), None)
                if col is None:
                    # redundant constraint row
                    del self.matrix[row], self.rhs[row], self.basis[row]
                    continue
                dummy = [ZERO] * self.width
                self._pivot(row, col, dummy)
            row += 1


def simplex_solve(lp: LpProblem) -> LpSolution:
    """Solve ``lp`` exactly, returning an optimal vertex.

    Raises :class:`LpInfeasibleError` / :class:`LpUnboundedError` when the
    problem has no solution or no finite optimum.
    """
    tab = _Tableau(lp)

    phase1_cost = [ZERO] * tab.width
    for j in range(tab.first_artificial, tab.width):
        phase1_cost[j] = Fraction(-1)
    if tab.run(phase1_cost, tab.width) != 0:
        raise LpInfeasibleError("artificial variables cannot be driven to zero")
    tab.drive_out_artificials()

    phase2_cost = [ZERO] * tab.width
    for j, c in enumerate(lp.objective):
        phase2_cost[j] = c
    value = tab.run(phase2_cost, tab.first_artificial)

    x = [ZERO] * lp.n_vars
    for i, b in enumerate(tab.basis):
        if b < lp.n_vars:
            x[b] = tab.rhs[i]
    return LpSolution(tuple(x), value)
