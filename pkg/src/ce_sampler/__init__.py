"""Mediator-free correlated-equilibrium sampling toolkit.

Compute correlated equilibria of finite two-player games by exact linear
programming, simulate the two-party sampling protocol built on weak coin
flipping, and verify its payoff and bias guarantees both exactly and by
Monte Carlo.
"""

from .games import (
    Game,
    JointDistribution,
    JointStrategy,
    ProductDistribution,
    as_fraction,
    check_ce,
    check_mixed_ne,
    check_pure_ne,
    expected_utility,
    max_ce_deviation_gain,
    normalize,
)
from .ce_solver import (
    CeObjective,
    build_ce_lp,
    ce_polytope_vertices,
    ce_slice_bounds,
    solve_ce,
)
from .simplex import (
    Constraint,
    LpInfeasibleError,
    LpProblem,
    LpSolution,
    LpUnboundedError,
    simplex_solve,
)
from .emulation import (
    MultisetEmulation,
    PreferenceOracle,
    conditional_expected_utility,
    emulate,
    l1_distance,
    marginal,
    rounds_for,
)
from .coin_flip import (
    CheaterRequest,
    WcfOutcome,
    WcfSpec,
    outcome_distribution,
    run_honest,
    run_with_cheater,
)
from .protocol import (
    HonestParty,
    PartyBehavior,
    PolicyParty,
    ProtocolConfig,
    ScriptedParty,
    Transcript,
    compute_preference,
    run_protocol,
    simulate_outputs,
)
from .extended_game import (
    ExtendedOutcome,
    augmented_normal_form,
    play_extended_game,
    settle,
)
from .analysis import (
    AdversaryOutcome,
    AnalysisReport,
    analyze,
    deviation_gain_bound_holds,
    honest_output_distribution,
    honest_policy,
    policy_outcome,
    truthful_announcements_optimal,
    verify_distance_bounds,
    verify_payoff_guarantees,
    worst_case_adversary,
)
from .rng import RandomStream

__version__ = "0.1.0"

__all__ = [
    "AdversaryOutcome",
    "AnalysisReport",
    "CeObjective",
    "CheaterRequest",
    "Constraint",
    "ExtendedOutcome",
    "Game",
    "HonestParty",
    "JointDistribution",
    "JointStrategy",
    "LpInfeasibleError",
    "LpProblem",
    "LpSolution",
    "LpUnboundedError",
    "MultisetEmulation",
    "PartyBehavior",
    "PolicyParty",
    "PreferenceOracle",
    "ProductDistribution",
    "ProtocolConfig",
    "RandomStream",
    "ScriptedParty",
    "Transcript",
    "WcfOutcome",
    "WcfSpec",
    "analyze",
    "as_fraction",
    "augmented_normal_form",
    "build_ce_lp",
    "ce_polytope_vertices",
    "ce_slice_bounds",
    "check_ce",
    "check_mixed_ne",
    "check_pure_ne",
    "compute_preference",
    "conditional_expected_utility",
    "deviation_gain_bound_holds",
    "emulate",
    "expected_utility",
    "honest_output_distribution",
    "honest_policy",
    "l1_distance",
    "marginal",
    "max_ce_deviation_gain",
    "normalize",
    "outcome_distribution",
    "play_extended_game",
    "policy_outcome",
    "rounds_for",
    "run_honest",
    "run_protocol",
    "run_with_cheater",
    "settle",
    "simplex_solve",
    "simulate_outputs",
    "solve_ce",
    "truthful_announcements_optimal",
    "verify_distance_bounds",
    "verify_payoff_guarantees",
    "worst_case_adversary",
]
