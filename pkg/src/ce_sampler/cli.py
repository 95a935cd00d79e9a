"""Command-line front end.

Subcommands: ``solve-ce`` (compute a correlated equilibrium), ``run``
(Monte Carlo over the sampling protocol), ``play`` (full three-stage
game), ``analyze`` (exact adversary analysis) and ``reproduce`` (the
acceptance suite).  All randomness flows from ``--seed``; omitting it
picks a fresh seed and prints it.  Reports are JSON with exact fractions
as strings plus float conveniences, and re-running with the same seed
and inputs produces byte-identical report bodies.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .acceptance import run_acceptance
from .analysis import verify_distance_bounds, verify_payoff_guarantees, worst_case_adversary
from .ce_solver import CeObjective, solve_ce
from .emulation import emulate
from .extended_game import play_extended_game
from .games import ZERO, Game, JointDistribution, as_fraction, check_ce, normalize
from .protocol import (
    HonestParty,
    PartyBehavior,
    PolicyParty,
    ProtocolConfig,
    ScriptedParty,
    run_protocol,
)
from .rng import RandomStream
from .serialization import (
    GameFormatError,
    distribution_to_json,
    emulation_to_json,
    fraction_field,
    parse_game_file,
    transcript_records,
    write_json,
)

PER_TRIAL_LIMIT = 5000  # per-trial rows are included in reports up to this many trials


def _fresh_seed() -> int:
    return int.from_bytes(os.urandom(4), "big")


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("CE_SAMPLER_JOBS", "1")))
    except ValueError:
        return 1


def _build_party(
    spec: str, role: int, game: Game, em, config: ProtocolConfig
) -> PartyBehavior:
    if spec == "honest":
        return HonestParty()
    if spec == "greedy":
        adv = worst_case_adversary(em, normalize(game), config.per_round_bias, role)
        return PolicyParty(adv.policy)
    if spec.startswith("script:"):
        path = spec.split(":", 1)[1]
        with open(path) as handle:
            raw = json.load(handle)
        def prefix_map(field, convert):
            return {
                tuple(int(b) for b in key): convert(value)
                for key, value in raw.get(field, {}).items()
            }
        return ScriptedParty(
            announce=prefix_map("announce", int),
            win_request=prefix_map("win_request", as_fraction),
            move=raw.get("game_move"),
            check=raw.get("check_move"),
        )
    raise ValueError(f"unknown party spec {spec!r} (use honest, greedy or script:<file>)")


def _config_echo(args, game_path: str, config: ProtocolConfig, seed: int) -> dict:
    return {
        "game": os.path.basename(game_path),
        "objective": args.objective,
        "epsilon": str(config.epsilon),
        "delta": str(config.delta),
        "k": config.k,
        "per_round_bias": str(config.per_round_bias),
        "party1": getattr(args, "party1", None),
        "party2": getattr(args, "party2", None),
        "trials": getattr(args, "trials", None),
        "seed": seed,
        "jobs": getattr(args, "jobs", 1),
    }


def _mean_with_half_width(total: Fraction, total_sq: Fraction, n: int) -> dict:
    mean = total / n
    variance = max(total_sq / n - mean * mean, ZERO)
    half_width = 1.96 * math.sqrt(float(variance) / n)
    return {"exact_mean": str(mean), "float": float(mean), "half_width_95": half_width}


def _trial_chunk(payload) -> dict:
    """Worker: run trials [start, start+count) and aggregate.

    Per-trial streams are derived from the absolute trial index, so the
    result is independent of how trials are chunked across processes.
    """
    (game, p, config, spec1, spec2, seed, start, count, mode, want_rows) = payload
    em = emulate(game, p, config.delta)
    party1 = _build_party(spec1, 1, game, em, config)
    party2 = _build_party(spec2, 2, game, em, config)
    root = RandomStream(seed)
    outputs: Counter = Counter()
    payoff_sum = [ZERO, ZERO]
    payoff_sq = [ZERO, ZERO]
    rows = [] if want_rows else None
    for t in range(start, start + count):
        stream = root.child(t)
        if mode == "run":
            transcript = run_protocol(
                game, p, config, party1, party2, stream,
                em=em, record_messages=False, warn_not_ce=False,
            )
            out = transcript.output
            outputs[(out.s1, out.s2)] += 1
            if rows is not None:
                rows.append({
                    "trial": t,
                    "ell": "".join(str(b) for b in transcript.ell),
                    "output": f"{out.s1},{out.s2}",
                })
        else:
            outcome = play_extended_game(
                game, p, config, party1, party2, stream,
                em=em, record_messages=False, warn_not_ce=False,
            )
            outputs[(outcome.stage2.s1, outcome.stage2.s2)] += 1
            for i in (0, 1):
                payoff_sum[i] += outcome.payoffs[i]
                payoff_sq[i] += outcome.payoffs[i] ** 2
            if rows is not None:
                out = outcome.transcript.output
                rows.append({
                    "trial": t,
                    "ell": "".join(str(b) for b in outcome.transcript.ell),
                    "suggested": f"{out.s1},{out.s2}",
                    "played": f"{outcome.stage2.s1},{outcome.stage2.s2}",
                    "checks": "".join(outcome.checks),
                    "payoffs": [str(v) for v in outcome.payoffs],
                })
    return {
        "outputs": outputs,
        "payoff_sum": payoff_sum,
        "payoff_sq": payoff_sq,
        "rows": rows,
    }


def _run_trials(game, p, config, args, seed: int, mode: str) -> dict:
    trials, jobs = args.trials, args.jobs
    want_rows = trials <= PER_TRIAL_LIMIT
    chunks = []
    per_chunk = max(1, math.ceil(trials / max(jobs, 1)))
    start = 0
    while start < trials:
        count = min(per_chunk, trials - start)
        chunks.append((game, p, config, args.party1, args.party2, seed, start, count, mode, want_rows))
        start += count
    if jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trial_chunk, chunks))
    else:
        results = [_trial_chunk(chunk) for chunk in chunks]

    outputs: Counter = Counter()
    payoff_sum = [ZERO, ZERO]
    payoff_sq = [ZERO, ZERO]
    rows = [] if want_rows else None
    for result in results:
        outputs.update(result["outputs"])
        for i in (0, 1):
            payoff_sum[i] += result["payoff_sum"][i]
            payoff_sq[i] += result["payoff_sq"][i]
        if rows is not None:
            rows.extend(result["rows"])
    if rows is not None:
        rows.sort(key=lambda r: r["trial"])

    report: dict = {
        "frequencies": {
            f"{s1},{s2}": {"count": n, "empirical": n / trials}
            for (s1, s2), n in sorted(outputs.items())
        },
        "per_trial": rows,
    }
    if mode == "play":
        report["payoffs"] = {
            f"p{i + 1}": _mean_with_half_width(payoff_sum[i], payoff_sq[i], trials)
            for i in (0, 1)
        }
    return report


def _prepare(args) -> tuple[Game, JointDistribution, ProtocolConfig, int]:
    game = parse_game_file(args.game)
    p = solve_ce(game, CeObjective.from_string(args.objective))
    config = ProtocolConfig.plan(game, as_fraction(args.epsilon), as_fraction(args.delta))
    seed = args.seed if args.seed is not None else _fresh_seed()
    if args.seed is None:
        print(f"seed: {seed}")
    return game, p, config, seed


def _cmd_solve_ce(args) -> int:
    game = parse_game_file(args.game)
    dist = solve_ce(game, CeObjective.from_string(args.objective))
    payload = distribution_to_json(dist)
    if args.out:
        write_json(args.out, payload)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_run(args) -> int:
    game, p, config, seed = _prepare(args)
    report = {
        "command": "run",
        "config": _config_echo(args, args.game, config, seed),
        **_run_trials(game, p, config, args, seed, "run"),
    }
    if args.analyze:
        exact = verify_distance_bounds(
            emulate(game, p, config.delta), game, config.epsilon, dishonest=1
        )
        report["exact_honest_distribution"] = {
            "".join(str(b) for b in bits): str(mass)
            for bits, mass in sorted(exact.honest_distribution.items())
        }
        report["exact_verdicts"] = exact.verdicts
    if args.transcript:
        _write_transcripts(game, p, config, args, seed)
    _emit_report(report, args.report)
    return 0


def _write_transcripts(game, p, config, args, seed: int) -> None:
    if args.trials > PER_TRIAL_LIMIT:
        raise ValueError(f"transcript logging is capped at {PER_TRIAL_LIMIT} trials")
    em = emulate(game, p, config.delta)
    party1 = _build_party(args.party1, 1, game, em, config)
    party2 = _build_party(args.party2, 2, game, em, config)
    root = RandomStream(seed)
    with open(args.transcript, "w") as handle:
        for t in range(args.trials):
            transcript = run_protocol(
                game, p, config, party1, party2, root.child(t),
                em=em, record_messages=True, warn_not_ce=False,
            )
            for record in transcript_records(transcript):
                handle.write(json.dumps(record) + "\n")


def _cmd_play(args) -> int:
    game, p, config, seed = _prepare(args)
    report = {
        "command": "play",
        "config": _config_echo(args, args.game, config, seed),
        **_run_trials(game, p, config, args, seed, "play"),
    }
    report["exact"] = {
        "input_is_ce": check_ce(game, p),
        "source_payoffs": {
            f"p{player}": fraction_field(
                sum((mass * game.utility(player, s) for s, mass in p.probs.items()), ZERO)
            )
            for player in (1, 2)
        },
    }
    if args.analyze:
        verdicts = verify_payoff_guarantees(emulate(game, p, config.delta), game, config)
        report["exact"]["payoff_guarantees"] = verdicts
    _emit_report(report, args.report)
    return 0


def _cmd_analyze(args) -> int:
    game = parse_game_file(args.game)
    p = solve_ce(game, CeObjective.from_string(args.objective))
    config = ProtocolConfig.plan(game, as_fraction(args.epsilon), as_fraction(args.delta))
    em = emulate(game, p, config.delta)
    report = verify_distance_bounds(em, game, config.epsilon, args.dishonest, power=args.power)
    payoff_verdicts = verify_payoff_guarantees(em, game, config, power=args.power)

    def dist_json(dist):
        return {
            "".join(str(b) for b in bits): str(mass)
            for bits, mass in sorted(dist.items())
        }

    payload = {
        "command": "analyze",
        "config": {
            "game": os.path.basename(args.game),
            "objective": args.objective,
            "epsilon": str(config.epsilon),
            "delta": str(config.delta),
            "k": config.k,
            "per_round_bias": str(config.per_round_bias),
            "dishonest": args.dishonest,
            "adversary_power": args.power,
        },
        "equilibrium": distribution_to_json(p),
        "emulation": emulation_to_json(em),
        "honest_distribution": dist_json(report.honest_distribution),
        "adversarial_distribution": dist_json(report.adversarial_distribution),
        "adversary_value": fraction_field(report.adversary_value),
        "l1_per_round": [str(v) for v in report.l1_per_round],
        "utilities": {name: fraction_field(v) for name, v in report.utilities.items()},
        "verdicts": {**report.verdicts, **payoff_verdicts},
        "policy": {
            "".join(str(b) for b in prefix): str(w)
            for prefix, w in sorted(report.policy.items())
        },
    }
    _emit_report(payload, args.report)
    return 0 if all(payload["verdicts"].values()) else 1


def _cmd_reproduce(args) -> int:
    results = run_acceptance(only=args.only)
    width = max(len(r.name) for r in results)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status}  {result.name:<{width}}  {result.elapsed:7.2f}s  {result.detail}")
    failed = [r for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def _emit_report(payload: dict, path: str | None) -> None:
    if path:
        write_json(path, payload)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))


def _add_protocol_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--game", required=True, help="game JSON file")
    sub.add_argument(
        "--objective",
        default="max-total-lex",
        choices=[o.value for o in CeObjective],
        help="equilibrium selection rule (default: max-total-lex)",
    )
    sub.add_argument("--epsilon", default="1/10", help="cheating budget (rational)")
    sub.add_argument("--delta", default="1/2", help="emulation budget (rational)")


def _add_trial_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--trials", type=int, default=1000)
    sub.add_argument("--seed", type=int, default=None, help="root seed (fresh one printed if omitted)")
    sub.add_argument("--jobs", type=int, default=_default_jobs(), help="worker processes (env CE_SAMPLER_JOBS)")
    sub.add_argument("--party1", default="honest", help="honest | greedy | script:<file>")
    sub.add_argument("--party2", default="honest", help="honest | greedy | script:<file>")
    sub.add_argument("--report", default=None, help="write the JSON report here instead of stdout")
    sub.add_argument("--analyze", action="store_true", help="include exact verdicts in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ce-sampler",
        description="Correlated-equilibrium sampling without a mediator: solver, simulator, analyzer.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve-ce", help="compute a correlated equilibrium")
    solve.add_argument("--game", required=True)
    solve.add_argument(
        "--objective", default="max-total-lex", choices=[o.value for o in CeObjective]
    )
    solve.add_argument("--out", default=None, help="distribution JSON output path")
    solve.set_defaults(fn=_cmd_solve_ce)

    run = commands.add_parser("run", help="Monte Carlo over the sampling protocol")
    _add_protocol_args(run)
    _add_trial_args(run)
    run.add_argument("--transcript", default=None, help="write a JSON-lines message log")
    run.set_defaults(fn=_cmd_run)

    play = commands.add_parser("play", help="Monte Carlo over the full three-stage game")
    _add_protocol_args(play)
    _add_trial_args(play)
    play.set_defaults(fn=_cmd_play)

    analyze = commands.add_parser("analyze", help="exact adversary analysis and verdicts")
    _add_protocol_args(analyze)
    analyze.add_argument("--dishonest", type=int, choices=(1, 2), default=1)
    analyze.add_argument(
        "--power",
        default="bias-only",
        choices=("bias-only", "truthful", "unrestricted"),
        help="adversary class (bias-only is the class with guarantees)",
    )
    analyze.add_argument("--report", default=None)
    analyze.set_defaults(fn=_cmd_analyze)

    reproduce = commands.add_parser("reproduce", help="run the acceptance suite")
    reproduce.add_argument("--only", default=None, help="run criteria whose name contains this")
    reproduce.set_defaults(fn=_cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except GameFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
