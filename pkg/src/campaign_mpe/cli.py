"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 solve non-convergence,
3 certification failure.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, core, scenario_io, solver
from .scenario_io import ScenarioError, format_state, parse_state
from .transitions import validate_assumptions

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CERTIFICATION = 3


def _load(path):
    try:
        return scenario_io.load_scenario(path)
    except (ScenarioError, FileNotFoundError, core.CampaignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _load_solution(path, campaign, initial):
    try:
        return scenario_io.load_solution(path, campaign, initial)
    except (ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _parse_state_arg(text, campaign):
    try:
        state = parse_state(text, campaign.n_objectives)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    problems = core.validate_initial_state(campaign, state)
    if problems:
        print("error: " + "; ".join(problems), file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    return state


def cmd_validate(args) -> int:
    campaign, initial = _load(args.scenario)
    print(f"objectives: {campaign.n_objectives}  axes: {len(campaign.axes)}  "
          f"commanders: {len(campaign.commanders)}")
    print(f"achievable states: {campaign.num_achievable}  "
          f"discount: {campaign.discount}")
    print(f"initial state: {format_state(initial)}")
    report = validate_assumptions(campaign, mode=args.mode,
                                  samples=args.samples, seed=args.seed)
    print(f"states checked: {report.states_checked} ({args.mode})")
    for message in report.monotonicity_errors:
        print(f"monotonicity violation: {message}")
    for message in report.defense_errors:
        print(f"defense-dominance violation: {message}")
    for message in report.warnings:
        print(f"warning: {message}")
    if report.ok:
        print("probability model: ok")
        return EXIT_OK
    print("probability model: FAILED")
    return EXIT_VALIDATION


def cmd_solve(args) -> int:
    campaign, initial = _load(args.scenario)
    run = solver.shapley_vi if args.algo == "vi" else solver.accelerated_vi
    try:
        values, policy, report = run(campaign, args.epsilon)
    except solver.SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    print(f"converged in {report.iterations} iterations "
          f"(sup delta {report.final_sup_delta:.3g}, "
          f"{report.wallclock:.2f}s, algorithm {report.algorithm})")
    print(f"pure saddles: {report.pure_saddle_hits}  "
          f"eliminated actions: {report.eliminated_actions}  "
          f"LP solves: {report.lp_solves}")
    idx = core.encode_state(campaign, initial)
    print(f"value at initial state {format_state(initial)}: {values[idx]:.6f}")
    if args.out:
        scenario_io.save_solution(args.out, campaign, initial, values, policy,
                                  report)
        print(f"solution written to {args.out}")
    return EXIT_OK


def cmd_certify(args) -> int:
    campaign, initial = _load(args.scenario)
    solution = _load_solution(args.solution, campaign, initial)
    report = analysis.certify_epsilon_mpe(campaign, solution.policy,
                                          solution.values, args.epsilon)
    print(f"best-response gain, Player 1: {report.max_deviation_gain_p1:.3e}")
    print(f"best-response gain, Player 2: {report.max_deviation_gain_p2:.3e}")
    worst = core.decode_state(campaign, report.worst_state)
    print(f"worst state: {format_state(worst)}")
    if report.certified:
        print(f"certified at epsilon {args.epsilon}")
        return EXIT_OK
    print(f"NOT certified at epsilon {args.epsilon}")
    return EXIT_CERTIFICATION


def cmd_report(args) -> int:
    campaign, initial = _load(args.scenario)
    solution = _load_solution(args.solution, campaign, initial)
    states = ([_parse_state_arg(s, campaign) for s in args.state]
              if args.state else [initial])
    print(scenario_io.report(campaign, solution, states), end="")
    return EXIT_OK


def cmd_simulate(args) -> int:
    campaign, initial = _load(args.scenario)
    solution = _load_solution(args.solution, campaign, initial)
    state = _parse_state_arg(args.state, campaign) if args.state else initial
    pi1 = solution.policy.strategies[1]
    pi2 = solution.policy.strategies[2]
    if args.episodes == 1:
        traj = analysis.simulate(campaign, pi1, pi2, state,
                                 horizon=args.horizon, seed=args.seed)
        for t, s in enumerate(traj.states):
            print(f"stage {t}: {format_state(s)}  "
                  f"loss {core.stage_loss(campaign, s):.3f}")
        print(f"discounted loss: {traj.discounted_loss:.6f}  (seed {traj.seed})")
    else:
        mean, sem = analysis.estimate_discounted_loss(
            campaign, pi1, pi2, state, episodes=args.episodes,
            seed=args.seed, horizon=args.horizon)
        idx = core.encode_state(campaign, state)
        print(f"episodes: {args.episodes}  mean discounted loss: {mean:.6f}  "
              f"standard error: {sem:.6f}")
        print(f"solved value at {format_state(state)}: {solution.values[idx]:.6f}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from . import service

    campaign, initial = _load(args.scenario)
    solution = (_load_solution(args.solution, campaign, initial)
                if args.solution else None)
    service.serve(campaign, initial, solution, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="campaign-mpe",
        description="Two-player campaign equilibrium solver and analyzer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check scenario structure and "
                                        "probability-model assumptions")
    p.add_argument("scenario")
    p.add_argument("--mode", choices=["exhaustive", "sampled"],
                   default="exhaustive")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="run value iteration and store the solution")
    p.add_argument("scenario")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--algo", choices=["vi", "avi"], default="avi")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="verify a solution is an "
                                       "epsilon-equilibrium by best response")
    p.add_argument("scenario")
    p.add_argument("solution")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("report", help="print value and strategy tables")
    p.add_argument("scenario")
    p.add_argument("solution")
    p.add_argument("--state", action="append")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="simulate equilibrium play")
    p.add_argument("scenario")
    p.add_argument("solution")
    p.add_argument("--state")
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="start the interactive session service")
    p.add_argument("scenario")
    p.add_argument("solution", nargs="?")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
