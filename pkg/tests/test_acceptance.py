"""End-to-end acceptance checks.

Each test verifies one published or derived property of the engine at its
stated tolerance and records a single pass/fail line, printed in the
terminal summary after the run.
"""

import math
import time

import numpy as np

import conftest
from campaign_mpe import analysis, core, solver
from campaign_mpe.core import Axis, Campaign, Commander, Objective, OrderKind
from campaign_mpe.solver import accelerated_vi, apply_bellman, iteration_bound
from campaign_mpe.transitions import (
    ImprovementEntry,
    ProbabilityModel,
    attack_success_prob,
    battle_outcome_prob,
    validate_assumptions,
)

from conftest import random_campaign


def check(number: int, description: str, ok: bool):
    verdict = "PASS" if ok else "FAIL"
    conftest.ACCEPTANCE_LINES.append(
        f"criterion {number:2d} [{verdict}] {description}")
    assert ok, f"criterion {number} failed: {description}"


def chain_campaign(sizes, groups=None, discount=0.9, attack=0.3,
                   reinforce=0.4, losses=None):
    n = sum(sizes)
    objectives = [Objective(o, 1.0 if losses is None else losses[o])
                  for o in range(n)]
    axes, start = [], 0
    for i, size in enumerate(sizes):
        axes.append(Axis(i, tuple(range(start, start + size))))
        start += size
    if groups is None:
        groups = [(i,) for i in range(len(sizes))]
    commanders = [Commander(i, g) for i, g in enumerate(groups)]
    model = ProbabilityModel.uniform(n, attack=attack, reinforce=reinforce)
    return Campaign(objectives, axes, commanders, discount, model)


def test_01_battle_chain_probabilities():
    model = ProbabilityModel({1: [0.7], 2: [0.0]}, {1: [0.0], 2: [0.4]})
    state = (2,)
    args = (model, state, 0)
    battle_outcome_prob(*args, OrderKind.ATTACK, OrderKind.NONE)  # warm up
    t0 = time.perf_counter()
    unreinforced = battle_outcome_prob(*args, OrderKind.ATTACK, OrderKind.NONE)
    reinforced = battle_outcome_prob(*args, OrderKind.ATTACK, OrderKind.REINFORCE)
    elapsed = time.perf_counter() - t0
    check(1, "attack succeeds at 0.7 unreinforced, 0.42 reinforced, < 1 ms",
          unreinforced == 0.7 and reinforced == 0.7 * (1.0 - 0.4)
          and elapsed < 1e-3)


def test_02_multiplicative_success_construction():
    entries = [
        ImprovementEntry(1, 0, OrderKind.ATTACK, frozenset({1}), 0.20),
        ImprovementEntry(1, 0, OrderKind.ATTACK, frozenset({2}), 0.10),
        ImprovementEntry(1, 0, OrderKind.ATTACK, frozenset({1, 2}), 0.15),
        ImprovementEntry(1, 0, OrderKind.ATTACK, frozenset({3}), 0.05),
    ]
    model = ProbabilityModel({1: [0.20, 0, 0, 0], 2: [0.0] * 4},
                             {1: [0.0] * 4, 2: [0.0] * 4}, entries)
    alpha = attack_success_prob(model, 1, 0, (2, 1, 1, 1))
    exact = 1.0 - 0.8 * 0.8 * 0.9 * 0.85 * 0.95
    check(2, "base 0.20 with boosts 0.20/0.10/0.15/0.05 composes to 0.535",
          abs(alpha - exact) < 1e-12 and round(alpha, 3) == 0.535)


def test_03_state_space_reduction():
    t0 = time.perf_counter()
    counts = {}
    for sizes in ((5, 5, 5, 5, 5), (4, 4, 4, 5, 5), (4, 4, 5, 5),
                  (3, 3, 4, 4), (2, 4, 4)):
        campaign = chain_campaign(sizes, groups=[tuple(range(len(sizes)))])
        states = list(core.enumerate_achievable_states(campaign))
        assert len(states) == campaign.num_achievable
        counts[sizes] = len(states)
    elapsed = time.perf_counter() - t0
    reduction = 1.0 - counts[(5, 5, 5, 5, 5)] / 2 ** 25
    check(3, "achievable states: 100000/51200/6400/2304/256, over 99.7% cut",
          counts == {(5, 5, 5, 5, 5): 100_000, (4, 4, 4, 5, 5): 51_200,
                     (4, 4, 5, 5): 6_400, (3, 3, 4, 4): 2_304,
                     (2, 4, 4): 256}
          and reduction >= 0.997 and elapsed < 5.0)


def test_04_reduced_action_ceiling():
    campaign = chain_campaign((4, 4, 4, 5, 5), groups=[(0,), (1, 2), (3, 4)])
    state = []
    for size in (4, 4, 4, 5, 5):
        state += [1, 1] + [2] * (size - 2)
    state = tuple(state)
    n1 = len(core.reduced_actions(campaign, state, 1))
    n2 = len(core.reduced_actions(campaign, state, 2))
    check(4, "1/2/2-axis commanders at an all-split state: 32 actions each",
          n1 == 32 and n2 == 32)


def test_05_value_reversal_counterexample(bundled, solved):
    campaign, _, V, _, _ = solved("nonisotone3", "avi")
    t0 = time.perf_counter()
    accelerated_vi(campaign, 1e-3)
    elapsed = time.perf_counter() - t0
    lo = core.encode_state(campaign, (1, 1, 2))
    hi = core.encode_state(campaign, (2, 1, 2))
    violations = analysis.check_isotonicity(campaign, V)
    # with a low discount the immediate loss dominates and the reversal
    # disappears
    base, _ = bundled("nonisotone3")
    low = Campaign(base.objectives, base.axes, base.commanders, 0.4,
                   base.probability_model)
    V_low, _, _ = accelerated_vi(low, 1e-3)
    ordered = (V_low[core.encode_state(low, (2, 1, 2))]
               >= V_low[core.encode_state(low, (1, 1, 2))])
    check(5, "ceding an objective lowers the long-run loss (19 vs 11), "
             "audit flags it, < 1 s",
          V[lo] >= 19.0 - 1e-3 and V[hi] <= 11.0 + 1e-3
          and len(violations) >= 1 and ordered and elapsed < 1.0)


def test_06_isotonicity_on_assumption_satisfying_models():
    t0 = time.perf_counter()
    clean = 0
    for seed in range(20):
        campaign = random_campaign(seed)
        assert validate_assumptions(campaign).ok
        V, _, _ = accelerated_vi(campaign, 1e-3)
        if not analysis.check_isotonicity(campaign, V, tol=1e-7):
            clean += 1
    elapsed = time.perf_counter() - t0
    check(6, "20 seeded random campaigns under the model assumptions audit "
             "clean, < 10 min",
          clean == 20 and elapsed < 600.0)


def test_07_accelerated_solver_is_exact(solved):
    ok = True
    for name in ("campaign06", "campaign10"):
        _, _, V_vi, _, rep_vi = solved(name, "vi")
        _, _, V_avi, _, rep_avi = solved(name, "avi")
        ok = (ok and np.max(np.abs(V_vi - V_avi)) <= 1e-8
              and rep_vi.iterations == rep_avi.iterations)
    check(7, "plain and accelerated iteration agree to 1e-8 with equal "
             "iteration counts", ok)


def test_08_single_commander_single_axis_stays_pure():
    campaign = chain_campaign((4,))
    _, _, report = accelerated_vi(campaign, 1e-3)
    check(8, "single-commander single-axis campaign solves by pure saddles "
             "only (0 LP calls)",
          report.lp_solves == 0
          and report.pure_saddle_hits
          == report.iterations * campaign.num_achievable)


def test_09_equilibrium_certification(solved):
    t0 = time.perf_counter()
    ok = True
    for name in ("campaign06", "campaign10", "campaign14"):
        campaign, _, V, policy, _ = solved(name, "avi")
        report = analysis.certify_epsilon_mpe(campaign, policy, V, 1e-3)
        ok = ok and report.certified
    elapsed = time.perf_counter() - t0
    check(9, "solved policies survive full-action-space best response within "
             "0.001, < 5 min", ok and elapsed < 300.0)


def test_10_absorbing_value():
    campaign = chain_campaign((1, 1, 1), attack=0.0, reinforce=0.5)
    V, _, _ = accelerated_vi(campaign, 1e-3)
    idx = core.encode_state(campaign, (2, 2, 2))
    check(10, "all-ceded zero-attack board converges to 3/(1-0.9) = 30",
          abs(V[idx] - 30.0) <= 1e-3 / 2)


def test_11_iteration_bound_holds_everywhere(solved):
    expected = math.ceil((math.log(1e-3 * (1 - 0.9) ** 2) - math.log(2 * 10.0))
                         / math.log(0.9))
    scalar_ok = expected == 138
    losses = [1.0] * 10
    campaign = chain_campaign((10,), losses=losses)
    bound_ok = iteration_bound(campaign, 1e-3) == 138
    within = True
    for name in ("campaign06", "campaign10", "campaign14", "campaign18",
                 "campaign22", "nonisotone3"):
        campaign, _, _, _, report = solved(name, "avi")
        within = within and report.iterations <= max(
            iteration_bound(campaign, report.epsilon), 1)
    check(11, "observed iterations within the a-priori bound on every "
              "bundled scenario; worked bound equals 138",
          scalar_ok and bound_ok and within)


def test_12_bellman_operator_contracts(solved):
    campaign, _, _, _, _ = solved("campaign06", "avi")
    rng = np.random.default_rng(2024)
    ok = True
    for _ in range(100):
        V = rng.uniform(0.0, 40.0, campaign.num_achievable)
        W = rng.uniform(0.0, 40.0, campaign.num_achievable)
        lhs = np.max(np.abs(apply_bellman(campaign, V)
                            - apply_bellman(campaign, W)))
        ok = ok and lhs <= 0.9 * np.max(np.abs(V - W)) + 1e-12
    check(12, "minimax backup contracts at the discount rate on 100 random "
              "value pairs", ok)


def test_13_monte_carlo_consistency(solved):
    campaign, initial, _, policy, _ = solved("campaign10", "avi")
    exact = analysis.evaluate_policy(campaign, policy.strategies[1],
                                     policy.strategies[2])
    v0 = exact[core.encode_state(campaign, initial)]
    mean, sem = analysis.estimate_discounted_loss(
        campaign, policy.strategies[1], policy.strategies[2], initial,
        episodes=100_000, seed=2024)
    check(13, "100k simulated episodes agree with exact policy evaluation "
              "within 3 standard errors",
          abs(mean - v0) <= 3.0 * sem)
