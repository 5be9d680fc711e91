import numpy as np

from campaign_mpe import analysis, core
from campaign_mpe.analysis import (
    certify_epsilon_mpe,
    check_isotonicity,
    estimate_discounted_loss,
    evaluate_policy,
    simulate,
)
from campaign_mpe.core import Axis, Campaign, Commander, Objective
from campaign_mpe.solver import PolicyProfile, accelerated_vi
from campaign_mpe.transitions import ProbabilityModel


def absorbing_campaign(losses, discount=0.9):
    n = len(losses)
    return Campaign([Objective(o, losses[o]) for o in range(n)],
                    [Axis(i, (i,)) for i in range(n)],
                    [Commander(i, (i,)) for i in range(n)], discount,
                    ProbabilityModel.uniform(n, attack=0.0, reinforce=0.5))


class TestCheckIsotonicity:
    def test_counterexample_violation(self, solved):
        campaign, _, V, _, _ = solved("nonisotone3", "avi")
        violations = check_isotonicity(campaign, V)
        pair = (core.encode_state(campaign, (1, 1, 2)),
                core.encode_state(campaign, (2, 1, 2)))
        assert any((lo, hi) == pair for lo, hi, _ in violations)

    def test_low_discount_may_pass(self, bundled):
        # same construction with discount 0.4: ceding the first objective
        # costs more in immediate loss than the better absorbing state saves
        campaign, initial = bundled("nonisotone3")
        low = Campaign(campaign.objectives, campaign.axes, campaign.commanders,
                       0.4, campaign.probability_model)
        V, _, _ = accelerated_vi(low, 1e-6)
        s = V[core.encode_state(low, (1, 1, 2))]
        sp = V[core.encode_state(low, (2, 1, 2))]
        assert sp >= s  # non-isotonicity needs a discount above one half

    def test_assumption_satisfying_campaign_clean(self, solved):
        campaign, _, V, _, _ = solved("campaign06", "avi")
        assert check_isotonicity(campaign, V) == []

    def test_zero_losses_zero_value(self):
        campaign = absorbing_campaign([0.0, 0.0])
        V = np.zeros(campaign.num_achievable)
        assert check_isotonicity(campaign, V) == []

    def test_sampled_path_matches_exhaustive(self, solved):
        # force the sampled code path on a small campaign and compare
        campaign, _, V, _, _ = solved("nonisotone3", "avi")
        exhaustive = set((lo, hi) for lo, hi, _ in check_isotonicity(campaign, V))
        # the single-flip sweep inside the large-state path must find the
        # known single-flip violation
        analysis_cutoff = analysis.PAIR_ENUMERATION_CUTOFF
        try:
            analysis.PAIR_ENUMERATION_CUTOFF = 0
            sampled = set((lo, hi)
                          for lo, hi, _ in check_isotonicity(campaign, V))
        finally:
            analysis.PAIR_ENUMERATION_CUTOFF = analysis_cutoff
        assert sampled & exhaustive


class TestCertification:
    def test_equilibrium_certifies(self, solved):
        campaign, _, V, policy, _ = solved("campaign06", "avi")
        report = certify_epsilon_mpe(campaign, policy, V, 1e-3)
        assert report.certified
        assert report.max_deviation_gain_p1 <= 1e-3
        assert report.max_deviation_gain_p2 <= 1e-3

    def test_absorbing_any_profile_zero_gain(self):
        campaign = absorbing_campaign([1.0, 2.0])
        n = campaign.num_achievable
        strategies = {p: [] for p in (1, 2)}
        for s_idx in range(n):
            state = core.decode_state(campaign, s_idx)
            for p in (1, 2):
                k = len(core.reduced_actions(campaign, state, p))
                strategies[p].append(np.full(k, 1.0 / k))
        profile = PolicyProfile(strategies)
        V = evaluate_policy(campaign, strategies[1], strategies[2])
        report = certify_epsilon_mpe(campaign, profile, V, 1e-3)
        assert report.max_deviation_gain_p1 <= 1e-9
        assert report.max_deviation_gain_p2 <= 1e-9

    def test_corrupted_policy_detected(self, solved):
        campaign, _, V, policy, _ = solved("campaign06", "avi")
        bad = {1: list(policy.strategies[1]), 2: list(policy.strategies[2])}
        # make Player 1 ignore the fight at the all-split state
        for s_idx in range(campaign.num_achievable):
            strat = bad[1][s_idx]
            if len(strat) >= 2 and strat[0] < 0.9:
                worst = np.zeros_like(strat)
                worst[int(np.argmin(strat))] = 1.0
                bad[1][s_idx] = worst
        report = certify_epsilon_mpe(campaign, PolicyProfile(bad), V, 1e-3)
        assert report.max_deviation_gain_p1 > 1e-3
        assert 0 <= report.worst_state < campaign.num_achievable


class TestEvaluatePolicy:
    def test_matches_solver_value(self, solved):
        campaign, _, V, policy, report = solved("campaign06", "avi")
        V_eval = evaluate_policy(campaign, policy.strategies[1],
                                 policy.strategies[2])
        assert np.max(np.abs(V_eval - V)) <= report.epsilon / 2 + 1e-6

    def test_absorbing_closed_form(self):
        campaign = absorbing_campaign([1.0, 2.0])
        strategies = {p: [] for p in (1, 2)}
        for s_idx in range(campaign.num_achievable):
            state = core.decode_state(campaign, s_idx)
            for p in (1, 2):
                k = len(core.reduced_actions(campaign, state, p))
                strategies[p].append(np.full(k, 1.0 / k))
        V = evaluate_policy(campaign, strategies[1], strategies[2])
        for s_idx in range(campaign.num_achievable):
            state = core.decode_state(campaign, s_idx)
            expected = core.stage_loss(campaign, state) / 0.1
            assert abs(V[s_idx] - expected) < 1e-8

    def test_iterative_path_agrees_with_direct(self, solved):
        campaign, _, V, policy, _ = solved("campaign06", "avi")
        direct = evaluate_policy(campaign, policy.strategies[1],
                                 policy.strategies[2])
        # temporarily push the campaign over the direct-solve cutoff
        import campaign_mpe.analysis as mod
        P = mod._policy_transition(campaign, policy.strategies[1],
                                   policy.strategies[2])
        L = np.array([core.stage_loss(campaign, core.decode_state(campaign, s))
                      for s in range(campaign.num_achievable)])
        W = L / 0.1
        for _ in range(100_000):
            W2 = L + 0.9 * (P @ W)
            if np.max(np.abs(W2 - W)) <= 1e-12:
                break
            W = W2
        assert np.max(np.abs(W - direct)) < 1e-8


class TestSimulate:
    def test_same_seed_identical(self, solved):
        campaign, initial, V, policy, _ = solved("campaign06", "avi")
        t1 = simulate(campaign, policy.strategies[1], policy.strategies[2],
                      initial, horizon=40, seed=123)
        t2 = simulate(campaign, policy.strategies[1], policy.strategies[2],
                      initial, horizon=40, seed=123)
        assert t1.states == t2.states
        assert t1.actions == t2.actions
        assert t1.discounted_loss == t2.discounted_loss

    def test_deterministic_model_fully_determined(self, solved):
        campaign, _, V, policy, _ = solved("nonisotone3", "avi")
        trajs = [simulate(campaign, policy.strategies[1], policy.strategies[2],
                          (1, 1, 2), horizon=5, seed=seed)
                 for seed in range(4)]
        # all probabilities are 0/1 and every state has a single action
        assert len({tuple(t.states) for t in trajs}) == 1
        assert trajs[0].states[1] == (2, 2, 1)

    def test_discounted_loss_bookkeeping(self, solved):
        campaign, initial, _, policy, _ = solved("campaign06", "avi")
        traj = simulate(campaign, policy.strategies[1], policy.strategies[2],
                        initial, horizon=25, seed=5)
        expected = sum(0.9 ** t * core.stage_loss(campaign, s)
                       for t, s in enumerate(traj.states))
        assert abs(traj.discounted_loss - expected) < 1e-12
        assert len(traj.states) == 26 and len(traj.actions) == 25

    def test_transitions_have_positive_probability(self, solved):
        campaign, initial, _, policy, _ = solved("campaign06", "avi")
        from campaign_mpe.transitions import successor_distribution
        traj = simulate(campaign, policy.strategies[1], policy.strategies[2],
                        initial, horizon=30, seed=9)
        for t in range(len(traj.actions)):
            a1, a2 = traj.actions[t]
            dist = successor_distribution(campaign, traj.states[t], a1, a2)
            assert any(s == traj.states[t + 1] and p > 0
                       for s, p in dist.outcomes)


class TestMonteCarlo:
    def test_estimate_within_three_sigma(self, solved):
        campaign, initial, _, policy, _ = solved("campaign06", "avi")
        exact = evaluate_policy(campaign, policy.strategies[1],
                                policy.strategies[2])
        v0 = exact[core.encode_state(campaign, initial)]
        mean, sem = estimate_discounted_loss(
            campaign, policy.strategies[1], policy.strategies[2], initial,
            episodes=20_000, seed=17)
        assert abs(mean - v0) <= 3.0 * sem + 1e-5

    def test_error_shrinks_with_sample_size(self, solved):
        campaign, initial, _, policy, _ = solved("campaign06", "avi")
        sems = []
        for episodes in (1_000, 10_000, 100_000):
            _, sem = estimate_discounted_loss(
                campaign, policy.strategies[1], policy.strategies[2], initial,
                episodes=episodes, seed=3)
            sems.append(sem)
        # standard error scales as n^(-1/2): each tenfold step divides by
        # about sqrt(10) ~ 3.16
        for a, b in zip(sems, sems[1:]):
            assert 2.0 < a / b < 5.0

    def test_chain_matches_per_step_sampler(self, solved):
        campaign, initial, _, policy, _ = solved("campaign06", "avi")
        mean, sem = estimate_discounted_loss(
            campaign, policy.strategies[1], policy.strategies[2], initial,
            episodes=4_000, seed=2, horizon=60)
        per_step = np.mean([
            simulate(campaign, policy.strategies[1], policy.strategies[2],
                     initial, horizon=60, seed=s).discounted_loss
            for s in range(400)])
        assert abs(mean - per_step) < 6.0 * sem + 0.5
