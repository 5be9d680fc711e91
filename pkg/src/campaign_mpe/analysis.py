"""Post-hoc verification and exploration of solved campaigns.

Includes the isotonicity audit (gaining an objective never helps the
defender's value by less than its loss), equilibrium certification by
best-response dynamic programming over the full feasible action space, exact
policy evaluation, and seeded Monte Carlo simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import core
from .core import ActionProfile, Campaign, State
from .solver import PolicyProfile, ValueFunction
from .transitions import successor_distribution

ISOTONICITY_TOL = 1e-7
PAIR_ENUMERATION_CUTOFF = 20_000


@dataclass
class Trajectory:
    """One realized play-through: states visited, actions drawn, and the
    discounted loss accumulated over the recorded horizon."""

    states: list[State]
    actions: list[tuple[ActionProfile, ActionProfile]]
    discounted_loss: float
    seed: int


@dataclass
class CertificationReport:
    epsilon_claimed: float
    max_deviation_gain_p1: float
    max_deviation_gain_p2: float
    worst_state: int

    @property
    def certified(self) -> bool:
        return (self.max_deviation_gain_p1 <= self.epsilon_claimed
                and self.max_deviation_gain_p2 <= self.epsilon_claimed)


def _control_bits(campaign: Campaign, indices) -> np.ndarray:
    """Rows of 0/1 flags (1 where Player 2 controls the objective)."""
    B = np.empty((len(indices), campaign.n_objectives))
    for r, s_idx in enumerate(indices):
        B[r] = np.asarray(core.decode_state(campaign, s_idx)) == 2
    return B


def check_isotonicity(campaign: Campaign, V: ValueFunction,
                      tol: float = ISOTONICITY_TOL, seed: int = 0,
                      chain_samples: int = 20_000):
    """Pairs of comparable achievable states where the value gap falls short
    of the summed losses of the objectives that changed hands.

    Exhaustive over all comparable pairs for small state spaces; for large
    ones, all single-objective-flip pairs plus a seeded random sample of
    longer chains.  Returns (low_index, high_index, shortfall) triples.
    """
    V = np.asarray(V, dtype=float)
    n_states = campaign.num_achievable
    losses = np.asarray(campaign.losses)
    violations: list[tuple[int, int, float]] = []

    def check_rows(low_idx: np.ndarray, B_low: np.ndarray,
                   high_idx: np.ndarray, B_high: np.ndarray):
        # comparable iff the low state cedes nothing the high state holds back
        incomparable = B_low @ (1.0 - B_high).T
        required = ((1.0 - B_low) * losses) @ B_high.T
        gap = V[high_idx][None, :] - V[low_idx][:, None]
        bad = (incomparable == 0) & (gap < required - tol)
        for i, j in zip(*np.nonzero(bad)):
            lo, hi = int(low_idx[i]), int(high_idx[j])
            if lo != hi:
                violations.append((lo, hi, float(required[i, j] - gap[i, j])))

    if n_states <= PAIR_ENUMERATION_CUTOFF:
        all_idx = np.arange(n_states)
        B = _control_bits(campaign, all_idx)
        block = 2048
        for lo in range(0, n_states, block):
            sl = all_idx[lo:lo + block]
            check_rows(sl, B[lo:lo + block], all_idx, B)
        return violations

    # single-objective flips
    for s_idx in range(n_states):
        s = core.decode_state(campaign, s_idx)
        v_s = V[s_idx]
        for o in range(campaign.n_objectives):
            if s[o] != 1:
                continue
            s2 = s[:o] + (2,) + s[o + 1:]
            if not core.is_achievable(campaign, s2):
                continue
            hi = core.encode_state(campaign, s2)
            if V[hi] - v_s < losses[o] - tol:
                violations.append((s_idx, hi, float(losses[o] - (V[hi] - v_s))))
    # sampled longer chains
    rng = np.random.default_rng(seed)
    lows = rng.integers(0, n_states, size=chain_samples)
    highs = rng.integers(0, n_states, size=chain_samples)
    B_low = _control_bits(campaign, lows)
    B_high = _control_bits(campaign, highs)
    comparable = np.einsum("ij,ij->i", B_low, 1.0 - B_high) == 0
    required = np.einsum("ij,ij->i", (1.0 - B_low) * losses, B_high)
    gap = V[highs] - V[lows]
    for i in np.nonzero(comparable & (gap < required - tol))[0]:
        if lows[i] != highs[i]:
            violations.append((int(lows[i]), int(highs[i]),
                               float(required[i] - gap[i])))
    return violations


def _supports(strategy: np.ndarray):
    idx = np.nonzero(strategy)[0]
    return [(int(j), float(strategy[j])) for j in idx]


def _mixed_successor_rows(campaign, state, own_actions, opp_actions,
                          opp_strategy, player):
    """For each of the player's actions: expected successor distribution with
    the opponent mixing per their strategy.  Yields (indices, probs)."""
    support = _supports(opp_strategy)
    for a in own_actions:
        succ: dict[int, float] = {}
        for j, w in support:
            b = opp_actions[j]
            a1, a2 = (a, b) if player == 1 else (b, a)
            for s2, p in successor_distribution(campaign, state, a1, a2).outcomes:
                k = core.encode_state(campaign, s2)
                succ[k] = succ.get(k, 0.0) + w * p
        items = sorted(succ.items())
        yield (np.fromiter((k for k, _ in items), np.int64, len(items)),
               np.fromiter((p for _, p in items), float, len(items)))


def _iterate_mdp(L_row, P, row_ptr, gamma, minimize, V0, tol=1e-12,
                 max_iter=5000):
    """Optimal value of a one-player discounted MDP given a flat row-per-
    action transition matrix and per-state row ranges."""
    V = V0.copy()
    segments = row_ptr[:-1]
    reduce_ = np.minimum.reduceat if minimize else np.maximum.reduceat
    for _ in range(max_iter):
        q = L_row + gamma * (P @ V)
        new_V = reduce_(q, segments)
        delta = float(np.max(np.abs(new_V - V)))
        V = new_V
        if delta <= tol:
            return V
    raise RuntimeError(f"best-response MDP did not converge (delta {delta:.3g})")


def _best_response(campaign: Campaign, opponent, player: int,
                   V0: np.ndarray) -> np.ndarray:
    """Value of the player's best response over the FULL feasible action
    space against the opponent's fixed stationary mixed policy."""
    n_states = campaign.num_achievable
    opp = 3 - player
    data, indices, indptr = [], [], [0]
    row_ptr = [0]
    L_row = []
    for s_idx in range(n_states):
        state = core.decode_state(campaign, s_idx)
        own = core.feasible_actions_full(campaign, state, player)
        opp_acts = core.reduced_actions(campaign, state, opp)
        loss = core.stage_loss(campaign, state)
        for idx, probs in _mixed_successor_rows(
                campaign, state, own, opp_acts, opponent[s_idx], player):
            indices.append(idx)
            data.append(probs)
            indptr.append(indptr[-1] + len(idx))
            L_row.append(loss)
        row_ptr.append(row_ptr[-1] + len(own))
    P = sp.csr_matrix((np.concatenate(data), np.concatenate(indices),
                       np.asarray(indptr)), shape=(row_ptr[-1], n_states))
    return _iterate_mdp(np.asarray(L_row), P, np.asarray(row_ptr),
                        campaign.discount, player == 1, V0)


def certify_epsilon_mpe(campaign: Campaign, profile: PolicyProfile,
                        V: ValueFunction, epsilon: float) -> CertificationReport:
    """Measure the best unilateral deviation gain of each player against the
    profile, deviations ranging over the full feasible action space."""
    V0 = np.asarray(V, dtype=float)
    V_profile = evaluate_policy(campaign, profile.strategies[1],
                                profile.strategies[2])
    br1 = _best_response(campaign, profile.strategies[2], 1, V0)
    br2 = _best_response(campaign, profile.strategies[1], 2, V0)
    gain1 = V_profile - br1  # how much Player 1 could shave off
    gain2 = br2 - V_profile  # how much Player 2 could add
    g1, g2 = float(gain1.max()), float(gain2.max())
    worst = int(np.argmax(gain1)) if g1 >= g2 else int(np.argmax(gain2))
    return CertificationReport(epsilon_claimed=epsilon,
                               max_deviation_gain_p1=g1,
                               max_deviation_gain_p2=g2,
                               worst_state=worst)


def _policy_transition(campaign: Campaign, pi1, pi2) -> sp.csr_matrix:
    n_states = campaign.num_achievable
    data, indices, indptr = [], [], [0]
    for s_idx in range(n_states):
        state = core.decode_state(campaign, s_idx)
        acts1 = core.reduced_actions(campaign, state, 1)
        acts2 = core.reduced_actions(campaign, state, 2)
        succ: dict[int, float] = {}
        for i, w1 in _supports(pi1[s_idx]):
            for j, w2 in _supports(pi2[s_idx]):
                dist = successor_distribution(campaign, state, acts1[i], acts2[j])
                for s2, p in dist.outcomes:
                    k = core.encode_state(campaign, s2)
                    succ[k] = succ.get(k, 0.0) + w1 * w2 * p
        for k, p in sorted(succ.items()):
            indices.append(k)
            data.append(p)
        indptr.append(len(indices))
    return sp.csr_matrix((data, indices, indptr), shape=(n_states, n_states))


def evaluate_policy(campaign: Campaign, pi1, pi2) -> ValueFunction:
    """Exact discounted value of a stationary profile: the fixed point of
    V = L + gamma * P V.  Direct sparse solve for small state spaces, else
    iteration to a 1e-10 sup-norm step."""
    n_states = campaign.num_achievable
    P = _policy_transition(campaign, pi1, pi2)
    L = np.fromiter((core.stage_loss(campaign, core.decode_state(campaign, s))
                     for s in range(n_states)), float, n_states)
    g = campaign.discount
    if n_states <= 5000:
        A = sp.identity(n_states, format="csr") - g * P
        return sp.linalg.spsolve(A.tocsc(), L)
    V = L / (1.0 - g)
    for _ in range(100_000):
        new_V = L + g * (P @ V)
        delta = float(np.max(np.abs(new_V - V)))
        V = new_V
        if delta <= 1e-10:
            return V
    raise RuntimeError("policy evaluation did not converge")


def default_horizon(campaign: Campaign, tail: float = 1e-6) -> int:
    """Steps until the discounted tail beyond the horizon is below `tail`."""
    if campaign.total_loss == 0:
        return 1
    g = campaign.discount
    bound = tail * (1.0 - g) / campaign.total_loss
    return max(1, math.ceil(math.log(bound) / math.log(g)))


def _sample_index(rng, weights: np.ndarray) -> int:
    u = rng.random()
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return int(np.nonzero(weights)[0][-1])


def simulate(campaign: Campaign, pi1, pi2, s0: State,
             horizon: int | None = None, seed: int = 0) -> Trajectory:
    """Seeded play-through from s0: each step samples both players' orders
    from their strategies, then the joint battle outcome."""
    if horizon is None:
        horizon = default_horizon(campaign)
    rng = np.random.default_rng(seed)
    state = tuple(s0)
    states = [state]
    actions: list[tuple[ActionProfile, ActionProfile]] = []
    loss = core.stage_loss(campaign, state)
    discount = campaign.discount
    weight = 1.0
    for _ in range(horizon):
        s_idx = core.encode_state(campaign, state)
        acts1 = core.reduced_actions(campaign, state, 1)
        acts2 = core.reduced_actions(campaign, state, 2)
        a1 = acts1[_sample_index(rng, pi1[s_idx])]
        a2 = acts2[_sample_index(rng, pi2[s_idx])]
        state = successor_distribution(campaign, state, a1, a2).sample(rng)
        weight *= discount
        loss += weight * core.stage_loss(campaign, state)
        states.append(state)
        actions.append((a1, a2))
    return Trajectory(states=states, actions=actions,
                      discounted_loss=loss, seed=seed)


def estimate_discounted_loss(campaign: Campaign, pi1, pi2, s0: State,
                             episodes: int, seed: int = 0,
                             horizon: int | None = None):
    """Monte Carlo mean and standard error of the discounted loss from s0.

    Episodes evolve as index-level Markov chains under the profile's induced
    transition kernel, which matches per-step sampling in distribution
    because the loss depends only on the state sequence.
    """
    if horizon is None:
        horizon = default_horizon(campaign)
    P = _policy_transition(campaign, pi1, pi2).tocsr()
    n_states = campaign.num_achievable
    L = np.fromiter((core.stage_loss(campaign, core.decode_state(campaign, s))
                     for s in range(n_states)), float, n_states)
    rng = np.random.default_rng(seed)
    cur = np.full(episodes, core.encode_state(campaign, s0), np.int64)
    totals = np.full(episodes, L[cur[0]])
    weight = 1.0
    cum_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for _ in range(horizon):
        weight *= campaign.discount
        nxt = np.empty_like(cur)
        for s in np.unique(cur):
            row = cum_cache.get(int(s))
            if row is None:
                sl = slice(P.indptr[s], P.indptr[s + 1])
                row = (P.indices[sl], np.cumsum(P.data[sl]))
                cum_cache[int(s)] = row
            idx, cum = row
            mask = cur == s
            draws = rng.random(int(mask.sum())) * cum[-1]
            nxt[mask] = idx[np.searchsorted(cum, draws, side="right")]
        cur = nxt
        totals += weight * L[cur]
    mean = float(totals.mean())
    sem = float(totals.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return mean, sem
