"""Array-compiled campaign for fast Bellman sweeps.

The value-iteration hot loop needs, for every achievable state and every
reduced action pair, the expected continuation value under the joint battle
distribution.  Storing full per-pair successor distributions for the larger
campaigns would take gigabytes, so instead we exploit that battles factor by
axis: per state and axis we tabulate the outcome distribution over next axis
codes for each combination of the players' orders on that axis (at most 3x3
combinations, at most 4 outcomes each).  A pair then references one combo
per axis, and a numba kernel enumerates the product of axis outcomes on the
fly while accumulating sum(prob * V[successor index]).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from . import core
from .core import Campaign, Order, OrderKind, State
from .transitions import battle_outcome_prob


def _pattern_code(pattern: list[int]) -> int:
    """Axis code of a control pattern; raises if unachievable."""
    n = len(pattern)
    lead = 0
    while lead < n and pattern[lead] == 1:
        lead += 1
    if lead == n:
        return 0
    if all(v == 2 for v in pattern[lead:]):
        return 1 if lead == 0 else 1 + lead
    k = lead + 1
    if k <= n - 1 and pattern[k] == 1 and all(v == 2 for v in pattern[k + 1:]):
        return n + k
    raise core.UnachievableStateError(f"pattern {pattern} is not achievable")


def _axis_outcomes(campaign: Campaign, state: State, axis, ord1: Order | None,
                   ord2: Order | None) -> list[tuple[int, float]]:
    """Distribution over the axis's next code for one order combination."""
    model = campaign.probability_model
    contested = []  # (position in axis, probability Player 1 owns it next)
    for attacker, order, other in ((1, ord1, ord2), (2, ord2, ord1)):
        if order is None or order.kind is not OrderKind.ATTACK:
            continue
        o = order.target
        reinforced = (other is not None and other.target == o
                      and other.kind is OrderKind.REINFORCE)
        kind1 = order.kind if attacker == 1 else (
            OrderKind.REINFORCE if reinforced else OrderKind.NONE)
        kind2 = order.kind if attacker == 2 else (
            OrderKind.REINFORCE if reinforced else OrderKind.NONE)
        q = battle_outcome_prob(model, state, o, kind1, kind2)
        contested.append((axis.objectives.index(o), q))
    pattern = [state[o] for o in axis.objectives]
    if not contested:
        return [(_pattern_code(pattern), 1.0)]
    outcomes: dict[int, float] = {}
    for owners in np.ndindex(*(2,) * len(contested)):
        prob = 1.0
        pat = list(pattern)
        for (pos, q), owner_bit in zip(contested, owners):
            owner = 1 + owner_bit
            prob *= q if owner == 1 else 1.0 - q
            pat[pos] = owner
        if prob > 0.0:
            code = _pattern_code(pat)
            outcomes[code] = outcomes.get(code, 0.0) + prob
    return sorted(outcomes.items())


@njit(cache=True)
def _payoff_kernel(V, out, L, gamma, pair_state, pair_combo, sx_base,
                   combo_ptr, out_prob, out_code, places):
    A = pair_combo.shape[1]
    cnt = np.zeros(A, np.int64)
    start = np.zeros(A, np.int64)
    length = np.zeros(A, np.int64)
    for r in range(pair_state.shape[0]):
        s = pair_state[r]
        for x in range(A):
            g = sx_base[s, x] + pair_combo[r, x]
            start[x] = combo_ptr[g]
            length[x] = combo_ptr[g + 1] - combo_ptr[g]
            cnt[x] = 0
        acc = 0.0
        while True:
            p = 1.0
            idx = 0
            for x in range(A):
                j = start[x] + cnt[x]
                p *= out_prob[j]
                idx += places[x] * out_code[j]
            acc += p * V[idx]
            x = A - 1
            while x >= 0:
                cnt[x] += 1
                if cnt[x] < length[x]:
                    break
                cnt[x] = 0
                x -= 1
            if x < 0:
                break
        out[r] = L[s] + gamma * acc


class CompiledCampaign:
    """Flat-array view of a campaign over its achievable state space."""

    def __init__(self, campaign: Campaign):
        self.campaign = campaign
        A = len(campaign.axes)
        n_states = campaign.num_achievable
        self.n_states = n_states
        self.L = np.empty(n_states)
        self.n1 = np.empty(n_states, np.int32)
        self.n2 = np.empty(n_states, np.int32)
        self.places = np.array(campaign.places, np.int64)

        pair_state_parts = []
        pair_combo_parts = []
        sx_base = np.empty((n_states, A), np.int64)
        combo_lens: list[int] = []
        out_prob_parts: list[float] = []
        out_code_parts: list[int] = []
        pair_counts = np.empty(n_states, np.int64)

        for s_idx in range(n_states):
            state = core.decode_state(campaign, s_idx)
            self.L[s_idx] = core.stage_loss(campaign, state)
            acts1 = core.reduced_actions(campaign, state, 1)
            acts2 = core.reduced_actions(campaign, state, 2)
            n1, n2 = len(acts1), len(acts2)
            self.n1[s_idx], self.n2[s_idx] = n1, n2
            pair_counts[s_idx] = n1 * n2

            # per-axis order options (option 0 is "no order on this axis")
            opts1, opts2, opt_index = [], [], ({}, {})
            for x, axis in enumerate(campaign.axes):
                ax_opts = ([Order(OrderKind.REINFORCE if state[o] == p else OrderKind.ATTACK, o)
                            for o in core.fronts(axis, state, p)] for p in (1, 2))
                o1, o2 = (list(g) for g in ax_opts)
                opts1.append(o1)
                opts2.append(o2)
                for side, opts in ((0, o1), (1, o2)):
                    for k, order in enumerate(opts):
                        opt_index[side][order.target] = k + 1

            # combos for every (option1, option2) product, flattened per axis
            for x, axis in enumerate(campaign.axes):
                sx_base[s_idx, x] = len(combo_lens)
                m1, m2 = len(opts1[x]) + 1, len(opts2[x]) + 1
                for i1 in range(m1):
                    for i2 in range(m2):
                        ord1 = None if i1 == 0 else opts1[x][i1 - 1]
                        ord2 = None if i2 == 0 else opts2[x][i2 - 1]
                        outs = _axis_outcomes(campaign, state, axis, ord1, ord2)
                        combo_lens.append(len(outs))
                        for code, prob in outs:
                            out_code_parts.append(code)
                            out_prob_parts.append(prob)

            # map each action to its per-axis option ids
            def option_ids(actions, side):
                ids = np.zeros((len(actions), A), np.uint8)
                for a_i, profile in enumerate(actions):
                    for order in profile.orders:
                        if order.kind is OrderKind.NONE:
                            continue
                        x = campaign.axis_position[order.target][0]
                        ids[a_i, x] = opt_index[side][order.target]
                return ids

            ids1 = option_ids(acts1, 0)
            ids2 = option_ids(acts2, 1)
            m2_per_axis = np.array([len(o) + 1 for o in opts2], np.uint8)
            # local combo id on axis x is opt1 * m2 + opt2
            combos = (ids1[:, None, :] * m2_per_axis[None, None, :]
                      + ids2[None, :, :]).reshape(n1 * n2, A)
            pair_combo_parts.append(combos.astype(np.uint8))
            pair_state_parts.append(np.full(n1 * n2, s_idx, np.int32))

        self.pair_start = np.zeros(n_states + 1, np.int64)
        np.cumsum(pair_counts, out=self.pair_start[1:])
        self.pair_state = np.concatenate(pair_state_parts)
        self.pair_combo = np.concatenate(pair_combo_parts)
        self.sx_base = sx_base
        self.combo_ptr = np.zeros(len(combo_lens) + 1, np.int64)
        np.cumsum(np.asarray(combo_lens, np.int64), out=self.combo_ptr[1:])
        self.out_prob = np.asarray(out_prob_parts)
        self.out_code = np.asarray(out_code_parts, np.uint8)
        self.total_pairs = int(self.pair_start[-1])

    def payoffs(self, V: np.ndarray) -> np.ndarray:
        """Flat payoff entries L(s) + gamma * E[V(s')] for every reduced
        action pair of every state, a1-major within each state."""
        out = np.empty(self.total_pairs)
        _payoff_kernel(V, out, self.L, self.campaign.discount, self.pair_state,
                       self.pair_combo, self.sx_base, self.combo_ptr,
                       self.out_prob, self.out_code, self.places)
        return out

    def state_payoff_matrix(self, R_flat: np.ndarray, s_idx: int) -> np.ndarray:
        lo, hi = self.pair_start[s_idx], self.pair_start[s_idx + 1]
        return R_flat[lo:hi].reshape(self.n1[s_idx], self.n2[s_idx])


_cache: dict[int, CompiledCampaign] = {}


def compiled(campaign: Campaign) -> CompiledCampaign:
    """Build (or fetch the cached) compiled form of a campaign."""
    key = id(campaign)
    hit = _cache.get(key)
    if hit is None or hit.campaign is not campaign:
        hit = CompiledCampaign(campaign)
        _cache.clear()  # keep at most a handful alive; they can be large
        _cache[key] = hit
    return hit
