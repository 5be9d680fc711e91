"""Value iteration over the reduced campaign state space.

Both solvers apply the same contraction: per sweep, every achievable state's
one-stage matrix game (stage loss plus discounted expected continuation
value) is solved to optimality and its value becomes the state's next value.
The classical path solves every game by linear programming; the accelerated
path first tries a pure saddle point and weak-dominance elimination.  Sweeps
are synchronous: all states within one sweep read the previous sweep's
values, so results are deterministic and the two paths take identical
iteration counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import core, matrix_game
from ._engine import compiled
from .core import Campaign, State
from .matrix_game import PayoffMatrix, azs, solve_lp
from .transitions import successor_distribution

ValueFunction = np.ndarray
"""Dense value array indexed by reduced state index."""

STRATEGY_TRUNCATION = 1e-9


class SolverError(RuntimeError):
    """Value iteration failed to contract within the iteration cap."""


@dataclass
class PolicyProfile:
    """Per achievable state, each player's mixed strategy over their reduced
    actions in canonical enumeration order."""

    strategies: dict[int, list[np.ndarray]]

    def strategy(self, player: int, state_index: int) -> np.ndarray:
        return self.strategies[player][state_index]


@dataclass
class SolveReport:
    algorithm: str
    iterations: int = 0
    final_sup_delta: float = math.inf
    epsilon: float = 0.0
    wallclock: float = 0.0
    pure_saddle_hits: int = 0
    eliminated_actions: int = 0
    lp_solves: int = 0


def iteration_bound(campaign: Campaign, epsilon: float) -> int:
    """Worst-case sweeps until the stopping rule fires; 0 when all losses
    vanish (the value function is identically zero from the start)."""
    total = campaign.total_loss
    if total == 0:
        return 0
    g = campaign.discount
    raw = (math.log(epsilon * (1.0 - g) ** 2) - math.log(2.0 * total)) / math.log(g)
    return max(0, math.ceil(raw))


def payoff_matrix(campaign: Campaign, V: ValueFunction, state: State):
    """One-stage game at a state: entry[i, j] = L(s) + gamma * E[V(s')] under
    reduced action pair (i, j).  Returns the matrix plus both action lists."""
    acts1 = core.reduced_actions(campaign, state, 1)
    acts2 = core.reduced_actions(campaign, state, 2)
    L = core.stage_loss(campaign, state)
    g = campaign.discount
    entries = np.empty((len(acts1), len(acts2)))
    for i, a1 in enumerate(acts1):
        for j, a2 in enumerate(acts2):
            dist = successor_distribution(campaign, state, a1, a2)
            expect = sum(p * V[core.encode_state(campaign, s)]
                         for s, p in dist.outcomes)
            entries[i, j] = L + g * expect
    return PayoffMatrix(entries), acts1, acts2


def _truncate(strategy: np.ndarray) -> np.ndarray:
    out = np.where(strategy < STRATEGY_TRUNCATION, 0.0, strategy)
    return out / out.sum()


def _sweep(comp, R_flat, accelerated: bool, report: SolveReport):
    values = np.empty(comp.n_states)
    pol1: list[np.ndarray] = []
    pol2: list[np.ndarray] = []
    for s in range(comp.n_states):
        M = comp.state_payoff_matrix(R_flat, s)
        sol = azs(M) if accelerated else solve_lp(M)
        values[s] = sol.value
        pol1.append(_truncate(sol.row_strategy))
        pol2.append(_truncate(sol.col_strategy))
        if sol.pure:
            report.pure_saddle_hits += 1
        report.eliminated_actions += sol.eliminated_rows + sol.eliminated_cols
        if sol.used_lp:
            report.lp_solves += 1
    return values, pol1, pol2


def _run(campaign: Campaign, epsilon: float, accelerated: bool):
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    start = time.perf_counter()
    comp = compiled(campaign)
    g = campaign.discount
    threshold = epsilon * (1.0 - g) / (2.0 * g)
    cap = max(iteration_bound(campaign, epsilon), 1) + 16
    report = SolveReport(algorithm="avi" if accelerated else "vi", epsilon=epsilon)

    V = comp.L.copy()
    pol1 = pol2 = None
    while True:
        R = comp.payoffs(V)
        new_V, pol1, pol2 = _sweep(comp, R, accelerated, report)
        report.iterations += 1
        delta = float(np.max(np.abs(new_V - V)))
        V = new_V
        if delta <= threshold:
            report.final_sup_delta = delta
            break
        if report.iterations >= cap:
            raise SolverError(
                f"no convergence after {report.iterations} sweeps "
                f"(sup delta {delta:.3g}, threshold {threshold:.3g})")
    report.wallclock = time.perf_counter() - start
    return V, PolicyProfile({1: pol1, 2: pol2}), report


def shapley_vi(campaign: Campaign, epsilon: float):
    """Classical value iteration: every state's game solved by LP."""
    return _run(campaign, epsilon, accelerated=False)


def accelerated_vi(campaign: Campaign, epsilon: float):
    """Value iteration with the accelerated per-state solve."""
    return _run(campaign, epsilon, accelerated=True)


def apply_bellman(campaign: Campaign, V: ValueFunction) -> ValueFunction:
    """One synchronous application of the optimality operator (for tests)."""
    comp = compiled(campaign)
    R = comp.payoffs(np.asarray(V, dtype=float))
    out = np.empty(comp.n_states)
    for s in range(comp.n_states):
        out[s] = azs(comp.state_payoff_matrix(R, s)).value
    return out
