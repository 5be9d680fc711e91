"""Battle-outcome probabilities and successor-state distributions.

Base attack success probabilities are built multiplicatively from an initial
probability and improvement entries that activate when the acting player
controls a condition set of objectives; reinforce success probabilities are
constructed the same way.  A scenario may instead pin individual (state,
player, objective) probabilities through overrides, which bypass the
multiplicative construction entirely.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import (
    ActionProfile,
    AxisKind,
    Campaign,
    CampaignError,
    OrderKind,
    State,
    classify_axis,
    decode_state,
    enumerate_achievable_states,
    is_achievable,
    open_loc,
)

PROB_TOL = 1e-12


def _check_prob(p: float, what: str) -> float:
    if not 0.0 <= p <= 1.0:
        raise CampaignError(f"{what} must lie in [0, 1], got {p}")
    return float(p)


@dataclass(frozen=True)
class ImprovementEntry:
    """Multiplicative boost to a success probability, active when `player`
    controls every objective in `condition`."""

    player: int
    target: int
    kind: OrderKind  # ATTACK or REINFORCE
    condition: frozenset[int]
    boost: float

    def __post_init__(self):
        object.__setattr__(self, "condition", frozenset(self.condition))
        if self.player not in (1, 2):
            raise CampaignError(f"improvement player must be 1 or 2, got {self.player}")
        if self.kind not in (OrderKind.ATTACK, OrderKind.REINFORCE):
            raise CampaignError("improvement kind must be attack or reinforce")
        if not self.condition:
            raise CampaignError(f"improvement on objective {self.target}: empty condition")
        if self.target in self.condition:
            raise CampaignError(
                f"improvement on objective {self.target}: target inside its own condition")
        _check_prob(self.boost, f"improvement boost on objective {self.target}")


@dataclass(frozen=True)
class Override:
    """Tabulated alpha/rho for one (state, player, objective) triple."""

    state: State
    player: int
    objective: int
    alpha: float | None = None
    rho: float | None = None


class ProbabilityModel:
    """Initial attack/reinforce probabilities, improvements, and overrides.

    `initial_attack[player][objective]` and `initial_reinforce[...]` are the
    state-independent bases; improvements raise them per controlled-objective
    subsets; overrides pin exact per-state values and take precedence.
    """

    def __init__(self, initial_attack: dict[int, list[float]],
                 initial_reinforce: dict[int, list[float]],
                 improvements: list[ImprovementEntry] = (),
                 overrides: list[Override] = ()):
        self.initial_attack = {
            p: tuple(_check_prob(v, f"initial attack p{p} obj {o}")
                     for o, v in enumerate(initial_attack[p]))
            for p in (1, 2)}
        self.initial_reinforce = {
            p: tuple(_check_prob(v, f"initial reinforce p{p} obj {o}")
                     for o, v in enumerate(initial_reinforce[p]))
            for p in (1, 2)}
        self.improvements = tuple(improvements)
        self.overrides = tuple(overrides)
        self._override_alpha = {}
        self._override_rho = {}
        for ov in self.overrides:
            key = (tuple(ov.state), ov.player, ov.objective)
            if ov.alpha is not None:
                self._override_alpha[key] = _check_prob(ov.alpha, "override alpha")
            if ov.rho is not None:
                self._override_rho[key] = _check_prob(ov.rho, "override rho")
        # entries grouped by (player, kind, target) for the hot path
        self._entries: dict[tuple[int, OrderKind, int], list[ImprovementEntry]] = {}
        for e in self.improvements:
            self._entries.setdefault((e.player, e.kind, e.target), []).append(e)

    @classmethod
    def uniform(cls, n_objectives: int, attack: float = 0.0, reinforce: float = 0.0):
        row_a = [attack] * n_objectives
        row_r = [reinforce] * n_objectives
        return cls({1: row_a, 2: list(row_a)}, {1: row_r, 2: list(row_r)})

    def _boosted(self, base: float, player: int, kind: OrderKind, objective: int,
                 state: State) -> float:
        fail = 1.0 - base
        for e in self._entries.get((player, kind, objective), ()):
            if all(state[o] == player for o in e.condition):
                fail *= 1.0 - e.boost
        return 1.0 - fail


def attack_success_prob(model: ProbabilityModel, player: int, objective: int,
                        state: State) -> float:
    """alpha: chance the player's attack on `objective` flips it, before any
    reinforcement.  By convention 1 when the player already controls it."""
    if state[objective] == player:
        return 1.0
    key = (tuple(state), player, objective)
    if key in model._override_alpha:
        return model._override_alpha[key]
    base = model.initial_attack[player][objective]
    return model._boosted(base, player, OrderKind.ATTACK, objective, state)


def reinforce_success_prob(model: ProbabilityModel, player: int, objective: int,
                           state: State) -> float:
    """rho: chance the extra defensive layer thwarts an otherwise-successful
    attack.  By convention 0 when the opponent controls the objective."""
    if state[objective] != player:
        return 0.0
    key = (tuple(state), player, objective)
    if key in model._override_rho:
        return model._override_rho[key]
    base = model.initial_reinforce[player][objective]
    return model._boosted(base, player, OrderKind.REINFORCE, objective, state)


def battle_outcome_prob(model: ProbabilityModel, state: State, objective: int,
                        order1: OrderKind, order2: OrderKind) -> float:
    """Probability that Player 1 controls `objective` next stage, given each
    player's order kind for it."""
    owner = state[objective]
    if owner == 1:
        if order2 is not OrderKind.ATTACK:
            return 1.0
        alpha = attack_success_prob(model, 2, objective, state)
        rho = (reinforce_success_prob(model, 1, objective, state)
               if order1 is OrderKind.REINFORCE else 0.0)
        return 1.0 - alpha * (1.0 - rho)
    if order1 is not OrderKind.ATTACK:
        return 0.0
    alpha = attack_success_prob(model, 1, objective, state)
    rho = (reinforce_success_prob(model, 2, objective, state)
           if order2 is OrderKind.REINFORCE else 0.0)
    return alpha * (1.0 - rho)


@dataclass
class SuccessorDistribution:
    outcomes: list[tuple[State, float]]

    def __post_init__(self):
        total = sum(p for _, p in self.outcomes)
        if abs(total - 1.0) > PROB_TOL:
            raise CampaignError(f"successor probabilities sum to {total}, not 1")

    def sample(self, rng) -> State:
        u = rng.random()
        acc = 0.0
        for s, p in self.outcomes:
            acc += p
            if u < acc:
                return s
        return self.outcomes[-1][0]


def successor_distribution(campaign: Campaign, state: State, a1: ActionProfile,
                           a2: ActionProfile) -> SuccessorDistribution:
    """Joint distribution over next states under one action pair.

    Only contested objectives (those under an attack order) can flip; their
    battles are independent, so the support has at most 2^#contested states.
    """
    model = campaign.probability_model
    contested = []  # (objective, probability the current owner retains it)
    for profile, player in ((a1, 1), (a2, 2)):
        for order in profile.orders:
            if order.kind is not OrderKind.ATTACK:
                continue
            o = order.target
            defender = state[o]
            other = a2 if player == 1 else a1
            p1_next = battle_outcome_prob(
                model, state, o,
                order.kind if player == 1 else other.order_for(o),
                order.kind if player == 2 else other.order_for(o))
            retain = p1_next if defender == 1 else 1.0 - p1_next
            contested.append((o, retain))
    if not contested:
        return SuccessorDistribution([(tuple(state), 1.0)])
    outcomes = []
    for flips in itertools.product((False, True), repeat=len(contested)):
        prob = 1.0
        control = list(state)
        for (o, retain), flip in zip(contested, flips):
            if flip:
                prob *= 1.0 - retain
                control[o] = 3 - control[o]
            else:
                prob *= retain
        if prob > 0.0:
            outcomes.append((tuple(control), prob))
    return SuccessorDistribution(outcomes)


@dataclass
class AssumptionReport:
    """Outcome of checking the probability-model assumptions.

    Monotonicity: Player 1's alpha/rho never increase, and Player 2's never
    decrease, when Player 2 gains an objective.  Defense dominance: flipping
    one objective, the probability of keeping it reinforced is at least the
    probability of (re)taking it against reinforcement.
    """

    monotonicity_errors: list[str] = field(default_factory=list)
    defense_errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    strictness: list[str] = field(default_factory=list)
    states_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.monotonicity_errors and not self.defense_errors


def _classify(margin: float, message: str, errors: list[str], warnings: list[str]):
    if margin > PROB_TOL:
        errors.append(message)
    elif margin > 0.0:
        warnings.append(message)


def validate_assumptions(campaign: Campaign, mode: str = "exhaustive",
                         samples: int = 1000, seed: int = 0,
                         check_strictness: bool = False) -> AssumptionReport:
    """Check the monotonicity and defense-dominance assumptions on single-flip
    pairs of achievable states (sufficient for the componentwise order by
    transitivity).

    mode 'exhaustive' iterates every achievable state; 'sampled' draws
    `samples` achievable states uniformly with `seed`.
    """
    import numpy as np

    model = campaign.probability_model
    report = AssumptionReport()
    if mode == "exhaustive":
        states = enumerate_achievable_states(campaign)
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, campaign.num_achievable, size=samples)
        states = (decode_state(campaign, int(i)) for i in idx)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    n = campaign.n_objectives
    for s in states:
        report.states_checked += 1
        for o in range(n):
            if s[o] != 1:
                continue
            s2 = s[:o] + (2,) + s[o + 1:]
            if not is_achievable(campaign, s2):
                continue
            # defense dominance at the flipped objective
            lhs = (1.0 - attack_success_prob(model, 2, o, s)
                   * (1.0 - reinforce_success_prob(model, 1, o, s)))
            rhs = (attack_success_prob(model, 1, o, s2)
                   * (1.0 - reinforce_success_prob(model, 2, o, s2)))
            _classify(rhs - lhs,
                      f"objective {o}: keep-reinforced {lhs:.6g} < retake {rhs:.6g} "
                      f"at state {''.join(map(str, s))}",
                      report.defense_errors, report.warnings)
            # monotonicity of alpha/rho for every objective across the flip
            for oo in range(n):
                pairs = (
                    ("alpha1", attack_success_prob(model, 1, oo, s),
                     attack_success_prob(model, 1, oo, s2), 1),
                    ("rho1", reinforce_success_prob(model, 1, oo, s),
                     reinforce_success_prob(model, 1, oo, s2), 1),
                    ("alpha2", attack_success_prob(model, 2, oo, s),
                     attack_success_prob(model, 2, oo, s2), 2),
                    ("rho2", reinforce_success_prob(model, 2, oo, s),
                     reinforce_success_prob(model, 2, oo, s2), 2),
                )
                for name, lo, hi, player in pairs:
                    margin = (hi - lo) if player == 1 else (lo - hi)
                    _classify(margin,
                              f"{name} on objective {oo} not "
                              f"{'antitone' if player == 1 else 'isotone'} across flip of "
                              f"objective {o} at state {''.join(map(str, s))}",
                              report.monotonicity_errors, report.warnings)
    if check_strictness:
        report.strictness = _strictness_report(campaign)
    return report


def _strictness_report(campaign: Campaign) -> list[str]:
    """Conditions under which the reduced action sets capture *every*
    equilibrium: positive losses, positive attack probabilities on open
    opponent objectives, interior reinforce probabilities on open own ones."""
    model = campaign.probability_model
    issues = []
    for o in campaign.objectives:
        if o.loss <= 0:
            issues.append(f"objective {o.id} has zero loss")
    for s in enumerate_achievable_states(campaign):
        for player in (1, 2):
            for o in open_loc(campaign, s, player):
                if s[o] != player:
                    if attack_success_prob(model, player, o, s) <= 0:
                        issues.append(
                            f"alpha{player} on objective {o} is 0 at "
                            f"state {''.join(map(str, s))}")
                else:
                    rho = reinforce_success_prob(model, player, o, s)
                    if not 0.0 < rho < 1.0:
                        issues.append(
                            f"rho{player} on objective {o} is {rho} at "
                            f"state {''.join(map(str, s))}")
    return issues
