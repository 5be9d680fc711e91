"""Campaign structure: objectives, axes, commanders, states, and action enumeration.

A campaign partitions its objectives into totally ordered axes.  Control of
each objective by one of the two players forms the game state; lines of
control, battle fronts, and the feasible/reduced action sets all derive from
that structure.  Everything in this module is immutable after construction
and all operations are pure functions.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

State = tuple[int, ...]
"""Control vector: entry o is 1 or 2, the player controlling objective o."""


class CampaignError(ValueError):
    """Structural invariant violation in campaign data."""


class UnachievableStateError(ValueError):
    """Operation requires an achievable state but got one that is not."""


@dataclass(frozen=True)
class Objective:
    id: int
    loss: float
    label: str = ""

    def __post_init__(self):
        if self.loss < 0:
            raise CampaignError(f"objective {self.id}: loss must be >= 0, got {self.loss}")


@dataclass(frozen=True)
class Axis:
    """Totally ordered chain of objective ids, front (Player 1 side) first."""

    id: int
    objectives: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "objectives", tuple(self.objectives))
        if len(self.objectives) < 1:
            raise CampaignError(f"axis {self.id}: must contain at least one objective")

    def __len__(self) -> int:
        return len(self.objectives)


@dataclass(frozen=True)
class Commander:
    """Order-issuing unit.  One record serves both players (responsibilities
    are symmetric): Player 1 reaches the front of each responsible axis from
    their base, Player 2 the rear."""

    id: int
    axes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(sorted(self.axes)))


class AxisKind(enum.Enum):
    C1 = "c1"
    C2 = "c2"
    PF = "pf"
    SF = "sf"
    UNACHIEVABLE = "unachievable"


@dataclass(frozen=True)
class AxisType:
    kind: AxisKind
    split: int | None = None
    """1-based split index k for PF/SF; None otherwise."""


class OrderKind(enum.Enum):
    ATTACK = "atk"
    REINFORCE = "rfc"
    NONE = "none"


@dataclass(frozen=True)
class Order:
    kind: OrderKind
    target: int | None = None

    def __post_init__(self):
        if self.kind is OrderKind.NONE and self.target is not None:
            raise CampaignError("NONE order must not carry a target")
        if self.kind is not OrderKind.NONE and self.target is None:
            raise CampaignError(f"{self.kind.value} order requires a target")


NONE_ORDER = Order(OrderKind.NONE)


@dataclass(frozen=True)
class ActionProfile:
    """One order per commander (indexed by commander id) for one player."""

    orders: tuple[Order, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(self.orders))

    def order_for(self, objective: int) -> OrderKind:
        for order in self.orders:
            if order.target == objective:
                return order.kind
        return OrderKind.NONE


class Campaign:
    """Static campaign structure.

    Validates on construction: objective ids dense and unique, axes partition
    the objectives, every axis belongs to exactly one commander, and the
    discount factor lies strictly inside (0, 1).  The probability model is
    attached but owned by the transitions module.
    """

    def __init__(self, objectives: Sequence[Objective], axes: Sequence[Axis],
                 commanders: Sequence[Commander], discount: float,
                 probability_model=None):
        self.objectives = tuple(sorted(objectives, key=lambda o: o.id))
        self.axes = tuple(sorted(axes, key=lambda a: a.id))
        self.commanders = tuple(sorted(commanders, key=lambda c: c.id))
        self.discount = float(discount)
        self.probability_model = probability_model
        self._validate()
        self.losses = tuple(o.loss for o in self.objectives)
        self.total_loss = sum(self.losses)
        # objective id -> (axis id, 0-based position within the axis)
        self.axis_position = {}
        for axis in self.axes:
            for pos, o in enumerate(axis.objectives):
                self.axis_position[o] = (axis.id, pos)
        self.commander_of_axis = {}
        for c in self.commanders:
            for x in c.axes:
                self.commander_of_axis[x] = c.id
        # mixed-radix layout over axis codes, axis 0 most significant
        self.radices = tuple(2 * len(axis) for axis in self.axes)
        places = []
        p = 1
        for r in reversed(self.radices):
            places.append(p)
            p *= r
        self.places = tuple(reversed(places))
        self.num_achievable = p

    def _validate(self):
        n = len(self.objectives)
        ids = [o.id for o in self.objectives]
        if ids != list(range(n)):
            raise CampaignError(f"objective ids must be 0..{n - 1} and unique, got {ids}")
        if [a.id for a in self.axes] != list(range(len(self.axes))):
            raise CampaignError("axis ids must be dense 0-based")
        if [c.id for c in self.commanders] != list(range(len(self.commanders))):
            raise CampaignError("commander ids must be dense 0-based")
        seen: set[int] = set()
        for axis in self.axes:
            for o in axis.objectives:
                if o in seen:
                    raise CampaignError(f"objective {o} appears in more than one axis")
                if not 0 <= o < n:
                    raise CampaignError(f"axis {axis.id} references unknown objective {o}")
                seen.add(o)
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)
            raise CampaignError(f"objectives {missing} belong to no axis")
        owned: set[int] = set()
        for c in self.commanders:
            for x in c.axes:
                if x in owned:
                    raise CampaignError(f"axis {x} assigned to more than one commander")
                if not 0 <= x < len(self.axes):
                    raise CampaignError(f"commander {c.id} references unknown axis {x}")
                owned.add(x)
        if len(owned) != len(self.axes):
            missing = sorted(set(range(len(self.axes))) - owned)
            raise CampaignError(f"axes {missing} have no responsible commander")
        if not 0.0 < self.discount < 1.0:
            raise CampaignError(f"discount must lie in (0, 1), got {self.discount}")

    @property
    def n_objectives(self) -> int:
        return len(self.objectives)

    def check_state(self, state: State):
        if len(state) != self.n_objectives or any(v not in (1, 2) for v in state):
            raise CampaignError(f"malformed state {state!r} for {self.n_objectives} objectives")


def classify_axis(axis: Axis, state: State) -> AxisType:
    """Classify one axis at a state into c1/c2/pf(k)/sf(k), else unachievable.

    Total function: malformed control patterns classify as UNACHIEVABLE
    rather than raising, so validators can report.
    """
    control = [state[o] for o in axis.objectives]
    n = len(control)
    lead = 0
    while lead < n and control[lead] == 1:
        lead += 1
    if lead == n:
        return AxisType(AxisKind.C1)
    if all(v == 2 for v in control[lead:]):
        if lead == 0:
            return AxisType(AxisKind.C2)
        return AxisType(AxisKind.PF, split=lead)
    # split front: prefix of 1s, a 2 at k, a 1 at k+1, 2s after
    k = lead + 1  # 1-based index of the first 2
    if k <= n - 1 and control[k] == 1 and all(v == 2 for v in control[k + 1:]):
        return AxisType(AxisKind.SF, split=k)
    return AxisType(AxisKind.UNACHIEVABLE)


def axis_code(axis: Axis, axis_type: AxisType) -> int:
    """Integer code of an axis classification: 0=c1, 1=c2, 1+k=pf(k), n+k=sf(k)."""
    n = len(axis)
    if axis_type.kind is AxisKind.C1:
        return 0
    if axis_type.kind is AxisKind.C2:
        return 1
    if axis_type.kind is AxisKind.PF:
        return 1 + axis_type.split
    if axis_type.kind is AxisKind.SF:
        return n + axis_type.split
    raise UnachievableStateError(f"axis {axis.id} is not achievable")


def axis_control_from_code(n: int, code: int) -> list[int]:
    """Inverse of axis_code: control pattern of a size-n axis for a code in [0, 2n)."""
    if code == 0:
        return [1] * n
    if code == 1:
        return [2] * n
    if 2 <= code <= n:
        k = code - 1
        return [1] * k + [2] * (n - k)
    if n + 1 <= code <= 2 * n - 1:
        k = code - n
        return [1] * (k - 1) + [2, 1] + [2] * (n - k - 1)
    raise ValueError(f"axis code {code} out of range for axis of size {n}")


def is_achievable(campaign: Campaign, state: State) -> bool:
    return all(classify_axis(axis, state).kind is not AxisKind.UNACHIEVABLE
               for axis in campaign.axes)


def fronts(axis: Axis, state: State, player: int) -> tuple[int, ...]:
    """Battle-front objective ids of an axis for one player, in axis order.

    Rejects unachievable axes.  c1 -> rear, c2 -> front, pf(k) -> both split
    objectives, sf(k) -> each player's nearest opponent objective.
    """
    t = classify_axis(axis, state)
    objs = axis.objectives
    if t.kind is AxisKind.C1:
        return (objs[-1],)
    if t.kind is AxisKind.C2:
        return (objs[0],)
    if t.kind is AxisKind.PF:
        return (objs[t.split - 1], objs[t.split])
    if t.kind is AxisKind.SF:
        return (objs[t.split - 1],) if player == 1 else (objs[t.split],)
    raise UnachievableStateError(f"axis {axis.id} is unachievable at state {state!r}")


def open_loc(campaign: Campaign, state: State, player: int) -> set[int]:
    """Objectives with an open line of control from the player's bases.

    Player 1 reaches o_k of an axis iff they control o_1..o_{k-1}; Player 2
    iff they control o_{k+1}..o_n.
    """
    result: set[int] = set()
    for axis in campaign.axes:
        objs = axis.objectives
        if player == 1:
            for o in objs:
                result.add(o)
                if state[o] != 1:
                    break
        else:
            for o in reversed(objs):
                result.add(o)
                if state[o] != 2:
                    break
    return result


def stage_loss(campaign: Campaign, state: State) -> float:
    return sum(l for l, v in zip(campaign.losses, state) if v == 2)


def _profiles(per_commander_options: list[list[Order]]) -> list[ActionProfile]:
    return [ActionProfile(orders) for orders in itertools.product(*per_commander_options)]


def feasible_actions_full(campaign: Campaign, state: State, player: int) -> list[ActionProfile]:
    """Full feasible action set: per commander NONE or one attack/reinforce
    order on an open-LoC objective under their responsibility.

    Deterministic order: commanders by id, per commander NONE first, then
    reinforce and attack targets by objective id; the last commander's
    option varies fastest in the Cartesian product.
    """
    campaign.check_state(state)
    open_set = open_loc(campaign, state, player)
    per_commander = []
    for c in campaign.commanders:
        objs = sorted(o for x in c.axes for o in campaign.axes[x].objectives
                      if o in open_set)
        options = [NONE_ORDER]
        options += [Order(OrderKind.REINFORCE, o) for o in objs if state[o] == player]
        options += [Order(OrderKind.ATTACK, o) for o in objs if state[o] != player]
        per_commander.append(options)
    return _profiles(per_commander)


def reduced_actions(campaign: Campaign, state: State, player: int) -> list[ActionProfile]:
    """Equilibrium-supporting action set: per commander exactly one non-NONE
    order at a battle front of one of their axes (attack if the objective is
    opponent-controlled, reinforce if own).

    Deterministic order: commanders by id; per commander, axes by id and
    front objectives in axis order; the last commander varies fastest.
    """
    campaign.check_state(state)
    per_commander = []
    for c in campaign.commanders:
        options = []
        for x in c.axes:
            axis = campaign.axes[x]
            for o in fronts(axis, state, player):
                kind = OrderKind.REINFORCE if state[o] == player else OrderKind.ATTACK
                options.append(Order(kind, o))
        per_commander.append(options)
    return _profiles(per_commander)


def check_feasible(campaign: Campaign, state: State, player: int,
                   profile: ActionProfile) -> str | None:
    """Explain why a profile is infeasible at a state, or None if feasible."""
    if len(profile.orders) != len(campaign.commanders):
        return (f"expected one order per commander "
                f"({len(campaign.commanders)}), got {len(profile.orders)}")
    open_set = open_loc(campaign, state, player)
    targets = [o.target for o in profile.orders if o.kind is not OrderKind.NONE]
    if len(targets) != len(set(targets)):
        return "duplicate target objective across commanders"
    for c, order in zip(campaign.commanders, profile.orders):
        if order.kind is OrderKind.NONE:
            continue
        o = order.target
        if not 0 <= o < campaign.n_objectives:
            return f"commander {c.id}: unknown objective {o}"
        axis_id, _ = campaign.axis_position[o]
        if axis_id not in c.axes:
            return f"commander {c.id} is not responsible for objective {o}"
        if o not in open_set:
            return f"objective {o} has no open line of control for player {player}"
        if order.kind is OrderKind.REINFORCE and state[o] != player:
            return f"cannot reinforce objective {o}: not controlled by player {player}"
        if order.kind is OrderKind.ATTACK and state[o] == player:
            return f"cannot attack objective {o}: already controlled by player {player}"
    return None


def encode_state(campaign: Campaign, state: State) -> int:
    """Mixed-radix index of an achievable state (axis 0 most significant)."""
    campaign.check_state(state)
    index = 0
    for axis, place in zip(campaign.axes, campaign.places):
        t = classify_axis(axis, state)
        if t.kind is AxisKind.UNACHIEVABLE:
            raise UnachievableStateError(
                f"axis {axis.id} is unachievable at state {state!r}")
        index += axis_code(axis, t) * place
    return index


def decode_state(campaign: Campaign, index: int) -> State:
    if not 0 <= index < campaign.num_achievable:
        raise ValueError(f"state index {index} out of range [0, {campaign.num_achievable})")
    control = [0] * campaign.n_objectives
    for axis, place, radix in zip(campaign.axes, campaign.places, campaign.radices):
        code = (index // place) % radix
        for o, v in zip(axis.objectives, axis_control_from_code(len(axis), code)):
            control[o] = v
    return tuple(control)


def enumerate_achievable_states(campaign: Campaign) -> Iterator[State]:
    """All achievable states in increasing mixed-radix index order."""
    for index in range(campaign.num_achievable):
        yield decode_state(campaign, index)


def validate_initial_state(campaign: Campaign, state: State) -> list[str]:
    """Report of axis achievability violations; empty list means ok."""
    campaign.check_state(state)
    report = []
    for axis in campaign.axes:
        if classify_axis(axis, state).kind is AxisKind.UNACHIEVABLE:
            pattern = "".join(str(state[o]) for o in axis.objectives)
            report.append(f"axis {axis.id} has unachievable control pattern {pattern}")
    return report
