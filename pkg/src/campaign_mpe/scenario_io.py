"""Scenario and solution files, digests, and report generation.

Scenarios are JSON documents (schema "campaign-mpe/1") describing the
campaign structure, the probability model, and the initial state.  The
content digest covers the canonicalized form (sorted keys, normalized
numbers), so cosmetic edits do not invalidate stored solutions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import core
from .core import (
    ActionProfile,
    Axis,
    AxisKind,
    Campaign,
    CampaignError,
    Commander,
    NONE_ORDER,
    Objective,
    Order,
    OrderKind,
    State,
)
from .solver import PolicyProfile, SolveReport
from .transitions import ImprovementEntry, Override, ProbabilityModel

SCHEMA_VERSION = "campaign-mpe/1"
SOLUTION_SCHEMA_VERSION = "campaign-mpe-solution/1"


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario/solution document."""


def parse_state(text: str, n_objectives: int) -> State:
    if len(text) != n_objectives or any(ch not in "12" for ch in text):
        raise ScenarioError(
            f"state string must be {n_objectives} characters over {{1,2}}, "
            f"got {text!r}")
    return tuple(int(ch) for ch in text)


def format_state(state: State) -> str:
    return "".join(str(v) for v in state)


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise ScenarioError(f"{where}: missing field {key!r}")
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ScenarioError(
            f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, "
            f"got {type(value).__name__}")
    return value


def _prob_rows(doc: dict, key: str, n: int) -> dict[int, list[float]]:
    rows = _require(doc, key, dict, "probability")
    out = {}
    for p in (1, 2):
        row = rows.get(str(p), rows.get(p))
        if not isinstance(row, list) or len(row) != n:
            raise ScenarioError(
                f"probability.{key}.{p}: expected a list of {n} probabilities")
        out[p] = [float(v) for v in row]
    return out


def scenario_from_dict(doc: dict) -> tuple[Campaign, State]:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be an object")
    version = _require(doc, "schema_version", str, "scenario")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}, "
                            f"expected {SCHEMA_VERSION!r}")
    objectives = []
    for i, entry in enumerate(_require(doc, "objectives", list, "scenario")):
        where = f"objectives[{i}]"
        objectives.append(Objective(
            id=_require(entry, "id", int, where),
            loss=_require(entry, "loss", float, where),
            label=str(entry.get("label", ""))))
    n = len(objectives)
    axes = [Axis(i, tuple(chain))
            for i, chain in enumerate(_require(doc, "axes", list, "scenario"))]
    commanders = [Commander(i, tuple(ax))
                  for i, ax in enumerate(_require(doc, "commanders", list, "scenario"))]

    prob = _require(doc, "probability", dict, "scenario")
    improvements = []
    for i, entry in enumerate(prob.get("improvements", [])):
        where = f"probability.improvements[{i}]"
        kind = _require(entry, "kind", str, where)
        try:
            kind = OrderKind(kind)
        except ValueError:
            raise ScenarioError(f"{where}.kind: expected 'atk' or 'rfc', got {kind!r}")
        improvements.append(ImprovementEntry(
            player=_require(entry, "player", int, where),
            target=_require(entry, "target", int, where),
            kind=kind,
            condition=frozenset(_require(entry, "condition", list, where)),
            boost=_require(entry, "boost", float, where)))
    overrides = []
    for i, entry in enumerate(prob.get("overrides", [])):
        where = f"probability.overrides[{i}]"
        overrides.append(Override(
            state=parse_state(_require(entry, "state", str, where), n),
            player=_require(entry, "player", int, where),
            objective=_require(entry, "objective", int, where),
            alpha=None if entry.get("alpha") is None else float(entry["alpha"]),
            rho=None if entry.get("rho") is None else float(entry["rho"])))
    model = ProbabilityModel(
        initial_attack=_prob_rows(prob, "initial_attack", n),
        initial_reinforce=_prob_rows(prob, "initial_reinforce", n),
        improvements=improvements,
        overrides=overrides)

    try:
        campaign = Campaign(objectives, axes, commanders,
                            _require(doc, "discount", float, "scenario"), model)
    except CampaignError as exc:
        raise ScenarioError(str(exc)) from exc
    for imp in improvements:
        for o in {imp.target} | set(imp.condition):
            if not 0 <= o < n:
                raise ScenarioError(
                    f"probability.improvements: unknown objective {o}")
    for ov in overrides:
        if not 0 <= ov.objective < n:
            raise ScenarioError(f"probability.overrides: unknown objective {ov.objective}")

    initial = parse_state(_require(doc, "initial_state", str, "scenario"), n)
    problems = core.validate_initial_state(campaign, initial)
    if problems:
        raise ScenarioError("initial state is not achievable: " + "; ".join(problems))
    return campaign, initial


def scenario_to_dict(campaign: Campaign, initial_state: State,
                     name: str = "") -> dict:
    """Canonical document form (basis of the content digest)."""
    model = campaign.probability_model
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "discount": float(campaign.discount),
        "objectives": [{"id": o.id, "label": o.label, "loss": float(o.loss)}
                       for o in campaign.objectives],
        "axes": [list(a.objectives) for a in campaign.axes],
        "commanders": [list(c.axes) for c in campaign.commanders],
        "initial_state": format_state(initial_state),
        "probability": {
            "initial_attack": {str(p): list(model.initial_attack[p]) for p in (1, 2)},
            "initial_reinforce": {str(p): list(model.initial_reinforce[p]) for p in (1, 2)},
            "improvements": [
                {"player": e.player, "target": e.target, "kind": e.kind.value,
                 "condition": sorted(e.condition), "boost": float(e.boost)}
                for e in model.improvements],
            "overrides": [
                {"state": format_state(ov.state), "player": ov.player,
                 "objective": ov.objective,
                 "alpha": ov.alpha, "rho": ov.rho}
                for ov in model.overrides],
        },
    }
    return doc


def _canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def scenario_digest(campaign: Campaign, initial_state: State) -> str:
    doc = scenario_to_dict(campaign, initial_state)
    doc.pop("name")  # cosmetic
    return hashlib.sha256(_canonical_bytes(doc)).hexdigest()


def load_scenario(path) -> tuple[Campaign, State]:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON at line {exc.lineno}, "
                            f"column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(doc)


def save_scenario(campaign: Campaign, initial_state: State, path,
                  name: str = ""):
    doc = scenario_to_dict(campaign, initial_state, name)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


@dataclass
class Solution:
    values: np.ndarray
    policy: PolicyProfile
    epsilon: float
    iterations: int
    algorithm: str
    wallclock: float
    scenario_digest: str


def _encode_action(profile: ActionProfile) -> list:
    return [[c, order.kind.value, order.target]
            for c, order in enumerate(profile.orders)
            if order.kind is not OrderKind.NONE]


def _decode_action(encoded: list, n_commanders: int) -> ActionProfile:
    orders = [NONE_ORDER] * n_commanders
    for item in encoded:
        c, kind, target = item
        if not 0 <= c < n_commanders:
            raise ScenarioError(f"solution action references unknown commander {c}")
        if orders[c] is not NONE_ORDER:
            raise ScenarioError(f"solution action has two orders for commander {c}")
        orders[c] = Order(OrderKind(kind), target)
    return ActionProfile(tuple(orders))


def _axis_code_table(campaign: Campaign) -> list[list[str]]:
    return [["".join(map(str, core.axis_control_from_code(len(axis), code)))
             for code in range(2 * len(axis))]
            for axis in campaign.axes]


def save_solution(path, campaign: Campaign, initial_state: State,
                  values: np.ndarray, policy: PolicyProfile,
                  report: SolveReport):
    strategies = {}
    for player in (1, 2):
        per_state = []
        for s_idx, strat in enumerate(policy.strategies[player]):
            state = core.decode_state(campaign, s_idx)
            actions = core.reduced_actions(campaign, state, player)
            per_state.append([[float(strat[i]), _encode_action(actions[i])]
                              for i in np.nonzero(strat)[0]])
        strategies[str(player)] = per_state
    doc = {
        "schema_version": SOLUTION_SCHEMA_VERSION,
        "scenario_digest": scenario_digest(campaign, initial_state),
        "axis_codes": _axis_code_table(campaign),
        "epsilon": report.epsilon,
        "gamma": campaign.discount,
        "algorithm": report.algorithm,
        "iterations": report.iterations,
        "wallclock": report.wallclock,
        "values": [float(v) for v in values],
        "strategies": strategies,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True,
                                     separators=(",", ": ")) + "\n")


def load_solution(path, campaign: Campaign, initial_state: State) -> Solution:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SOLUTION_SCHEMA_VERSION:
        raise ScenarioError(f"unsupported solution schema "
                            f"{doc.get('schema_version')!r}")
    digest = scenario_digest(campaign, initial_state)
    if doc.get("scenario_digest") != digest:
        raise ScenarioError(
            "solution digest does not match the scenario "
            f"(expected {digest}, found {doc.get('scenario_digest')})")
    if doc.get("axis_codes") != _axis_code_table(campaign):
        raise ScenarioError("solution axis-code table does not match the scenario")
    values = np.asarray(doc["values"], dtype=float)
    if len(values) != campaign.num_achievable:
        raise ScenarioError(
            f"solution has {len(values)} values, expected {campaign.num_achievable}")
    strategies: dict[int, list[np.ndarray]] = {1: [], 2: []}
    for player in (1, 2):
        rows = doc["strategies"][str(player)]
        if len(rows) != campaign.num_achievable:
            raise ScenarioError(f"player {player} strategies cover {len(rows)} "
                                f"states, expected {campaign.num_achievable}")
        for s_idx, entries in enumerate(rows):
            state = core.decode_state(campaign, s_idx)
            actions = core.reduced_actions(campaign, state, player)
            index = {a: i for i, a in enumerate(actions)}
            strat = np.zeros(len(actions))
            for prob, encoded in entries:
                action = _decode_action(encoded, len(campaign.commanders))
                if action not in index:
                    raise ScenarioError(
                        f"player {player} state {format_state(state)}: action "
                        f"{encoded} is outside the reduced action set")
                strat[index[action]] = prob
            if abs(strat.sum() - 1.0) > 1e-9:
                raise ScenarioError(
                    f"player {player} state {format_state(state)}: strategy "
                    f"sums to {strat.sum()}, not 1")
            strategies[player].append(strat)
    return Solution(values=values, policy=PolicyProfile(strategies),
                    epsilon=float(doc["epsilon"]),
                    iterations=int(doc["iterations"]),
                    algorithm=str(doc["algorithm"]),
                    wallclock=float(doc.get("wallclock", 0.0)),
                    scenario_digest=digest)


def max_reduced_actions(campaign: Campaign) -> int:
    """Largest per-player reduced action count over all achievable states,
    computed from axis codes (front count is 2 on a prefix/suffix split axis,
    else 1) without enumerating action profiles."""
    idx = np.arange(campaign.num_achievable)
    front_counts = []
    for axis, place, radix in zip(campaign.axes, campaign.places, campaign.radices):
        codes = (idx // place) % radix
        n = len(axis)
        front_counts.append(np.where((codes >= 2) & (codes <= n), 2, 1))
    best = np.ones(campaign.num_achievable, dtype=np.int64)
    for c in campaign.commanders:
        best *= sum(front_counts[x] for x in c.axes)
    return int(best.max())


def _describe_action(profile: ActionProfile) -> str:
    parts = []
    for c, order in enumerate(profile.orders):
        if order.kind is OrderKind.NONE:
            parts.append(f"cmdr {c}: -")
        else:
            verb = "atk" if order.kind is OrderKind.ATTACK else "rfc"
            parts.append(f"cmdr {c}: {verb} obj {order.target}")
    return "; ".join(parts)


def report(campaign: Campaign, solution: Solution, states: list[State]) -> str:
    """Human-readable tables: values at the named states, both players'
    mixed strategies there (zero-probability rows omitted), and solve
    statistics."""
    lines = ["== Optimal values =="]
    lines.append(f"{'state':<{max(5, campaign.n_objectives)}}  value")
    for s in states:
        idx = core.encode_state(campaign, s)
        lines.append(f"{format_state(s):<{max(5, campaign.n_objectives)}}  "
                     f"{solution.values[idx]:.6f}")
    for s in states:
        idx = core.encode_state(campaign, s)
        for player in (1, 2):
            lines.append("")
            lines.append(f"== Player {player} strategy at {format_state(s)} ==")
            actions = core.reduced_actions(campaign, s, player)
            strat = solution.policy.strategies[player][idx]
            for i in np.nonzero(strat)[0]:
                lines.append(f"{strat[i]:>10.6f}  {_describe_action(actions[i])}")
    lines.append("")
    lines.append("== Solve statistics ==")
    lines.append(f"achievable states: {campaign.num_achievable}")
    lines.append(f"max reduced actions per player: {max_reduced_actions(campaign)}")
    lines.append(f"algorithm: {solution.algorithm}  epsilon: {solution.epsilon}  "
                 f"iterations: {solution.iterations}  "
                 f"wallclock: {solution.wallclock:.2f}s")
    return "\n".join(lines) + "\n"


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (name without extension)."""
    root = resources.files("campaign_mpe") / "scenarios"
    path = Path(str(root / f"{name}.json"))
    if not path.exists():
        known = sorted(p.stem for p in Path(str(root)).glob("*.json"))
        raise FileNotFoundError(f"no bundled scenario {name!r}; available: {known}")
    return path


def list_bundled_scenarios() -> list[str]:
    root = Path(str(resources.files("campaign_mpe") / "scenarios"))
    return sorted(p.stem for p in root.glob("*.json"))
