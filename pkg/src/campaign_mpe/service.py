"""Session-oriented HTTP API for playing one side of a solved campaign.

The analyst plays any feasible action (including off-equilibrium ones); the
opponent samples from the solved equilibrium strategy.  Sessions live in
memory; all randomness flows from the session seed, so a replay with the
same seed and action sequence reproduces the identical outcome stream.
Every response carries the scenario digest so a stale client cannot mix
scenarios.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import core
from .core import ActionProfile, Campaign, NONE_ORDER, Order, OrderKind, State
from .scenario_io import Solution, format_state, parse_state, scenario_digest
from .transitions import successor_distribution


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, constraint: str = ""):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.constraint = constraint


@dataclass
class Session:
    id: str
    human_player: int
    state: State
    seed: int
    rng: np.random.Generator
    stage: int = 0
    accumulated_loss: float = 0.0
    history: list[dict] = field(default_factory=list)


def _orders_json(profile: ActionProfile) -> list[dict]:
    return [{"commander": c, "kind": o.kind.value, "target": o.target}
            for c, o in enumerate(profile.orders)
            if o.kind is not OrderKind.NONE]


def _parse_orders(body, n_commanders: int) -> ActionProfile:
    if not isinstance(body, list):
        raise ApiError(422, "bad-request", "orders must be a list",
                       "orders: [{commander, kind, target}]")
    orders = [NONE_ORDER] * n_commanders
    for item in body:
        try:
            c = int(item["commander"])
            kind = OrderKind(item["kind"])
            target = item.get("target")
        except (KeyError, TypeError, ValueError) as exc:
            raise ApiError(422, "bad-request", f"malformed order entry: {exc}",
                           "orders: [{commander, kind, target}]")
        if not 0 <= c < n_commanders:
            raise ApiError(422, "infeasible-order", f"unknown commander {c}",
                           f"commander ids are 0..{n_commanders - 1}")
        if orders[c] is not NONE_ORDER:
            raise ApiError(422, "infeasible-order",
                           f"two orders for commander {c}",
                           "at most one order per commander per stage")
        if kind is OrderKind.NONE:
            continue
        orders[c] = Order(kind, target)
    return ActionProfile(tuple(orders))


def _strategy_json(campaign: Campaign, solution: Solution, state: State,
                   player: int) -> dict:
    idx = core.encode_state(campaign, state)
    actions = core.reduced_actions(campaign, state, player)
    strat = solution.policy.strategies[player][idx]
    return {
        "actions": [_orders_json(a) for a in actions],
        "strategy": [{"probability": float(strat[i]),
                      "orders": _orders_json(actions[i])}
                     for i in np.nonzero(strat)[0]],
    }


def create_app(campaign: Campaign, initial_state: State,
               solution: Solution | None = None) -> FastAPI:
    app = FastAPI(title="campaign-mpe service")
    digest = scenario_digest(campaign, initial_state)
    sessions: dict[str, Session] = {}

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message,
                                     "constraint": exc.constraint,
                                     "scenario_digest": digest})

    def need_solution() -> Solution:
        if solution is None:
            raise ApiError(409, "no-solution",
                           "no solution is loaded for this scenario",
                           "start the service with a solution file")
        return solution

    def parse_achievable(text: str) -> State:
        try:
            state = parse_state(text, campaign.n_objectives)
        except ValueError as exc:
            raise ApiError(404, "bad-state", str(exc),
                           f"states are {campaign.n_objectives}-character "
                           "strings over {1,2}")
        problems = core.validate_initial_state(campaign, state)
        if problems:
            raise ApiError(404, "unachievable-state", "; ".join(problems),
                           "every axis must classify as c1/c2/pf/sf")
        return state

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown-session",
                           f"no session {session_id}", "")
        return session

    @app.get("/state")
    def state_summary():
        return {
            "scenario_digest": digest,
            "discount": campaign.discount,
            "objectives": [{"id": o.id, "label": o.label, "loss": o.loss}
                           for o in campaign.objectives],
            "axes": [list(a.objectives) for a in campaign.axes],
            "commanders": [list(c.axes) for c in campaign.commanders],
            "initial_state": format_state(initial_state),
            "achievable_states": campaign.num_achievable,
            "has_solution": solution is not None,
        }

    @app.get("/value/{state_text}")
    def value(state_text: str):
        sol = need_solution()
        state = parse_achievable(state_text)
        idx = core.encode_state(campaign, state)
        return {
            "scenario_digest": digest,
            "state": format_state(state),
            "value": float(sol.values[idx]),
            "stage_loss": core.stage_loss(campaign, state),
            "player1": _strategy_json(campaign, sol, state, 1),
            "player2": _strategy_json(campaign, sol, state, 2),
        }

    def board_view(state: State) -> dict:
        lanes = []
        for axis in campaign.axes:
            f1 = core.fronts(axis, state, 1)
            f2 = core.fronts(axis, state, 2)
            open1 = core.open_loc(campaign, state, 1)
            open2 = core.open_loc(campaign, state, 2)
            lanes.append({
                "axis": axis.id,
                "commander": campaign.commander_of_axis[axis.id],
                "objectives": [{
                    "id": o,
                    "label": campaign.objectives[o].label,
                    "loss": campaign.objectives[o].loss,
                    "owner": state[o],
                    "front_p1": o in f1,
                    "front_p2": o in f2,
                    "open_loc_p1": o in open1,
                    "open_loc_p2": o in open2,
                } for o in axis.objectives],
            })
        return {"state": format_state(state), "lanes": lanes,
                "stage_loss": core.stage_loss(campaign, state)}

    def session_view(session: Session) -> dict:
        sol = solution
        idx = core.encode_state(campaign, session.state)
        return {
            "scenario_digest": digest,
            "session": session.id,
            "human_player": session.human_player,
            "stage": session.stage,
            "accumulated_discounted_loss": session.accumulated_loss,
            "board": board_view(session.state),
            "value": float(sol.values[idx]) if sol is not None else None,
            "history": session.history,
        }

    @app.post("/session")
    def create_session(body: dict):
        need_solution()
        player = body.get("human_player", 1)
        if player not in (1, 2):
            raise ApiError(422, "bad-request",
                           f"human_player must be 1 or 2, got {player}", "")
        state = (parse_achievable(body["state"]) if body.get("state")
                 else initial_state)
        seed = int(body.get("seed", secrets.randbits(32)))
        session = Session(id=secrets.token_hex(8), human_player=player,
                          state=state, seed=seed,
                          rng=np.random.default_rng(seed))
        sessions[session.id] = session
        return session_view(session)

    @app.get("/session/{session_id}")
    def session_state(session_id: str):
        return session_view(get_session(session_id))

    @app.post("/session/{session_id}/hint")
    def hint(session_id: str):
        sol = need_solution()
        session = get_session(session_id)
        return {
            "scenario_digest": digest,
            "state": format_state(session.state),
            **_strategy_json(campaign, sol, session.state, session.human_player),
        }

    @app.post("/session/{session_id}/action")
    def act(session_id: str, body: dict):
        sol = need_solution()
        session = get_session(session_id)
        human = session.human_player
        opponent = 3 - human
        profile = _parse_orders(body.get("orders", []), len(campaign.commanders))
        violation = core.check_feasible(campaign, session.state, human, profile)
        if violation is not None:
            raise ApiError(422, "infeasible-order", violation,
                           "orders must target open-LoC objectives under the "
                           "issuing commander's responsibility")

        state = session.state
        idx = core.encode_state(campaign, state)
        opp_actions = core.reduced_actions(campaign, state, opponent)
        strat = sol.policy.strategies[opponent][idx]
        draw = session.rng.random()
        pick = int(np.searchsorted(np.cumsum(strat), draw, side="right"))
        opp_profile = opp_actions[min(pick, len(opp_actions) - 1)]

        a1, a2 = (profile, opp_profile) if human == 1 else (opp_profile, profile)
        dist = successor_distribution(campaign, state, a1, a2)
        next_state = dist.sample(session.rng)

        battles = []
        for player, acting in ((1, a1), (2, a2)):
            for order in acting.orders:
                if order.kind is not OrderKind.ATTACK:
                    continue
                o = order.target
                defender_action = a2 if player == 1 else a1
                battles.append({
                    "objective": o,
                    "attacker": player,
                    "defender": state[o],
                    "reinforced": defender_action.order_for(o) is OrderKind.REINFORCE,
                    "outcome": "flipped" if next_state[o] != state[o] else "retained",
                })

        loss_now = core.stage_loss(campaign, state)
        session.accumulated_loss += campaign.discount ** session.stage * loss_now
        session.stage += 1
        session.history.append({
            "stage": session.stage - 1,
            "state": format_state(state),
            "human_orders": _orders_json(profile),
            "opponent_orders": _orders_json(opp_profile),
            "battles": battles,
            "next_state": format_state(next_state),
            "stage_loss": loss_now,
        })
        session.state = next_state
        return {
            "scenario_digest": digest,
            "session": session.id,
            "opponent_action": _orders_json(opp_profile),
            "battle_results": battles,
            "next_state": format_state(next_state),
            "board": board_view(next_state),
            "stage_loss": loss_now,
            "accumulated_discounted_loss": session.accumulated_loss,
            "stage": session.stage,
            "value_before": float(sol.values[idx]),
            "value_after": float(sol.values[core.encode_state(campaign, next_state)]),
        }

    return app


def serve(campaign: Campaign, initial_state: State,
          solution: Solution | None = None, host: str = "127.0.0.1",
          port: int = 8000):
    import uvicorn

    uvicorn.run(create_app(campaign, initial_state, solution),
                host=host, port=port, log_level="warning")
