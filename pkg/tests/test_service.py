import numpy as np
import pytest
from fastapi.testclient import TestClient

from campaign_mpe import core, scenario_io
from campaign_mpe.scenario_io import Solution, scenario_digest
from campaign_mpe.service import create_app


@pytest.fixture(scope="module")
def solved_pair(solved):
    campaign, initial, V, policy, report = solved("campaign06", "avi")
    solution = Solution(values=V, policy=policy, epsilon=report.epsilon,
                        iterations=report.iterations,
                        algorithm=report.algorithm,
                        wallclock=report.wallclock,
                        scenario_digest=scenario_digest(campaign, initial))
    return campaign, initial, solution


@pytest.fixture()
def client(solved_pair):
    campaign, initial, solution = solved_pair
    return TestClient(create_app(campaign, initial, solution))


@pytest.fixture()
def bare_client(solved_pair):
    campaign, initial, _ = solved_pair
    return TestClient(create_app(campaign, initial, None))


def new_session(client, **kwargs):
    r = client.post("/session", json=kwargs)
    assert r.status_code == 200
    return r.json()


class TestStateEndpoint:
    def test_summary_fields(self, client, solved_pair):
        campaign, initial, _ = solved_pair
        doc = client.get("/state").json()
        assert doc["scenario_digest"] == scenario_digest(campaign, initial)
        assert doc["discount"] == campaign.discount
        assert doc["achievable_states"] == campaign.num_achievable
        assert doc["initial_state"] == scenario_io.format_state(initial)
        assert doc["has_solution"] is True
        assert len(doc["objectives"]) == campaign.n_objectives

    def test_no_solution_flag(self, bare_client):
        assert bare_client.get("/state").json()["has_solution"] is False


class TestValueEndpoint:
    def test_values_bit_exact(self, client, solved_pair):
        campaign, initial, solution = solved_pair
        text = scenario_io.format_state(initial)
        doc = client.get(f"/value/{text}").json()
        idx = core.encode_state(campaign, initial)
        assert doc["value"] == float(solution.values[idx])
        assert doc["stage_loss"] == core.stage_loss(campaign, initial)

    def test_strategies_are_distributions(self, client, solved_pair):
        campaign, initial, _ = solved_pair
        text = scenario_io.format_state(initial)
        doc = client.get(f"/value/{text}").json()
        for player in ("player1", "player2"):
            probs = [e["probability"] for e in doc[player]["strategy"]]
            assert all(p > 0 for p in probs)
            assert abs(sum(probs) - 1.0) < 1e-9

    def test_malformed_state_404(self, client):
        r = client.get("/value/31")
        assert r.status_code == 404
        assert r.json()["code"] == "bad-state"

    def test_unachievable_state_404(self, client):
        # axis 1 covers objectives 2..5; a hole behind the front is rejected
        r = client.get("/value/112111")
        assert r.status_code == 404
        assert r.json()["code"] == "unachievable-state"

    def test_without_solution_409(self, bare_client, solved_pair):
        _, initial, _ = solved_pair
        r = bare_client.get(f"/value/{scenario_io.format_state(initial)}")
        assert r.status_code == 409
        assert r.json()["code"] == "no-solution"


class TestSessions:
    def test_create_defaults(self, client, solved_pair):
        campaign, initial, solution = solved_pair
        doc = new_session(client, seed=1)
        assert doc["human_player"] == 1
        assert doc["stage"] == 0
        assert doc["accumulated_discounted_loss"] == 0.0
        assert doc["board"]["state"] == scenario_io.format_state(initial)
        idx = core.encode_state(campaign, initial)
        assert doc["value"] == float(solution.values[idx])

    def test_board_geometry(self, client, solved_pair):
        campaign, initial, _ = solved_pair
        doc = new_session(client, seed=1)
        lanes = doc["board"]["lanes"]
        assert [lane["axis"] for lane in lanes] == [a.id for a in campaign.axes]
        for lane in lanes:
            axis = campaign.axes[lane["axis"]]
            assert [o["id"] for o in lane["objectives"]] == list(axis.objectives)
            for o in lane["objectives"]:
                assert o["owner"] == initial[o["id"]]
                # a front objective always sits on an open line of control
                if o["front_p1"]:
                    assert o["open_loc_p1"]
                if o["front_p2"]:
                    assert o["open_loc_p2"]

    def test_unknown_session_404(self, client):
        r = client.get("/session/deadbeef")
        assert r.status_code == 404
        assert r.json()["code"] == "unknown-session"

    def test_bad_player_rejected(self, client):
        r = client.post("/session", json={"human_player": 3})
        assert r.status_code == 422

    def test_requires_solution(self, bare_client):
        r = bare_client.post("/session", json={})
        assert r.status_code == 409

    def test_hint_matches_equilibrium(self, client, solved_pair):
        campaign, initial, solution = solved_pair
        doc = new_session(client, human_player=2, seed=9)
        hint = client.post(f"/session/{doc['session']}/hint").json()
        idx = core.encode_state(campaign, initial)
        strat = solution.policy.strategies[2][idx]
        probs = [e["probability"] for e in hint["strategy"]]
        assert abs(sum(probs) - 1.0) < 1e-9
        assert probs == [float(p) for p in strat[np.nonzero(strat)[0]]]


class TestActions:
    def test_idle_action_accrues_loss(self, client, solved_pair):
        campaign, initial, _ = solved_pair
        doc = new_session(client, seed=3)
        r = client.post(f"/session/{doc['session']}/action",
                        json={"orders": []})
        assert r.status_code == 200
        body = r.json()
        assert body["stage"] == 1
        assert body["stage_loss"] == core.stage_loss(campaign, initial)
        assert body["accumulated_discounted_loss"] == body["stage_loss"]

    def test_legal_attack_reports_battle(self, client, solved_pair):
        campaign, initial, _ = solved_pair
        doc = new_session(client, seed=3)
        # find an attackable objective for Player 1 at the initial state
        acts = core.feasible_actions_full(campaign, initial, 1)
        attack = next(a for a in acts
                      if any(o.kind is core.OrderKind.ATTACK for o in a.orders))
        orders = [{"commander": c, "kind": o.kind.value, "target": o.target}
                  for c, o in enumerate(attack.orders)
                  if o.kind is not core.OrderKind.NONE]
        r = client.post(f"/session/{doc['session']}/action",
                        json={"orders": orders})
        assert r.status_code == 200
        body = r.json()
        mine = [b for b in body["battle_results"] if b["attacker"] == 1]
        assert len(mine) == len(orders)
        for battle in mine:
            assert battle["outcome"] in ("flipped", "retained")
            flipped = (body["next_state"][battle["objective"]]
                       != scenario_io.format_state(initial)[battle["objective"]])
            assert flipped == (battle["outcome"] == "flipped")

    def test_illegal_order_rejected_state_unchanged(self, client, solved_pair):
        campaign, initial, _ = solved_pair
        doc = new_session(client, seed=3)
        sid = doc["session"]
        # objective 5 is deep behind Player 2's front at the initial state:
        # not on Player 1's open line of control
        bad_target = max(o for o in range(campaign.n_objectives)
                         if o not in core.open_loc(campaign, initial, 1))
        r = client.post(f"/session/{sid}/action", json={"orders": [
            {"commander": 0, "kind": "atk", "target": bad_target}]})
        assert r.status_code == 422
        body = r.json()
        assert body["code"] == "infeasible-order"
        assert body["constraint"]
        after = client.get(f"/session/{sid}").json()
        assert after["stage"] == 0
        assert after["board"]["state"] == scenario_io.format_state(initial)
        assert after["history"] == []

    def test_two_orders_same_commander_rejected(self, client):
        doc = new_session(client, seed=3)
        r = client.post(f"/session/{doc['session']}/action", json={"orders": [
            {"commander": 0, "kind": "rfc", "target": 0},
            {"commander": 0, "kind": "rfc", "target": 2}]})
        assert r.status_code == 422
        assert "two orders" in r.json()["message"]

    def test_same_seed_replay_identical(self, client):
        streams = []
        for _ in range(2):
            doc = new_session(client, seed=77)
            sid = doc["session"]
            outcomes = []
            for _ in range(12):
                r = client.post(f"/session/{sid}/action", json={"orders": []})
                assert r.status_code == 200
                body = r.json()
                outcomes.append((body["next_state"], body["opponent_action"],
                                 body["accumulated_discounted_loss"]))
            streams.append(outcomes)
        assert streams[0] == streams[1]

    def test_different_seeds_diverge(self, client):
        def stream(seed):
            doc = new_session(client, seed=seed)
            return [client.post(f"/session/{doc['session']}/action",
                                json={"orders": []}).json()["next_state"]
                    for _ in range(15)]
        assert any(stream(1)[t] != stream(2)[t] for t in range(15))

    def test_accumulated_loss_recomputable_from_history(self, client, solved_pair):
        campaign, _, _ = solved_pair
        doc = new_session(client, seed=5)
        sid = doc["session"]
        for _ in range(10):
            client.post(f"/session/{sid}/action", json={"orders": []})
        view = client.get(f"/session/{sid}").json()
        expected = sum(campaign.discount ** h["stage"] * h["stage_loss"]
                       for h in view["history"])
        assert abs(view["accumulated_discounted_loss"] - expected) < 1e-12
        assert [h["stage"] for h in view["history"]] == list(range(10))
        for prev, nxt in zip(view["history"], view["history"][1:]):
            assert prev["next_state"] == nxt["state"]

    def test_human_as_player_two(self, client, solved_pair):
        campaign, initial, _ = solved_pair
        doc = new_session(client, human_player=2, seed=11)
        acts = core.feasible_actions_full(campaign, initial, 2)
        attack = next(a for a in acts
                      if any(o.kind is core.OrderKind.ATTACK for o in a.orders))
        orders = [{"commander": c, "kind": o.kind.value, "target": o.target}
                  for c, o in enumerate(attack.orders)
                  if o.kind is not core.OrderKind.NONE]
        r = client.post(f"/session/{doc['session']}/action",
                        json={"orders": orders})
        assert r.status_code == 200
        assert any(b["attacker"] == 2 for b in r.json()["battle_results"])
