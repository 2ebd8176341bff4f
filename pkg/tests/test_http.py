import pytest
from fastapi.testclient import TestClient

from agora.service import DecisionService, create_app

PLL = {
    "title": "lunch",
    "kind": "single",
    "ui_mode": "one_column",
    "alternatives": ["noodles", "tacos", "salad"],
}


@pytest.fixture()
def client(tmp_path):
    service = DecisionService(tmp_path / "log")
    return TestClient(create_app(service))


def rank(*ids):
    return {"ranking": [[i] for i in ids]}


class TestPollEndpoints:
    def test_create_get_close(self, client):
        created = client.post("/polls", json=PLL)
        assert created.status_code == 201
        poll_id = created.json()["id"]
        assert client.get(f"/polls/{poll_id}").json()["title"] == "lunch"
        closed = client.post(f"/polls/{poll_id}/close")
        assert closed.json()["status"] == "closed"

    def test_unknown_poll_404_with_code(self, client):
        response = client.get("/polls/p999")
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "unknown_poll"

    def test_invalid_definition_400(self, client):
        response = client.post("/polls", json={"kind": "single", "alternatives": ["only"]})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "invalid_definition"

    def test_ballot_flow_and_results(self, client):
        poll_id = client.post("/polls", json=PLL).json()["id"]
        for voter, order in (
            ("v1", ("noodles", "tacos", "salad")),
            ("v2", ("noodles", "salad", "tacos")),
            ("v3", ("tacos", "noodles", "salad")),
        ):
            response = client.post(
                f"/polls/{poll_id}/ballots", json={"voter": voter, "payload": rank(*order)}
            )
            assert response.status_code == 201
        results = client.get(f"/polls/{poll_id}/results", params={"seed": 4})
        assert results.status_code == 200
        body = results.json()
        table = {r["rule"]: r["winners"] for r in body["snapshot"]["results_table"]}
        assert table["plurality"] == ["noodles"]
        assert body["digest"]

    def test_ballot_readback(self, client):
        poll_id = client.post("/polls", json=PLL).json()["id"]
        client.post(
            f"/polls/{poll_id}/ballots",
            json={"voter": "v1", "payload": rank("tacos", "noodles", "salad")},
        )
        ballot = client.get(f"/polls/{poll_id}/ballots/v1").json()
        assert ballot["revision"] == 1
        assert ballot["ranking"][0] == ["tacos"]

    def test_closed_poll_conflict(self, client):
        poll_id = client.post("/polls", json=PLL).json()["id"]
        client.post(f"/polls/{poll_id}/close")
        response = client.post(
            f"/polls/{poll_id}/ballots",
            json={"voter": "v1", "payload": rank("tacos", "noodles", "salad")},
        )
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "poll_closed"


class TestMultiPollEndpoints:
    DEFINITION = {
        "kind": "multi_issue",
        "issues": [{"id": "heat"}, {"id": "window"}],
        "config": {
            "issue_order": ["heat", "window"],
            "tie_break": {"heat": "no", "window": "no"},
        },
    }

    def test_advance_and_issue_views(self, client):
        poll_id = client.post("/polls", json=self.DEFINITION).json()["id"]
        client.post(
            f"/polls/{poll_id}/ballots",
            json={"voter": "a", "payload": {"votes": {"heat": "yes", "window": "no"}}},
        )
        decided = client.post(f"/polls/{poll_id}/advance", json={})
        assert decided.status_code == 200
        assert decided.json()["value"] == "yes"
        issue = client.get(f"/polls/{poll_id}/issues/heat").json()
        assert issue["status"] == "decided"
        pending = client.get(f"/polls/{poll_id}/issues/window").json()
        assert pending["status"] == "current"

    def test_missing_votes_conflict_and_force(self, client):
        poll_id = client.post("/polls", json=self.DEFINITION).json()["id"]
        client.post(
            f"/polls/{poll_id}/ballots",
            json={"voter": "a", "payload": {"votes": {"heat": "yes"}}},
        )
        client.post(f"/polls/{poll_id}/advance", json={})
        blocked = client.post(f"/polls/{poll_id}/advance", json={})
        assert blocked.status_code == 409
        assert blocked.json()["error"]["code"] == "missing_votes"
        forced = client.post(f"/polls/{poll_id}/advance", json={"force": True})
        assert forced.status_code == 200
        assert forced.json()["skipped_voters"] == ["a"]


class TestMatchingEndpoints:
    DOC = {
        "schema": [{"name": "gpa", "min": 0, "max": 4}],
        "courses": [
            {"course": "c0", "weights": [1.0], "capacity": 1, "pinned": []},
            {"course": "c1", "weights": [1.0], "capacity": 1, "pinned": []},
        ],
        "students": [
            {"student": "s0", "features": [3.5], "ranking": ["c0", "c1"]},
            {"student": "s1", "features": [3.0], "ranking": ["c0", "c1"]},
        ],
    }

    def test_full_admin_flow(self, client):
        created = client.post("/matchings", json={"instance": self.DOC})
        assert created.status_code == 201
        sid = created.json()["id"]

        run = client.post(f"/matchings/{sid}/run")
        assert run.status_code == 201
        outcome = client.get(f"/matchings/{sid}/outcome").json()
        assert outcome["assignment"] == {"s0": "c0", "s1": "c1"}

        edited = {**self.DOC, "courses": [
            {"course": "c0", "weights": [1.0], "capacity": 1, "pinned": ["s1"]},
            {"course": "c1", "weights": [1.0], "capacity": 1, "pinned": []},
        ]}
        put = client.put(f"/matchings/{sid}/instance", json={"instance": edited})
        assert put.status_code == 200
        rerun = client.post(f"/matchings/{sid}/run").json()
        assert rerun["run_number"] == 2
        assert rerun["assignment"] == {"s1": "c0", "s0": "c1"}
        assert "s1" in rerun["rosters"]["c0"]

        explanation = client.get(f"/matchings/{sid}/explanations/s1").json()
        assert explanation["reasons"][0]["reason"] == "ASSIGNED_HERE"

    def test_outcome_before_run_conflict(self, client):
        sid = client.post("/matchings", json={"instance": self.DOC}).json()["id"]
        response = client.get(f"/matchings/{sid}/outcome")
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "no_runs"

    def test_unknown_student_404(self, client):
        sid = client.post("/matchings", json={"instance": self.DOC}).json()["id"]
        client.post(f"/matchings/{sid}/run")
        response = client.get(f"/matchings/{sid}/explanations/ghost")
        assert response.status_code == 404

    def test_matching_reference_poll(self, client):
        sid = client.post("/matchings", json={"instance": self.DOC}).json()["id"]
        client.post(f"/matchings/{sid}/run")
        poll = client.post(
            "/polls", json={"kind": "matching", "config": {"session_id": sid}}
        )
        assert poll.status_code == 201
        results = client.get(f"/polls/{poll.json()['id']}/results")
        assert results.json()["assignment"] == {"s0": "c0", "s1": "c1"}
