"""HTTP facade: endpoints, error codes, cross-interface equivalence, races."""

import json
import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from ibig.fmt import sig12
from ibig.kb import load
from ibig.service import create_app
from ibig.session import run_script, start_session

FIXTURES = Path(__file__).parent.parent / "fixtures"


def fixture_kb(name="switching_demo"):
    return load((FIXTURES / f"{name}.ibig.json").read_text(encoding="utf-8"))


@pytest.fixture()
def client():
    return TestClient(create_app(fixture_kb()))


def create_session(client):
    response = client.post("/sessions")
    assert response.status_code == 201
    return response.json()


class TestLifecycle:
    def test_healthz_reports_kb_fingerprint(self, client):
        payload = client.get("/healthz").json()
        assert payload["status"] == "ok"
        assert payload["kb"] == fixture_kb().fingerprint()

    def test_create_returns_first_question(self, client):
        payload = create_session(client)
        assert payload["status"] == "active"
        q = payload["question"]
        assert (q["hierarchy"], q["node"]) == ("lesion", "anterior")
        assert q["items"][0]["id"] == "i1_anterior_sign"
        assert "prompt" in q["items"][0]

    def test_session_ids_are_distinct_and_long(self, client):
        a, b = create_session(client), create_session(client)
        assert a["session_id"] != b["session_id"]
        assert len(a["session_id"]) >= 22  # >= 128 bits of entropy

    def test_zero_item_kb_starts_finished(self):
        kb = fixture_kb()
        kb.items = []
        kb.items_by_id = {}
        client = TestClient(create_app(kb))
        payload = create_session(client)
        assert payload["status"] == "finished" and payload["question"] is None

    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/nope/belief").status_code == 404
        assert (
            client.post("/sessions/nope/answers", json={"item": "x", "value": "present"})
        ).status_code == 404

    def test_expired_session_is_404(self):
        client = TestClient(create_app(fixture_kb(), ttl_seconds=-1))
        sid = create_session(client)["session_id"]
        assert client.get(f"/sessions/{sid}/belief").status_code == 404


class TestAnswers:
    def test_valid_answer_updates_and_masses_sum_to_one(self, client):
        sid = create_session(client)["session_id"]
        response = client.post(
            f"/sessions/{sid}/answers",
            json={"item": "i1_anterior_sign", "value": "present"},
        )
        assert response.status_code == 200
        payload = response.json()
        assert payload["switched"] is False
        for hier in payload["belief"]["hierarchies"]:
            total = sum(row["mass"] for row in hier["rows"])
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_duplicate_answer_conflicts(self, client):
        sid = create_session(client)["session_id"]
        body = {"item": "i1_anterior_sign", "value": "present"}
        assert client.post(f"/sessions/{sid}/answers", json=body).status_code == 200
        assert client.post(f"/sessions/{sid}/answers", json=body).status_code == 409

    def test_unknown_item_and_bad_value_are_422(self, client):
        sid = create_session(client)["session_id"]
        assert (
            client.post(
                f"/sessions/{sid}/answers", json={"item": "ghost", "value": "present"}
            ).status_code
            == 422
        )
        assert (
            client.post(
                f"/sessions/{sid}/answers",
                json={"item": "i1_anterior_sign", "value": "perhaps"},
            ).status_code
            == 422
        )

    def test_switch_is_surfaced(self, client):
        sid = create_session(client)["session_id"]
        client.post(
            f"/sessions/{sid}/answers",
            json={"item": "i1_anterior_sign", "value": "present"},
        )
        payload = client.post(
            f"/sessions/{sid}/answers",
            json={"item": "i2_upper_marker", "value": "absent"},
        ).json()
        assert payload["switched"] is True
        assert payload["question"]["hierarchy"] == "course"

    def test_racing_duplicates_resolve_to_one_winner(self, client):
        sid = create_session(client)["session_id"]
        codes = []
        barrier = threading.Barrier(2)

        def fire():
            barrier.wait()
            response = client.post(
                f"/sessions/{sid}/answers",
                json={"item": "i1_anterior_sign", "value": "present"},
            )
            codes.append(response.status_code)

        threads = [threading.Thread(target=fire) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(codes) == [200, 409]


class TestViews:
    def test_vacuous_belief_has_frame_rows_only(self, client):
        sid = create_session(client)["session_id"]
        payload = client.get(f"/sessions/{sid}/belief").json()
        for hier in payload["hierarchies"]:
            top = hier["rows"][0]
            assert top["frame"] is True and top["belief"] == 1.0
            assert all(row["belief"] == 0.0 for row in hier["rows"][1:])

    def test_increment_totals_equal_contribution_sums(self, client):
        sid = create_session(client)["session_id"]
        payload = client.get(f"/sessions/{sid}/increments").json()
        rows = 0
        for hier in payload["hierarchies"]:
            for row in hier["rows"]:
                rows += 1
                assert row["total"] == pytest.approx(
                    sum(c["value"] for c in row["contributions"]), abs=1e-12
                )
        assert rows > 0

    def test_every_number_has_a_display_twin(self, client):
        sid = create_session(client)["session_id"]
        payload = client.get(f"/sessions/{sid}/belief").json()
        for hier in payload["hierarchies"]:
            for row in hier["rows"]:
                for key in ("mass", "belief", "pot_confirm", "pot_disconfirm"):
                    assert row[f"{key}_str"] == sig12(row[key])


class TestCrossInterface:
    def script(self):
        return json.loads(
            (FIXTURES / "switching_demo.script.json").read_text(encoding="utf-8")
        )

    def test_api_replay_equals_cli_trace(self, client):
        sid = create_session(client)["session_id"]
        for entry in self.script():
            response = client.post(f"/sessions/{sid}/answers", json=entry)
            assert response.status_code == 200
        api_events = client.get(f"/sessions/{sid}/trace").json()["events"]
        reference = run_script(start_session(fixture_kb()), self.script())
        assert api_events == reference.trace

    def test_trace_projects_back_to_a_valid_script(self, client):
        sid = create_session(client)["session_id"]
        for entry in self.script():
            client.post(f"/sessions/{sid}/answers", json=entry)
        events = client.get(f"/sessions/{sid}/trace").json()["events"]
        projected = [
            {"item": e["item"], "value": e["value"]}
            for e in events
            if e["event"] == "answered"
        ]
        assert projected == self.script()
        replay = run_script(start_session(fixture_kb()), projected)
        assert replay.status == "finished"

    def test_service_numbers_are_engine_numbers(self, client):
        # every mass in the belief payload is traceable to the session state
        sid = create_session(client)["session_id"]
        client.post(
            f"/sessions/{sid}/answers",
            json={"item": "i1_anterior_sign", "value": "present"},
        )
        payload = client.get(f"/sessions/{sid}/belief").json()
        reference = start_session(fixture_kb())
        reference.submit_answer("i1_anterior_sign", "present")
        for hier in payload["hierarchies"]:
            state = reference.states[hier["hierarchy"]]
            for row in hier["rows"]:
                assert row["mass"] == state.mass(row["node"])


class TestDegradedService:
    def test_unloadable_kb_yields_503_on_session_creation(self):
        from ibig.kb import Frame, Hierarchy, HierarchyNode, KnowledgeBase

        f1, f2 = Frame("h1", ["a"]), Frame("h2", ["a"])  # disjointness violation
        broken = KnowledgeBase(
            [f1, f2],
            [Hierarchy(f1, [HierarchyNode("r1", 1, None)]),
             Hierarchy(f2, [HierarchyNode("r2", 1, None)])],
            [],
        )
        client = TestClient(create_app(broken))
        assert client.get("/healthz").json()["status"] == "degraded"
        assert client.post("/sessions").status_code == 503

    def test_trace_exposes_fold_order_and_k_values(self, client):
        sid = create_session(client)["session_id"]
        client.post(
            f"/sessions/{sid}/answers",
            json={"item": "i2_upper_marker", "value": "absent"},
        )
        events = client.get(f"/sessions/{sid}/trace").json()["events"]
        answered = next(e for e in events if e["event"] == "answered")
        lesion_history = answered["k_values"]["lesion"]
        assert lesion_history[0] == {"stage": "step2", "node": None, "k": 1.0}
        assert [rec["stage"] for rec in lesion_history[1:]] == ["step3"]
        assert lesion_history[1]["node"] == "ant_upper"
