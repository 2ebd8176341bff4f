#!/usr/bin/env python3
"""Regenerate frontend test fixtures by driving the real service.

Every JSON file under frontend/tests/fixtures/ is a literal wire body
captured from the HTTP app, so frontend tests assert against
service-verified responses.  Run from the repository root:

    python3 frontend/scripts/generate_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from agora.service import DecisionService, create_app

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"

MATCHING_INSTANCE = {
    "schema": [
        {"name": "gpa", "min": 0, "max": 4},
        {"name": "experience", "min": 0, "max": 10},
    ],
    "courses": [
        {"course": "algorithms", "weights": [1.0, 0.0], "capacity": 1, "pinned": []},
        {"course": "compilers", "weights": [0.3, 1.0], "capacity": 1, "pinned": []},
    ],
    "students": [
        {"student": "ada", "features": [3.9, 2.0], "ranking": ["algorithms", "compilers"]},
        {"student": "bob", "features": [3.1, 8.0], "ranking": ["algorithms", "compilers"]},
        {"student": "cyd", "features": [2.0, 1.0], "ranking": ["algorithms"]},
    ],
}

FRUIT_BALLOTS = [
    ["cherry", "apple", "banana"],
    ["cherry", "apple", "banana"],
    ["cherry", "apple", "banana"],
    ["apple", "banana", "cherry"],
    ["apple", "banana", "cherry"],
    ["banana", "apple", "cherry"],
    ["banana", "apple", "cherry"],
]


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        client = TestClient(create_app(DecisionService(tmp)))

        poll = client.post(
            "/polls",
            json={
                "kind": "single",
                "title": "fruit snack",
                "ui_mode": "one_column",
                "alternatives": ["apple", "banana", "cherry"],
            },
        ).json()
        for i, order in enumerate(FRUIT_BALLOTS):
            client.post(
                f"/polls/{poll['id']}/ballots",
                json={"voter": f"v{i}", "payload": {"ranking": [[x] for x in order]}},
            ).raise_for_status()
        results = client.get(f"/polls/{poll['id']}/results", params={"seed": 7}).json()
        (FIXTURES / "results_snapshot.json").write_text(
            json.dumps(results, indent=2, sort_keys=True) + "\n"
        )

        session = client.post("/matchings", json={"instance": MATCHING_INSTANCE}).json()
        (FIXTURES / "matching_session.json").write_text(
            json.dumps(session, indent=2, sort_keys=True) + "\n"
        )
        run1 = client.post(f"/matchings/{session['id']}/run").json()
        (FIXTURES / "matching_run1.json").write_text(
            json.dumps(run1, indent=2, sort_keys=True) + "\n"
        )

        pinned = json.loads(json.dumps(MATCHING_INSTANCE))
        pinned["courses"][1]["pinned"] = ["ada"]  # admin drags ada onto compilers
        client.put(
            f"/matchings/{session['id']}/instance", json={"instance": pinned}
        ).raise_for_status()
        run2 = client.post(f"/matchings/{session['id']}/run").json()
        (FIXTURES / "matching_instance_pinned.json").write_text(
            json.dumps(pinned, indent=2, sort_keys=True) + "\n"
        )
        (FIXTURES / "matching_run2.json").write_text(
            json.dumps(run2, indent=2, sort_keys=True) + "\n"
        )
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
