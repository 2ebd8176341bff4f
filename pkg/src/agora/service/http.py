"""HTTP/JSON API over the decision service.

Paths are stable and bodies mirror the domain documents; errors come
back as 4xx with ``{"error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .core import DecisionService, ServiceError


def create_app(service: DecisionService) -> FastAPI:
    app = FastAPI(title="agora", version="0.1.0")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def service_error(_request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.post("/polls", status_code=201)
    async def create_poll(definition: dict):
        return service.create_poll(definition)

    @app.get("/polls/{poll_id}")
    async def get_poll(poll_id: str):
        return service.get_poll(poll_id)

    @app.post("/polls/{poll_id}/ballots", status_code=201)
    async def submit_ballot(poll_id: str, body: dict):
        voter = body.get("voter", "")
        payload = body.get("payload", {})
        return service.submit_ballot(poll_id, voter, payload)

    @app.get("/polls/{poll_id}/ballots/{voter}")
    async def get_ballot(poll_id: str, voter: str):
        service.get_poll(poll_id)
        return service.effective_ballot(poll_id, voter)

    @app.post("/polls/{poll_id}/close")
    async def close_poll(poll_id: str):
        return service.close_poll(poll_id)

    @app.get("/polls/{poll_id}/results")
    async def results(poll_id: str, seed: int = 0):
        return service.compute_results(poll_id, seed=seed)

    @app.post("/polls/{poll_id}/advance")
    async def advance(poll_id: str, body: dict | None = None):
        force = bool((body or {}).get("force", False))
        return service.advance_multipoll(poll_id, force=force)

    @app.get("/polls/{poll_id}/issues/{issue_id}")
    async def issue_state(poll_id: str, issue_id: str):
        return service.issue_state(poll_id, issue_id)

    @app.post("/matchings", status_code=201)
    async def create_matching(body: dict):
        return service.create_matching(body.get("instance", body))

    @app.get("/matchings/{session_id}")
    async def get_matching(session_id: str):
        return service.get_session(session_id)

    @app.put("/matchings/{session_id}/instance")
    async def replace_instance(session_id: str, body: dict):
        return service.replace_instance(session_id, body.get("instance", body))

    @app.post("/matchings/{session_id}/run", status_code=201)
    async def run_matching(session_id: str):
        return service.run_matching(session_id)

    @app.get("/matchings/{session_id}/outcome")
    async def latest_outcome(session_id: str):
        return service.latest_outcome(session_id)

    @app.get("/matchings/{session_id}/explanations/{student}")
    async def explanation(session_id: str, student: str, course: str | None = None):
        if course is not None:
            return service.explanation_for_course(session_id, student, course)
        return service.explanation(session_id, student)

    return app
