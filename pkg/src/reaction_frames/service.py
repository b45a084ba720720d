"""HTTP surface for the A/B trust study.

Thin request/response layer over StudyService; all protocol errors map to
standard status codes with a machine-readable ``code`` of PhaseError,
ValidationError or Exhausted.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .study import (
    ExhaustedError,
    PhaseError,
    SamplingConfig,
    StudyError,
    StudyItem,
    StudyService,
    ValidationError,
)

_STATUS = {"PhaseError": 409, "ValidationError": 422, "Exhausted": 409}


class CreateSessionBody(BaseModel):
    rater_id: str
    queue_size: Optional[int] = None
    seed: Optional[int] = None


class PreRatingBody(BaseModel):
    trust: int


class PostRatingBody(BaseModel):
    trust: int
    quality: int
    acceptability: str
    perceived_label: Optional[str] = None


def create_app(
    items: Sequence[StudyItem],
    journal_path: str | Path,
    sampling: SamplingConfig = SamplingConfig(),
) -> FastAPI:
    service = StudyService(items, journal_path)
    app = FastAPI(title="reaction-frames trust study")
    app.state.service = service

    @app.exception_handler(StudyError)
    async def study_error_handler(request: Request, exc: StudyError):
        status = _STATUS.get(exc.code, 400)
        if isinstance(exc, ValidationError) and "unknown session" in str(exc):
            status = 404
        return JSONResponse(status_code=status, content={"code": exc.code, "detail": str(exc)})

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        config = SamplingConfig(
            queue_size=body.queue_size if body.queue_size is not None else sampling.queue_size,
            seed=body.seed if body.seed is not None else sampling.seed,
            judgements_per_item=sampling.judgements_per_item,
        )
        session = service.create_session(body.rater_id, config)
        return {
            "session_id": session.session_id,
            "rater_id": session.rater_id,
            "total": len(session.queue),
        }

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str):
        return service.next_item(session_id)

    @app.post("/sessions/{session_id}/items/{headline_id}/pre")
    def submit_pre(session_id: str, headline_id: str, body: PreRatingBody):
        return service.submit_pre_rating(session_id, headline_id, body.trust)

    @app.post("/sessions/{session_id}/items/{headline_id}/post")
    def submit_post(session_id: str, headline_id: str, body: PostRatingBody):
        service.submit_post_rating(
            session_id,
            headline_id,
            body.trust,
            body.quality,
            body.acceptability,
            perceived_label=body.perceived_label,
        )
        return service.next_item(session_id)

    @app.get("/results")
    def results(model: Optional[str] = None):
        return service.results(model_id=model)

    return app
