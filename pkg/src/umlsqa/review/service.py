"""HTTP API for the blind-review workbench.

Reviewer endpoints authenticate with an ``X-Review-Token`` header; the
token is the locally issued reviewer identity (no accounts). The
aggregate summary requires the separate admin token. Every
reviewer-facing payload is built from ``BlindedPair.reviewer_payload``,
so assignments and system identifiers never leave the server.

The service can also serve the compiled review UI as static assets.
"""

from __future__ import annotations

import logging
import secrets
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import NotFoundError, ValidationError
from .aggregate import compute_win_rates
from .blinding import Judgment
from .store import ReviewStore

logger = logging.getLogger(__name__)


class JudgmentIn(BaseModel):
    question_id: str
    verdicts: dict[str, str]


def create_app(
    store: ReviewStore,
    admin_token: str | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="blind review service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.admin_token = admin_token or secrets.token_urlsafe(16)
    if admin_token is None:
        logger.info("generated admin token: %s", app.state.admin_token)

    def reviewer(x_review_token: str | None = Header(default=None)) -> str:
        if not x_review_token or not x_review_token.strip():
            raise HTTPException(status_code=401, detail="missing X-Review-Token header")
        return x_review_token.strip()

    def admin(x_admin_token: str | None = Header(default=None)) -> None:
        if x_admin_token != app.state.admin_token:
            raise HTTPException(status_code=403, detail="admin token required")

    @app.get("/api/session")
    def session(token: str = Depends(reviewer)):
        return {"pending": store.pending(token), "progress": store.progress(token)}

    @app.get("/api/pairs/{question_id}")
    def pair(question_id: str, token: str = Depends(reviewer)):
        try:
            return store.pair(question_id).reviewer_payload()
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post("/api/judgments")
    def submit(body: JudgmentIn, token: str = Depends(reviewer)):
        try:
            judgment = Judgment.from_wire(token, body.question_id, body.verdicts)
            ack = store.record_judgment(judgment)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {
            "status": "stored",
            "replaced": ack["replaced"],
            "progress": store.progress(token),
        }

    @app.get("/api/progress")
    def progress(token: str = Depends(reviewer)):
        return store.progress(token)

    @app.get("/api/summary")
    def summary(_: None = Depends(admin)):
        judgments = store.judgments()
        if not judgments:
            return {"status": "insufficient_data", "judged_questions": 0}
        rates = compute_win_rates(judgments, store.assignments())
        return {"status": "ok", **rates.to_dict()}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
