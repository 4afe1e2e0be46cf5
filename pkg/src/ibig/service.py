"""Session-oriented HTTP JSON facade over the consultation engine.

One knowledge base per server process; sessions live in memory, expire after
an idle TTL, and are serialized per session so racing duplicate answers
resolve to exactly one winner.  Every number a client may display is also
delivered as a pre-formatted string; the service itself never computes
anything beyond what the session module exposes.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .errors import DuplicateAnswerError, SessionError, SessionFinishedError
from .kb import KnowledgeBase, validate
from .session import ANSWER_VALUES, Session, start_session
from .views import increments_payload, question_payload, report_payload

DEFAULT_TTL_SECONDS = 24 * 3600


class AnswerBody(BaseModel):
    item: str
    value: str


@dataclass
class StoredSession:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.ttl = ttl_seconds
        self._lock = threading.Lock()
        self._sessions: dict[str, StoredSession] = {}

    def create(self, session: Session) -> str:
        session_id = secrets.token_urlsafe(24)  # 192 bits of entropy
        with self._lock:
            self._evict_expired()
            self._sessions[session_id] = StoredSession(session=session)
        return session_id

    def get(self, session_id: str) -> StoredSession:
        with self._lock:
            stored = self._sessions.get(session_id)
            if stored is None or time.time() - stored.updated > self.ttl:
                self._sessions.pop(session_id, None)
                raise HTTPException(status_code=404, detail="unknown session")
            return stored

    def _evict_expired(self):
        now = time.time()
        for sid in [s for s, st in self._sessions.items() if now - st.updated > self.ttl]:
            del self._sessions[sid]


def create_app(
    kb: KnowledgeBase | None,
    cors_origin: str | None = None,
    ttl_seconds: float = DEFAULT_TTL_SECONDS,
    ui_dir=None,
) -> FastAPI:
    app = FastAPI(title="ibig consultation service")
    store = SessionStore(ttl_seconds=ttl_seconds)
    usable = kb is not None and validate(kb).ok
    fingerprint = kb.fingerprint() if usable else None

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.get("/healthz")
    def healthz():
        if not usable:
            return {"status": "degraded", "kb": None}
        return {"status": "ok", "kb": fingerprint}

    @app.post("/sessions", status_code=201)
    def create_session():
        if not usable:
            raise HTTPException(503, detail="knowledge base failed to load")
        session = start_session(kb)
        session_id = store.create(session)
        return {
            "session_id": session_id,
            "kb": fingerprint,
            "status": session.status,
            "question": question_payload(session),
        }

    @app.post("/sessions/{session_id}/answers")
    def submit_answer(session_id: str, body: AnswerBody):
        stored = store.get(session_id)
        if body.value not in ANSWER_VALUES:
            raise HTTPException(422, detail=f"value must be one of {ANSWER_VALUES}")
        with stored.lock:
            session = stored.session
            before = session.selected
            try:
                session.submit_answer(body.item, body.value)
            except DuplicateAnswerError as exc:
                raise HTTPException(409, detail=str(exc)) from None
            except SessionFinishedError as exc:
                raise HTTPException(409, detail=str(exc)) from None
            except SessionError as exc:
                raise HTTPException(422, detail=str(exc)) from None
            stored.updated = time.time()
            after = session.selected
            switched = (
                before is not None and after is not None and before[0] != after[0]
            )
            return {
                "status": session.status,
                "switched": switched,
                "question": question_payload(session),
                "belief": report_payload(session),
            }

    @app.get("/sessions/{session_id}/belief")
    def belief_view(session_id: str):
        stored = store.get(session_id)
        with stored.lock:
            return report_payload(stored.session)

    @app.get("/sessions/{session_id}/increments")
    def increments_view(session_id: str):
        stored = store.get(session_id)
        with stored.lock:
            return increments_payload(stored.session)

    @app.get("/sessions/{session_id}/trace")
    def trace_view(session_id: str):
        stored = store.get(session_id)
        with stored.lock:
            return {"events": list(stored.session.trace)}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
