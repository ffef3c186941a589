"""HTTP labeling service.

JSON endpoints under ``/v1`` expose sessions, the per-round labeling
queue and metrics:

* ``POST /v1/sessions`` ``{dataset_dir, config}`` → ``{id}``
* ``GET  /v1/sessions`` → session summaries (for dashboards)
* ``GET  /v1/sessions/{id}`` → status, round and metrics
* ``POST /v1/sessions/{id}/advance`` → runs one round off the request
  path; progress is reported through status polling
* ``GET  /v1/sessions/{id}/queue`` → pairs awaiting a human decision
* ``POST /v1/sessions/{id}/labels`` → ``{accepted, remaining}``;
  draining the queue closes the round automatically
* ``GET  /v1/sessions/{id}/metrics`` → metrics as JSON-lines

Unknown sessions give 404, labels for non-queued pairs 409, malformed
bodies 400.  Each session serializes its mutations behind a lock, and
the full session is written to its checkpoint directory on every state
transition so interrupted labeling sessions survive restarts.  Queue
responses carry record attributes only — never gold labels.
"""

from __future__ import annotations

import secrets
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .data import record_attributes
from .errors import ErloopError, QueueError
from .loop import (
    SessionConfig,
    SessionData,
    SessionState,
    finish_round,
    init_session,
    load_session,
    prepare_data,
    run_round,
    save_session,
    submit_label,
)
from .runconfig import build_run_spec, format_run_spec, merge_values, parse_config_text


class CreateSessionBody(BaseModel):
    dataset_dir: str | None = None
    config: dict[str, Any] = {}


class LabelBody(BaseModel):
    r_id: int
    s_id: int
    label: int


@dataclass
class _Session:
    id: str
    cfg: SessionConfig
    data: SessionData
    state: SessionState
    out_dir: Path
    config_text: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    advancing: bool = False
    phase: str = ""
    error: str | None = None

    def status(self) -> str:
        if self.advancing:
            return self.phase or "training"
        return self.state.status(self.cfg.loop.rounds)

    def save(self) -> None:
        save_session(self.state, self.cfg, self.out_dir, config_text=self.config_text)

    def summary(self) -> dict[str, Any]:
        latest = self.state.history[-1] if self.state.history else None
        return {
            "id": self.id,
            "status": self.status(),
            "round": self.state.round,
            "labeled": self.state.labeled.human_labeled_count(),
            "pending": len(self.state.pending),
            "budget": self.cfg.selection.budget,
            "rounds": self.cfg.loop.rounds,
            "error": self.error,
            "recall_cand": latest.recall_cand if latest else None,
            "f1_test": latest.test.f1 if latest else None,
            "f1_all": latest.all.f1 if latest else None,
        }


def _load_existing(root: Path) -> dict[str, _Session]:
    """Re-register sessions checkpointed under ``root`` by a previous run."""
    sessions: dict[str, _Session] = {}
    if not root.is_dir():
        return sessions
    for child in sorted(root.iterdir()):
        config_file = child / "config.txt"
        if not config_file.is_file():
            continue
        try:
            text = config_file.read_text(encoding="utf-8")
            spec = build_run_spec(parse_config_text(text))
            if spec.data is None:
                continue
            data = prepare_data(spec.data, spec.config.encoder)
            state = load_session(child)
            sessions[child.name] = _Session(
                id=child.name,
                cfg=spec.config,
                data=data,
                state=state,
                out_dir=child,
                config_text=text,
            )
        except (ErloopError, OSError) as exc:
            print(f"skipping session {child.name}: {exc}", file=sys.stderr)
    return sessions


def create_app(sessions_root: str | Path = "erloop-sessions") -> FastAPI:
    root = Path(sessions_root)
    app = FastAPI(title="erloop labeling service")
    sessions: dict[str, _Session] = _load_existing(root)
    registry_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": "malformed request body"})

    def _get(session_id: str) -> _Session:
        sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return sess

    @app.post("/v1/sessions")
    def create_session(body: CreateSessionBody) -> dict[str, str]:
        values = dict(body.config)
        if body.dataset_dir is not None:
            values["data"] = body.dataset_dir
        try:
            spec = build_run_spec(merge_values(values))
            if spec.data is None:
                raise HTTPException(status_code=400, detail="dataset_dir is required")
            data = prepare_data(spec.data, spec.config.encoder)
            state = init_session(data, spec.config)
        except ErloopError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        session_id = secrets.token_hex(8)
        spec.out = str(root / session_id)
        sess = _Session(
            id=session_id,
            cfg=spec.config,
            data=data,
            state=state,
            out_dir=root / session_id,
            config_text=format_run_spec(spec),
        )
        with registry_lock:
            sessions[session_id] = sess
        sess.save()
        return {"id": session_id}

    @app.get("/v1/sessions")
    def list_sessions() -> list[dict[str, Any]]:
        with registry_lock:
            items = list(sessions.values())
        return [sess.summary() for sess in items]

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        sess = _get(session_id)
        out = sess.summary()
        out["metrics"] = [
            {
                "round": rm.round,
                "labeled": rm.labeled,
                "recall_cand": rm.recall_cand,
                "test": {"p": rm.test.precision, "r": rm.test.recall, "f1": rm.test.f1},
                "all": {"p": rm.all.precision, "r": rm.all.recall, "f1": rm.all.f1},
                "times": dict(rm.times),
            }
            for rm in sess.state.history
        ]
        return out

    @app.post("/v1/sessions/{session_id}/advance")
    def advance(session_id: str) -> dict[str, str]:
        sess = _get(session_id)
        status = sess.status()
        if status not in ("idle",):
            raise HTTPException(
                status_code=409, detail=f"session is {status}, cannot advance"
            )
        sess.advancing = True
        sess.phase = "training"
        sess.error = None

        def _run() -> None:
            try:
                with sess.lock:
                    run_round(
                        sess.state,
                        sess.data,
                        sess.cfg,
                        on_phase=lambda phase: setattr(sess, "phase", phase),
                    )
                    sess.save()
            except Exception as exc:  # surfaced via status polling
                sess.error = str(exc)
            finally:
                sess.phase = ""
                sess.advancing = False

        threading.Thread(target=_run, daemon=True).start()
        return {"status": "training"}

    @app.get("/v1/sessions/{session_id}/queue")
    def get_queue(session_id: str) -> list[dict[str, Any]]:
        sess = _get(session_id)
        with sess.lock:
            pending = list(sess.state.pending)
            items = []
            for r_id, s_id in pending:
                items.append(
                    {
                        "pair": [r_id, s_id],
                        "r_attrs": record_attributes(sess.data.store_r.by_id(r_id)),
                        "s_attrs": record_attributes(sess.data.store_s.by_id(s_id)),
                    }
                )
        return items

    @app.post("/v1/sessions/{session_id}/labels")
    def post_labels(session_id: str, body: list[LabelBody]) -> dict[str, int]:
        sess = _get(session_id)
        accepted = 0
        with sess.lock:
            try:
                remaining = len(sess.state.pending)
                for item in body:
                    remaining = submit_label(
                        sess.state, (item.r_id, item.s_id), bool(item.label)
                    )
                    accepted += 1
                if remaining == 0 and sess.state.pending_decisions:
                    finish_round(sess.state, sess.data, sess.cfg)
            except QueueError as exc:
                if accepted:
                    sess.save()
                raise HTTPException(
                    status_code=409, detail=str(exc)
                ) from exc
            sess.save()
        return {"accepted": accepted, "remaining": remaining}

    @app.get("/v1/sessions/{session_id}/metrics")
    def get_metrics(session_id: str) -> PlainTextResponse:
        sess = _get(session_id)
        payload = "".join(rm.to_json() + "\n" for rm in sess.state.history)
        return PlainTextResponse(payload)

    return app
