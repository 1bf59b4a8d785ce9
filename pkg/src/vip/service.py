"""HTTP session service for interactive pursuit.

Sessions live in memory; each holds the masked history of one pursuit run
and mirrors exactly what run_pursuit would do with the same answers, so
API-driven and batch trajectories are interchangeable.
"""
from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import IllegalRawValue
from .networks import ClassifierNet, QuerierNet, classifier_posterior, load_checkpoint
from .pursuit import StoppingRule, StopTracker, Strategy, next_query
from .queries import (History, Posterior, QuerySet, StopReason, append_answer,
                      encode_answer)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class LoadedCheckpoint:
    name: str
    classifier: ClassifierNet
    querier: QuerierNet
    query_set: QuerySet
    label_names: list[str]


@dataclass
class Session:
    id: str
    checkpoint: LoadedCheckpoint
    rule: StoppingRule
    history: History
    posteriors: list[list[float]]
    tracker: StopTracker
    proposed_query: int | None
    status: str = "AwaitingAnswer"
    prediction: int | None = None
    stop_reason: str | None = None
    created_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _parse_rule(doc) -> StoppingRule:
    try:
        if isinstance(doc, str):
            return StoppingRule.parse(doc)
        kind = doc["kind"]
        if kind == "map":
            return StoppingRule.map(float(doc["epsilon"]))
        if kind == "stability":
            return StoppingRule.stability(float(doc["epsilon"]),
                                          int(doc.get("patience", 1)))
        if kind in ("budget", "fixed_budget"):
            return StoppingRule.fixed_budget(int(doc["max_queries"]))
        raise ValueError(f"unknown stopping rule kind {kind!r}")
    except (KeyError, ValueError, TypeError) as exc:
        raise ApiError(400, "InvalidStoppingRule", str(exc)) from None


class CreateSessionRequest(BaseModel):
    checkpoint: str
    stop: str | dict


class AnswerRequest(BaseModel):
    query_id: int
    value: float | int | str


def _posterior_for(ckpt: LoadedCheckpoint, history: History) -> np.ndarray:
    return classifier_posterior(ckpt.classifier, history.values[None, :])[0]


def _snapshot(session: Session) -> dict:
    ckpt = session.checkpoint
    doc = {
        "session_id": session.id,
        "checkpoint": ckpt.name,
        "status": session.status,
        "posterior": session.posteriors[-1],
        "posterior_history": session.posteriors,
        "labels": ckpt.label_names,
        "steps": [
            {"query_id": q, "query": ckpt.query_set.queries[q].name,
             "answer": float(session.history.values[q])}
            for q in session.history.order
        ],
    }
    if session.status == "AwaitingAnswer":
        q = session.proposed_query
        doc["proposed_query"] = {
            "id": q,
            "name": ckpt.query_set.queries[q].name,
            "domain": ckpt.query_set.queries[q].answer_domain.value,
        }
    else:
        doc["prediction"] = ckpt.label_names[session.prediction]
        doc["stop_reason"] = session.stop_reason
    return doc


def create_app(checkpoints: dict[str, LoadedCheckpoint],
               static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="vip session service")
    sessions: dict[str, Session] = {}

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.code, "message": exc.message})

    def get_ckpt(name: str) -> LoadedCheckpoint:
        if name not in checkpoints:
            raise ApiError(404, "UnknownCheckpoint",
                           f"no checkpoint named {name!r}")
        return checkpoints[name]

    def get_session(session_id: str) -> Session:
        if session_id not in sessions:
            raise ApiError(404, "UnknownSession",
                           f"no session {session_id!r}")
        return sessions[session_id]

    @app.get("/v1/checkpoints")
    def list_checkpoints():
        return {
            "checkpoints": [
                {"name": c.name,
                 "num_queries": c.query_set.size,
                 "queries": c.query_set.names(),
                 "labels": c.label_names}
                for c in checkpoints.values()
            ]
        }

    @app.post("/v1/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        ckpt = get_ckpt(req.checkpoint)
        rule = _parse_rule(req.stop)
        history = History.empty(ckpt.query_set.size)
        prior = _posterior_for(ckpt, history)
        session = Session(
            id=uuid.uuid4().hex,
            checkpoint=ckpt,
            rule=rule,
            history=history,
            posteriors=[prior.tolist()],
            tracker=StopTracker(rule, Posterior(prior)),
            proposed_query=next_query(Strategy.learned(ckpt.querier), history),
        )
        sessions[session.id] = session
        return _snapshot(session)

    @app.post("/v1/sessions/{session_id}/answers")
    def submit_answer(session_id: str, req: AnswerRequest):
        session = get_session(session_id)
        with session.lock:
            if session.status == "Stopped":
                raise ApiError(410, "SessionStopped",
                               "session already reached a prediction")
            if req.query_id != session.proposed_query:
                raise ApiError(409, "WrongQuery",
                               f"expected an answer to query "
                               f"{session.proposed_query}, got {req.query_id}")
            ckpt = session.checkpoint
            spec = ckpt.query_set.queries[req.query_id]
            try:
                encoded = encode_answer(req.value, spec)
            except IllegalRawValue as exc:
                raise ApiError(422, "IllegalAnswerValue", str(exc)) from None
            session.history = append_answer(session.history, req.query_id,
                                            encoded)
            probs = _posterior_for(ckpt, session.history)
            session.posteriors.append(probs.tolist())
            posterior = Posterior(probs)
            reason = session.tracker.update(posterior)
            if reason is None and len(session.history) >= ckpt.query_set.size:
                reason = StopReason.QUERIES_EXHAUSTED
            if reason is not None:
                session.status = "Stopped"
                session.prediction = posterior.argmax()
                session.stop_reason = reason.value
                session.proposed_query = None
            else:
                session.proposed_query = next_query(
                    Strategy.learned(ckpt.querier), session.history)
            return _snapshot(session)

    @app.get("/v1/sessions/{session_id}")
    def get_session_state(session_id: str):
        return _snapshot(get_session(session_id))

    @app.delete("/v1/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        get_session(session_id)
        del sessions[session_id]
        return Response(status_code=204)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")
    return app


def load_checkpoint_file(path) -> LoadedCheckpoint:
    data = Path(path).read_bytes()
    classifier, querier, header = load_checkpoint(data)
    return LoadedCheckpoint(
        name=Path(path).stem,
        classifier=classifier,
        querier=querier,
        query_set=QuerySet.from_json(header["query_set"]),
        label_names=list(header["labels"]),
    )
