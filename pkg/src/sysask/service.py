"""HTTP session service over the dialogue engine.

JSON over HTTP, no auth, CORS open: a local research tool backing the
chat UI and scripted clients. Sessions live in memory with an optional
append-only JSONL persistence log; per-session mutation is mutually
exclusive (a concurrent reply to the same session gets 409).
"""

from __future__ import annotations

import json
import secrets
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .corpus.pipeline import load_split
from .engine import EngineConfig, SessionState, SessionTerminal, record_user_reply, system_step
from .model.config import ModelConfig
from .model.network import Mas2sModel
from .numerics.checkpoint import load_params
from .tokenizer import Vocabulary


class SessionStore:
    def __init__(self, persist_path=None):
        self._sessions: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._global = threading.Lock()
        self._persist_path = Path(persist_path) if persist_path else None

    def create(self, session: SessionState) -> None:
        with self._global:
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()

    def get(self, session_id: str) -> SessionState:
        with self._global:
            session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return session

    def lock(self, session_id: str) -> threading.Lock:
        with self._global:
            return self._locks[session_id]

    def persist(self, session: SessionState) -> None:
        if self._persist_path is None:
            return
        entry = {
            "session_id": session.session_id,
            "status": session.status,
            "moves": session.moves,
            "final_answer": session.final_answer,
        }
        with self._global:
            with self._persist_path.open("a") as f:
                f.write(json.dumps(entry) + "\n")


class NewSessionBody(BaseModel):
    request: str | None = None
    profile: list[str] | None = None
    knowledge: str | None = None
    sample_from: str | None = None
    sample_index: int | None = None


class ReplyBody(BaseModel):
    answer: str


def _move_json(move) -> dict:
    return {"kind": move.kind, "text": move.text, "confidence": move.confidence}


def _transcript_json(session: SessionState) -> dict:
    return {
        "id": session.session_id,
        "status": session.status,
        "request": session.request,
        "profile": session.profile,
        "knowledge": session.knowledge,
        "moves": session.moves,
        "predicted_k": sum(1 for m in session.moves
                           if m["role"] == "system" and m["kind"] == "ask"),
        "gold_k": len(session.gold.turns) if session.gold else None,
        "predicted_answer": session.final_answer,
        "gold_answer": session.gold.final_answer if session.gold else None,
    }


def create_app(checkpoint=None, vocab_path=None, model_config_path=None,
               corpus_dir=None, tau: float = 0.5, turn_cap: int = 8,
               persist_path=None, model: Mas2sModel | None = None,
               samples=None) -> FastAPI:
    app = FastAPI(title="sysask dialogue service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    state = {"model": model, "samples": list(samples) if samples else []}
    if model is None and checkpoint and vocab_path:
        vocab = Vocabulary.load(vocab_path)
        config = ModelConfig.load(model_config_path) if model_config_path else ModelConfig()
        state["model"] = Mas2sModel(config, vocab, params=load_params(checkpoint))
    if corpus_dir and not state["samples"]:
        state["samples"] = load_split(corpus_dir, "test")

    store = SessionStore(persist_path)
    engine_config = EngineConfig(tau=tau, turn_cap=turn_cap)
    app.state.store = store
    app.state.engine_config = engine_config

    def _model() -> Mas2sModel:
        if state["model"] is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return state["model"]

    @app.get("/health")
    def health():
        if state["model"] is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return {
            "status": "ok",
            "checkpoint": str(checkpoint) if checkpoint else "in-memory",
            "vocab_size": len(state["model"].vocab),
        }

    @app.get("/samples")
    def list_samples():
        return [
            {"index": i, "request": d.request, "gold_k": len(d.turns)}
            for i, d in enumerate(state["samples"])
        ]

    @app.post("/sessions", status_code=201)
    def new_session(body: NewSessionBody):
        model = _model()
        gold = None
        if body.sample_from == "test":
            if not state["samples"]:
                raise HTTPException(status_code=400, detail="no test corpus loaded")
            idx = body.sample_index if body.sample_index is not None else 0
            if not 0 <= idx < len(state["samples"]):
                raise HTTPException(status_code=400, detail="sample_index out of range")
            gold = state["samples"][idx]
            request, profile, knowledge = gold.request, gold.user_profile, gold.knowledge
        else:
            if not body.request or not body.request.strip():
                raise HTTPException(status_code=400, detail="empty request")
            if body.knowledge is None:
                raise HTTPException(status_code=400, detail="knowledge is required")
            request, profile, knowledge = body.request, body.profile or [], body.knowledge
        session = SessionState(
            session_id=secrets.token_hex(16),
            request=request,
            profile=list(profile),
            knowledge=knowledge,
            gold=gold,
        )
        store.create(session)
        with store.lock(session.session_id):
            move = system_step(model, session, engine_config)
            store.persist(session)
        return {"session_id": session.session_id, "first_move": _move_json(move)}

    @app.post("/sessions/{session_id}/reply")
    def reply(session_id: str, body: ReplyBody):
        model = _model()
        try:
            session = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        lock = store.lock(session_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="concurrent operation in progress")
        try:
            if session.status != "awaiting_user":
                raise HTTPException(status_code=409, detail=f"session is {session.status}")
            try:
                record_user_reply(session, body.answer)
                move = system_step(model, session, engine_config)
            except SessionTerminal as e:
                raise HTTPException(status_code=409, detail=str(e))
            store.persist(session)
            return {"next_move": _move_json(move)}
        finally:
            lock.release()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            session = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        return _transcript_json(session)

    return app
