"""The ask-or-answer loop: confidence-gated system moves, a deterministic
user simulator for batch evaluation, and full-dialogue replay."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus.types import ClaritDialogue
from .metrics import Transcript
from .model.network import Mas2sModel
from .tokenizer import decode, encode_dialogue, encode_knowledge, encode_profile


class SessionTerminal(RuntimeError):
    pass


@dataclass
class EngineConfig:
    tau: float = 0.5          # answer-confidence threshold
    turn_cap: int = 8
    match_threshold: float = 0.5   # simulator token-F1 threshold
    fallback_reply: str = "Irrelevant"
    beam_size: int | None = None   # None: use model config


@dataclass
class SystemMove:
    kind: str                 # "ask" | "answer"
    text: str
    confidence: float


@dataclass
class SessionState:
    session_id: str
    request: str
    profile: list[str]
    knowledge: str
    history: list[tuple[str, str]] = field(default_factory=list)
    status: str = "awaiting_system"
    final_answer: str | None = None
    moves: list[dict] = field(default_factory=list)
    pending_question: str | None = None
    gold: ClaritDialogue | None = None


def _first_step(model: Mas2sModel, session: SessionState, config: EngineConfig):
    d = encode_dialogue(session.request, session.history, model.vocab,
                        model.config.max_len)
    u = encode_profile(session.profile, model.vocab)
    t = encode_knowledge(session.knowledge, model.vocab)
    memory = model.build_memory(d, u, t)
    return memory, model.first_step_distribution(memory)


def answer_confidence(model: Mas2sModel, session: SessionState,
                      config: EngineConfig | None = None) -> float:
    """First-step probability mass over all answer-candidate tokens."""
    config = config or EngineConfig()
    _, p1 = _first_step(model, session, config)
    return float(sum(p1[i] for i in model.vocab.answer_candidates))


def _constrained_answer(model: Mas2sModel, p1: np.ndarray) -> str:
    best = min(model.vocab.answer_candidates, key=lambda i: (-p1[i], i))
    return model.vocab.id_to_token[best]


def system_step(model: Mas2sModel, session: SessionState,
                config: EngineConfig) -> SystemMove:
    """Decide ask-vs-answer and generate the move; updates the session."""
    if session.status != "awaiting_system":
        raise SessionTerminal(f"session is {session.status}")
    model.set_dropout_rng(None)

    memory, p1 = _first_step(model, session, config)
    confidence = float(sum(p1[i] for i in model.vocab.answer_candidates))
    at_cap = len(session.history) >= config.turn_cap

    if confidence >= config.tau or at_cap:
        text = _constrained_answer(model, p1)
        move = SystemMove("answer", text, confidence)
    else:
        result = model.generate(memory, mode="beam", beam_size=config.beam_size)
        if result.is_answer:
            move = SystemMove("answer", model.vocab.id_to_token[result.ids[0]], confidence)
        else:
            text = decode(result.ids, model.vocab)
            if text.strip():
                move = SystemMove("ask", text, confidence)
            else:
                # decoded an empty sequence; asking nothing is useless
                move = SystemMove("answer", _constrained_answer(model, p1), confidence)

    if move.kind == "answer":
        session.status = "answered"
        session.final_answer = move.text
    else:
        session.status = "awaiting_user"
        session.pending_question = move.text
    session.moves.append(
        {"role": "system", "kind": move.kind, "text": move.text,
         "confidence": move.confidence}
    )
    return move


def record_user_reply(session: SessionState, reply: str) -> None:
    if session.status != "awaiting_user":
        raise SessionTerminal(f"session is {session.status}")
    session.history.append((session.pending_question, reply))
    session.pending_question = None
    session.moves.append({"role": "user", "text": reply})
    session.status = "awaiting_system"


def _token_f1(a: str, b: str) -> float:
    ca, cb = Counter(a.lower().split()), Counter(b.lower().split())
    overlap = sum((ca & cb).values())
    if overlap == 0:
        return 0.0
    p = overlap / sum(ca.values())
    r = overlap / sum(cb.values())
    return 2 * p * r / (p + r)


@dataclass
class UserSimulator:
    """Deterministic stand-in for a human: replies from the gold turns."""

    gold: ClaritDialogue
    match_threshold: float = 0.5
    fallback_reply: str = "Irrelevant"
    consumed: set[int] = field(default_factory=set)

    def reply(self, question: str) -> str:
        if not question.strip():
            raise ValueError("empty question")
        best_i, best_f1 = None, 0.0
        for i, (gq, _ga) in enumerate(self.gold.turns):
            if i in self.consumed:
                continue
            f1 = _token_f1(question, gq)
            if f1 > best_f1:
                best_i, best_f1 = i, f1
        if best_i is not None and best_f1 >= self.match_threshold:
            self.consumed.add(best_i)
            return self.gold.turns[best_i][1]
        return self.fallback_reply


def run_dialogue(model: Mas2sModel, gold: ClaritDialogue,
                 config: EngineConfig | None = None,
                 session_id: str = "") -> Transcript:
    """Alternate system moves and simulated user replies until answered."""
    config = config or EngineConfig()
    session = SessionState(
        session_id=session_id or gold.id,
        request=gold.request,
        profile=gold.user_profile,
        knowledge=gold.knowledge,
        gold=gold,
    )
    simulator = UserSimulator(gold, config.match_threshold, config.fallback_reply)
    questions = []
    while session.status != "answered":
        move = system_step(model, session, config)
        if move.kind == "ask":
            questions.append(move.text)
            record_user_reply(session, simulator.reply(move.text))
    return Transcript(
        id=session.session_id,
        predicted_answer=session.final_answer,
        gold_answer=gold.final_answer,
        predicted_k=len(questions),
        gold_k=len(gold.turns),
        predicted_questions=questions,
        gold_questions=[q for q, _ in gold.turns],
        request=gold.request,
        moves=session.moves,
    )


def transcript_json(t: Transcript) -> dict:
    return {
        "id": t.id,
        "moves": t.moves,
        "predicted_k": t.predicted_k,
        "gold_k": t.gold_k,
        "predicted_answer": t.predicted_answer,
        "gold_answer": t.gold_answer,
    }
