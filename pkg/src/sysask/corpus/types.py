"""Dialogue record types and JSONL (de)serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict


class SchemaError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateId(ValueError):
    pass


@dataclass
class SourceDialogue:
    """One task-oriented information-seeking dialogue before profile synthesis."""

    id: str
    knowledge: str
    request: str
    turns: list[tuple[str, str]]
    final_answer: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("empty dialogue id")
        if not self.final_answer:
            raise ValueError(f"{self.id}: empty final_answer")
        for i, (q, a) in enumerate(self.turns):
            if not q or not a:
                raise ValueError(f"{self.id}: empty question/answer at turn {i}")

    @property
    def num_turns(self) -> int:
        return len(self.turns)


@dataclass
class ClaritDialogue:
    """Profile-augmented dialogue: sampled turns rewritten into declaratives."""

    id: str
    request: str
    user_profile: list[str]
    knowledge: str
    turns: list[tuple[str, str]]
    final_answer: str
    removed_indices: list[int] = field(default_factory=list)

    def to_json(self) -> str:
        d = asdict(self)
        d["turns"] = [list(t) for t in self.turns]
        return json.dumps(d, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ClaritDialogue":
        return cls(
            id=d["id"],
            request=d["request"],
            user_profile=list(d["user_profile"]),
            knowledge=d["knowledge"],
            turns=[(q, a) for q, a in d["turns"]],
            final_answer=d["final_answer"],
            removed_indices=list(d.get("removed_indices", [])),
        )


_REQUIRED = ("id", "knowledge", "request", "turns", "final_answer")


def parse_source_line(line: str, lineno: int) -> SourceDialogue:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise SchemaError(lineno, f"invalid JSON: {e}") from e
    if not isinstance(record, dict):
        raise SchemaError(lineno, "record is not a JSON object")
    for key in _REQUIRED:
        if key not in record:
            raise SchemaError(lineno, f"missing field {key!r}")
    turns = record["turns"]
    if not isinstance(turns, list) or any(
        not (isinstance(t, (list, tuple)) and len(t) == 2) for t in turns
    ):
        raise SchemaError(lineno, "turns must be a list of [question, answer] pairs")
    try:
        return SourceDialogue(
            id=str(record["id"]),
            knowledge=str(record["knowledge"]),
            request=str(record["request"]),
            turns=[(str(q), str(a)) for q, a in turns],
            final_answer=str(record["final_answer"]),
        )
    except ValueError as e:
        raise SchemaError(lineno, str(e)) from e
