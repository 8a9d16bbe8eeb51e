"""Word-level vocabulary and the token layouts consumed by the model.

Three layouts are produced:

* dialogue:  [CLS] request (N) [SEP] flattened QA history (M) [CLS]
* profile:   [CLS] profile tokens (N_u) [CLS]
* knowledge: [CLS] knowledge tokens (N_t) [CLS]

Distinct final answers are registered as single vocabulary entries
("answer candidates") even when multi-word, so the decoder can emit a
complete answer in one step.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

CLS, SEP, PAD, UNK = 0, 1, 2, 3
SPECIAL_TOKENS = ("[CLS]", "[SEP]", "[PAD]", "[UNK]")

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class EmptyCorpus(ValueError):
    pass


class UnknownId(KeyError):
    pass


def tokenize(text: str) -> list[str]:
    """Split into word and punctuation tokens."""
    return _TOKEN_RE.findall(text)


@dataclass
class Vocabulary:
    token_to_id: dict[str, int]
    id_to_token: dict[int, str]
    answer_candidates: set[int] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.token_to_id)

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, UNK)

    def encode_text(self, text: str) -> list[int]:
        return [self.id_of(t) for t in tokenize(text)]

    def candidate_id(self, answer: str) -> int | None:
        i = self.token_to_id.get(answer)
        return i if i in self.answer_candidates else None

    def save(self, path) -> None:
        payload = {
            "specials": list(SPECIAL_TOKENS),
            "tokens": [self.id_to_token[i] for i in range(len(self.id_to_token))],
            "answer_candidates": sorted(self.answer_candidates),
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False))

    @classmethod
    def load(cls, path) -> "Vocabulary":
        payload = json.loads(Path(path).read_text())
        tokens = payload["tokens"]
        token_to_id = {t: i for i, t in enumerate(tokens)}
        return cls(
            token_to_id=token_to_id,
            id_to_token=dict(enumerate(tokens)),
            answer_candidates=set(payload["answer_candidates"]),
        )


@dataclass
class EncodedSequence:
    ids: list[int]
    request_len: int = 0    # N
    history_len: int = 0    # M
    body_len: int = 0       # N_u or N_t for single-segment layouts


def build_vocab(dialogues, min_freq: int = 1) -> Vocabulary:
    """Build a vocabulary over requests, profiles, knowledge, turns, answers.

    Id assignment is deterministic: specials, then answer candidates
    (lexicographic), then tokens by frequency descending with lexicographic
    tie-break. All distinct final answers become candidates regardless of
    frequency.
    """
    dialogues = list(dialogues)
    if not dialogues:
        raise EmptyCorpus("no dialogues to build a vocabulary from")

    counts: Counter[str] = Counter()
    answers: set[str] = set()
    for d in dialogues:
        counts.update(tokenize(d.request))
        counts.update(tokenize(d.knowledge))
        for sentence in getattr(d, "user_profile", []):
            counts.update(tokenize(sentence))
        for q, a in d.turns:
            counts.update(tokenize(q))
            counts.update(tokenize(a))
        answers.add(d.final_answer)

    token_to_id = {t: i for i, t in enumerate(SPECIAL_TOKENS)}
    candidates = set()
    for ans in sorted(answers):
        if ans not in token_to_id:
            token_to_id[ans] = len(token_to_id)
        candidates.add(token_to_id[ans])
    for token, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if counts[token] >= min_freq and token not in token_to_id:
            token_to_id[token] = len(token_to_id)

    return Vocabulary(
        token_to_id=token_to_id,
        id_to_token={i: t for t, i in token_to_id.items()},
        answer_candidates=candidates,
    )


def encode_dialogue(request: str, history, vocab: Vocabulary,
                    max_len: int = 512) -> EncodedSequence:
    """[CLS] request [SEP] history [CLS]; history truncated from the left."""
    req_ids = vocab.encode_text(request)
    hist_ids: list[int] = []
    for q, a in history:
        hist_ids.extend(vocab.encode_text(q))
        hist_ids.extend(vocab.encode_text(a))
    budget = max_len - len(req_ids) - 3
    if budget < 0:
        req_ids = req_ids[: max_len - 3]
        budget = 0
    if len(hist_ids) > budget:
        hist_ids = hist_ids[len(hist_ids) - budget:]
    ids = [CLS] + req_ids + [SEP] + hist_ids + [CLS]
    return EncodedSequence(ids=ids, request_len=len(req_ids), history_len=len(hist_ids))


def encode_profile(profile_sentences, vocab: Vocabulary) -> EncodedSequence:
    """[CLS] profile tokens [CLS]; sentences joined with single spaces."""
    ids = vocab.encode_text(" ".join(profile_sentences))
    return EncodedSequence(ids=[CLS] + ids + [CLS], body_len=len(ids))


def encode_knowledge(knowledge: str, vocab: Vocabulary) -> EncodedSequence:
    ids = vocab.encode_text(knowledge)
    return EncodedSequence(ids=[CLS] + ids + [CLS], body_len=len(ids))


def decode(ids, vocab: Vocabulary) -> str:
    """Drop specials, space-join tokens; candidate ids render full answers."""
    words = []
    for i in ids:
        if i in (CLS, SEP, PAD):
            continue
        if i not in vocab.id_to_token:
            raise UnknownId(i)
        words.append(vocab.id_to_token[i])
    return " ".join(words)
