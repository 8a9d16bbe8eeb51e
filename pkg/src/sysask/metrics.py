"""Automatic evaluation: BLEU, ROUGE, Success, question-count statistics,
and stratified breakdowns."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field


class EmptySet(ValueError):
    pass


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: list[str], reference: list[str], n: int = 4) -> float:
    """Clipped n-gram precision, geometric mean over orders 1..n, times the
    brevity penalty exp(min(0, 1 - |ref|/|cand|)). Add-one smoothing on
    zero counts for orders >= 2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not candidate:
        return 0.0
    log_sum = 0.0
    for order in range(1, n + 1):
        cand = _ngrams(candidate, order)
        ref = _ngrams(reference, order)
        matched = sum(min(c, ref[g]) for g, c in cand.items())
        total = max(sum(cand.values()), 1)
        if matched == 0 and order >= 2:
            matched, total = 1, total + 1
        if matched == 0:
            return 0.0
        log_sum += (1.0 / n) * math.log(matched / total)
    bp = math.exp(min(0.0, 1.0 - len(reference) / len(candidate)))
    return bp * math.exp(log_sum)


def _lcs_len(a, b):
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge(candidate: list[str], reference: list[str], variant="L") -> float:
    """F1 of n-gram overlap (variant 1 or 2) or LCS (variant "L")."""
    if variant == "L":
        if not candidate or not reference:
            return 0.0
        lcs = _lcs_len(candidate, reference)
        matched, cand_total, ref_total = lcs, len(candidate), len(reference)
    else:
        n = int(variant)
        cand = _ngrams(candidate, n)
        ref = _ngrams(reference, n)
        matched = sum(min(c, ref[g]) for g, c in cand.items())
        cand_total = sum(cand.values())
        ref_total = sum(ref.values())
    if matched == 0 or not cand_total or not ref_total:
        return 0.0
    p = matched / cand_total
    r = matched / ref_total
    return 2 * p * r / (p + r)


def _normalize(text: str | None) -> str:
    return re.sub(r"\s+", " ", text.strip()) if text else ""


@dataclass
class Transcript:
    """Minimal evaluation view of one finished dialogue session."""
    id: str
    predicted_answer: str | None
    gold_answer: str
    predicted_k: int
    gold_k: int
    predicted_questions: list[str] = field(default_factory=list)
    gold_questions: list[str] = field(default_factory=list)
    request: str = ""
    moves: list[dict] = field(default_factory=list)


def success(transcripts: list[Transcript]) -> float:
    """Fraction of transcripts whose final answer exactly matches gold
    (whitespace-normalized); a missing final answer counts as failure."""
    if not transcripts:
        raise EmptySet("no transcripts")
    hits = sum(
        1 for t in transcripts
        if t.predicted_answer is not None
        and _normalize(t.predicted_answer) == _normalize(t.gold_answer)
    )
    return hits / len(transcripts)


def noq_absdiff(transcripts: list[Transcript]) -> tuple[float, float]:
    if not transcripts:
        raise EmptySet("no transcripts")
    noq = sum(t.predicted_k for t in transcripts) / len(transcripts)
    absdiff = sum(abs(t.predicted_k - t.gold_k) for t in transcripts) / len(transcripts)
    return noq, absdiff


def question_bleu(transcripts: list[Transcript], n: int = 1) -> float:
    """Mean BLEU-n over question turns aligned by turn index; extra
    unaligned turns score 0 against the empty reference."""
    scores = []
    for t in transcripts:
        turns = max(len(t.predicted_questions), len(t.gold_questions))
        for i in range(turns):
            cand = t.predicted_questions[i].split() if i < len(t.predicted_questions) else []
            ref = t.gold_questions[i].split() if i < len(t.gold_questions) else []
            scores.append(bleu(cand, ref, n) if ref or cand else 1.0)
    return sum(scores) / len(scores) if scores else 0.0


def question_rouge(transcripts: list[Transcript], variant="L") -> float:
    scores = []
    for t in transcripts:
        turns = max(len(t.predicted_questions), len(t.gold_questions))
        for i in range(turns):
            cand = t.predicted_questions[i].split() if i < len(t.predicted_questions) else []
            ref = t.gold_questions[i].split() if i < len(t.gold_questions) else []
            scores.append(rouge(cand, ref, variant))
    return sum(scores) / len(scores) if scores else 0.0


def stratify(transcripts: list[Transcript], by: str = "gold_k",
             buckets: list[int] | None = None) -> list[dict]:
    """Per-stratum Success with counts; empty strata are reported with
    count 0 and success None, never 0.0."""
    strata: dict[str, list[Transcript]] = {}
    if by == "gold_k":
        keys = sorted({t.gold_k for t in transcripts} | {1, 2, 3, 4, 5})
        for k in keys:
            strata[f"k={k}"] = [t for t in transcripts if t.gold_k == k]
    elif by == "request_length":
        buckets = buckets or [4, 8, 16]
        edges = [0] + list(buckets) + [10**9]
        for lo, hi in zip(edges[:-1], edges[1:]):
            label = f"len {lo + 1}-{hi}" if hi < 10**9 else f"len >{lo}"
            strata[label] = [t for t in transcripts
                             if lo < len(t.request.split()) <= hi]
    else:
        raise ValueError(f"unknown stratification {by!r}")
    rows = []
    for label, items in strata.items():
        rows.append({
            "stratum": label,
            "count": len(items),
            "success": success(items) if items else None,
        })
    return rows


def evaluation_report(transcripts: list[Transcript]) -> dict:
    noq, absdiff = noq_absdiff(transcripts)
    return {
        "success": success(transcripts),
        "bleu": {f"bleu_{n}": question_bleu(transcripts, n) for n in (1, 2, 3, 4)},
        "rouge": {
            "rouge_1": question_rouge(transcripts, 1),
            "rouge_2": question_rouge(transcripts, 2),
            "rouge_l": question_rouge(transcripts, "L"),
        },
        "noq": noq,
        "absdiff": absdiff,
        "by_gold_k": stratify(transcripts, "gold_k"),
        "by_request_length": stratify(transcripts, "request_length"),
        "count": len(transcripts),
    }
