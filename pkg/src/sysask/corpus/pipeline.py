"""Profile-synthesis pipeline: ingest source dialogues, sample turns,
rewrite them into a user profile, split, and write the corpus to disk.

Per-dialogue randomness is derived as corpus_seed XOR dialogue index, so
dialogues can be processed independently and the output is byte-identical
for a fixed seed.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .rules import DEFAULT_RULES, RewriteRule, UntransformableError, rewrite_qa
from .types import ClaritDialogue, DuplicateId, SchemaError, SourceDialogue, parse_source_line


@dataclass
class SplitRatios:
    train: float = 0.7
    valid: float = 0.1
    test: float = 0.2

    def __post_init__(self):
        if min(self.train, self.valid, self.test) < 0:
            raise ValueError("ratios must be nonnegative")
        if abs(self.train + self.valid + self.test - 1.0) > 1e-9:
            raise ValueError("ratios must sum to 1")


@dataclass
class QualityReport:
    total: int = 0
    transformable: int = 0
    untransformable: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "transformable": self.transformable,
            "untransformable": self.untransformable,
        }


def ingest(path) -> list[SourceDialogue]:
    """Read one SourceDialogue JSON record per line; reject malformed lines."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    dialogues = []
    seen = set()
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            d = parse_source_line(line, lineno)
            if d.id in seen:
                raise DuplicateId(f"line {lineno}: duplicate dialogue id {d.id!r}")
            seen.add(d.id)
            dialogues.append(d)
    return dialogues


def sample_turns(dialogue: SourceDialogue, rng: random.Random,
                 min_n: int = 1, max_n: int = 5) -> set[int]:
    """Uniformly sample clamp(uniform(min_n, max_n), 0, K) turn indices."""
    if min_n > max_n:
        raise ValueError("min_n > max_n")
    k = dialogue.num_turns
    n = max(0, min(rng.randint(min_n, max_n), k))
    if n == 0:
        return set()
    return set(rng.sample(range(k), n))


def build_profile(dialogue: SourceDialogue, indices: set[int],
                  rules: list[RewriteRule] | None = None,
                  report: QualityReport | None = None) -> ClaritDialogue:
    """Rewrite the indexed turns into profile sentences and drop them from
    the dialogue; untransformable turns stay in the dialogue and are logged."""
    rules = DEFAULT_RULES if rules is None else rules
    k = dialogue.num_turns
    bad = [i for i in indices if not 0 <= i < k]
    if bad:
        raise IndexError(f"{dialogue.id}: turn indices {bad} out of range [0, {k})")

    profile: list[str] = []
    removed: list[int] = []
    for i in sorted(indices):
        q, a = dialogue.turns[i]
        if report is not None:
            report.total += 1
        try:
            profile.append(rewrite_qa(q, a, rules))
        except UntransformableError as e:
            if report is not None:
                report.untransformable.append(
                    {"dialogue_id": dialogue.id, "turn_index": i,
                     "question": q, "answer": a, "reason": e.reason}
                )
            continue
        if report is not None:
            report.transformable += 1
        removed.append(i)

    retained = [t for i, t in enumerate(dialogue.turns) if i not in removed]
    return ClaritDialogue(
        id=dialogue.id,
        request=dialogue.request,
        user_profile=profile,
        knowledge=dialogue.knowledge,
        turns=retained,
        final_answer=dialogue.final_answer,
        removed_indices=removed,
    )


def split_dataset(dialogues, ratios: SplitRatios, rng: random.Random) -> dict[str, list]:
    """Disjoint shuffled partition; floor sizes, remainder assigned train-first."""
    items = list(dialogues)
    rng.shuffle(items)
    n = len(items)
    sizes = [int(n * ratios.train), int(n * ratios.valid), int(n * ratios.test)]
    leftover = n - sum(sizes)
    for i in range(leftover):
        sizes[i % 3] += 1
    a, b = sizes[0], sizes[0] + sizes[1]
    return {"train": items[:a], "valid": items[a:b], "test": items[b:]}


def corpus_stats(split: list[ClaritDialogue]) -> dict:
    return {
        "dialogues": len(split),
        "knowledge": len({d.knowledge for d in split}),
        "profiles": len({tuple(d.user_profile) for d in split if d.user_profile}),
        "turns": sum(len(d.turns) for d in split),
    }


def render_stats_table(stats: dict[str, dict]) -> str:
    header = f"{'Set':<8} {'#Dialogue':>10} {'#Knowledge':>11} {'#Profile':>9} {'#Turns':>8}"
    lines = [header, "-" * len(header)]
    for name, s in stats.items():
        lines.append(
            f"{name:<8} {s['dialogues']:>10} {s['knowledge']:>11} "
            f"{s['profiles']:>9} {s['turns']:>8}"
        )
    return "\n".join(lines)


def build_corpus(in_path, out_dir, seed: int,
                 min_turns: int = 1, max_turns: int = 5,
                 ratios: SplitRatios | None = None,
                 rules: list[RewriteRule] | None = None) -> dict:
    """Run the full pipeline and write train/valid/test JSONL + stats +
    quality report into `out_dir`. Returns the stats dict."""
    ratios = ratios or SplitRatios()
    sources = ingest(in_path)
    report = QualityReport()
    clarit = []
    for idx, d in enumerate(sources):
        rng = random.Random(seed ^ idx)
        indices = sample_turns(d, rng, min_turns, max_turns)
        clarit.append(build_profile(d, indices, rules, report))

    splits = split_dataset(clarit, ratios, random.Random(seed))

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stats: dict[str, dict] = {}
    all_stats = corpus_stats(clarit)
    for name, items in splits.items():
        with (out_dir / f"{name}.jsonl").open("w", encoding="utf-8") as f:
            for d in items:
                f.write(d.to_json() + "\n")
        stats[name] = corpus_stats(items)
    payload = {"seed": seed, "all": all_stats, **stats}
    (out_dir / "stats.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    (out_dir / "quality_report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True)
    )
    return payload


def load_split(corpus_dir, name: str) -> list[ClaritDialogue]:
    path = Path(corpus_dir) / f"{name}.jsonl"
    out = []
    with path.open(encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(ClaritDialogue.from_dict(json.loads(line)))
    return out
