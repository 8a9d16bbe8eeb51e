"""Teacher-forced training: instance construction, batched cross-entropy,
epoch loop with validation-based checkpointing and early stopping."""

from __future__ import annotations

import json
import time
import random
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import numerics as nm
from .corpus.types import ClaritDialogue
from .model.config import ModelConfig
from .model.network import Mas2sModel
from .numerics.checkpoint import save_params
from .tokenizer import (
    CLS,
    EncodedSequence,
    Vocabulary,
    build_vocab,
    encode_dialogue,
    encode_knowledge,
    encode_profile,
)


class UnknownAnswerCandidate(KeyError):
    pass


class DivergedLoss(RuntimeError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    dropout: float = 0.1
    batch_size: int = 4
    epochs: int = 50
    seed: int = 0
    min_freq: int = 1
    patience: int = 5

    def __post_init__(self):
        if min(self.learning_rate, self.batch_size, self.epochs) <= 0:
            raise ValueError("learning rate, batch size, and epochs must be positive")

    @classmethod
    def load(cls, path) -> "TrainConfig":
        return cls(**json.loads(Path(path).read_text()))


@dataclass
class TrainingInstance:
    dialogue_id: str
    request: str
    history: list[tuple[str, str]]
    profile: list[str]
    knowledge: str
    target_ids: list[int]        # includes the trailing end pseudo-token
    is_answer: bool = False


def build_instances(dialogue: ClaritDialogue, vocab: Vocabulary) -> list[TrainingInstance]:
    """K question instances with incremental history prefixes plus one
    answer instance whose target is the single answer-candidate token."""
    out = []
    for k, (q, _a) in enumerate(dialogue.turns):
        out.append(TrainingInstance(
            dialogue_id=dialogue.id,
            request=dialogue.request,
            history=dialogue.turns[:k],
            profile=dialogue.user_profile,
            knowledge=dialogue.knowledge,
            target_ids=vocab.encode_text(q) + [CLS],
        ))
    answer_id = vocab.candidate_id(dialogue.final_answer)
    if answer_id is None:
        raise UnknownAnswerCandidate(dialogue.final_answer)
    out.append(TrainingInstance(
        dialogue_id=dialogue.id,
        request=dialogue.request,
        history=list(dialogue.turns),
        profile=dialogue.user_profile,
        knowledge=dialogue.knowledge,
        target_ids=[answer_id, CLS],
        is_answer=True,
    ))
    return out


def encode_instance(inst: TrainingInstance, vocab: Vocabulary, max_len: int
                    ) -> tuple[EncodedSequence, EncodedSequence, EncodedSequence]:
    return (
        encode_dialogue(inst.request, inst.history, vocab, max_len),
        encode_profile(inst.profile, vocab),
        encode_knowledge(inst.knowledge, vocab),
    )


def teacher_forced_loss(model: Mas2sModel, batch: list[TrainingInstance],
                        vocab: Vocabulary) -> nm.Tensor:
    """Token-level mean cross-entropy over all target positions in the batch."""
    if not batch:
        raise ValueError("empty batch")
    losses = []
    weights = []
    for inst in batch:
        d, u, t = encode_instance(inst, vocab, model.config.max_len)
        losses.append(model.instance_loss(d, u, t, inst.target_ids))
        weights.append(len(inst.target_ids))
    total = sum(weights)
    acc = nm.scale(losses[0], weights[0] / total)
    for loss, w in zip(losses[1:], weights[1:]):
        acc = nm.add(acc, nm.scale(loss, w / total))
    return acc


def evaluate_loss(model: Mas2sModel, instances: list[TrainingInstance],
                  vocab: Vocabulary) -> float:
    model.set_dropout_rng(None)
    total, count = 0.0, 0
    for inst in instances:
        d, u, t = encode_instance(inst, vocab, model.config.max_len)
        loss = model.instance_loss(d, u, t, inst.target_ids)
        total += loss.item() * len(inst.target_ids)
        count += len(inst.target_ids)
    return total / max(count, 1)


def train(splits: dict[str, list[ClaritDialogue]], train_config: TrainConfig,
          model_config: ModelConfig, out_dir, log=print) -> dict:
    """Full training run. Writes vocab, config, best checkpoint, and a
    JSONL history log into out_dir; returns a summary dict."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    vocab = build_vocab(splits["train"], min_freq=train_config.min_freq)
    vocab.save(out_dir / "vocab.json")
    model_config.dropout = train_config.dropout
    model_config.save(out_dir / "model_config.json")

    model = Mas2sModel(model_config, vocab, seed=train_config.seed)
    state = nm.AdamState(learning_rate=train_config.learning_rate)

    train_instances = [i for d in splits["train"] for i in build_instances(d, vocab)]
    valid_instances = [i for d in splits.get("valid", []) for i in build_instances(d, vocab)]

    rng = random.Random(train_config.seed)
    best_valid = float("inf")
    best_epoch = -1
    since_best = 0
    history = []
    log_path = out_dir / "train.jsonl"
    ckpt_path = out_dir / "checkpoint.json"

    with log_path.open("w") as log_file:
        for epoch in range(train_config.epochs):
            start = time.monotonic()
            model.set_dropout_rng(np.random.default_rng(train_config.seed * 10_000 + epoch))
            order = list(range(len(train_instances)))
            rng.shuffle(order)
            epoch_loss, epoch_tokens = 0.0, 0
            for lo in range(0, len(order), train_config.batch_size):
                batch = [train_instances[i] for i in order[lo:lo + train_config.batch_size]]
                loss = teacher_forced_loss(model, batch, vocab)
                if not np.isfinite(loss.values):
                    raise DivergedLoss(f"non-finite loss at epoch {epoch}")
                nm.backward(loss)
                nm.adam_step(model.params, state)
                ntok = sum(len(b.target_ids) for b in batch)
                epoch_loss += loss.item() * ntok
                epoch_tokens += ntok
            train_loss = epoch_loss / max(epoch_tokens, 1)
            valid_loss = (evaluate_loss(model, valid_instances, vocab)
                          if valid_instances else train_loss)
            entry = {
                "epoch": epoch,
                "train_loss": train_loss,
                "valid_loss": valid_loss,
                "wall_time": time.monotonic() - start,
            }
            history.append(entry)
            log_file.write(json.dumps(entry) + "\n")
            log_file.flush()
            log(f"epoch {epoch}: train {train_loss:.4f} valid {valid_loss:.4f}")

            if valid_loss < best_valid:
                best_valid = valid_loss
                best_epoch = epoch
                since_best = 0
                save_params(model.params, ckpt_path)
            else:
                since_best += 1
                if since_best >= train_config.patience:
                    log(f"early stop at epoch {epoch} (best {best_epoch})")
                    break

    model.set_dropout_rng(None)
    summary = {
        "best_epoch": best_epoch,
        "best_valid_loss": best_valid,
        "epochs_run": len(history),
        "checkpoint": str(ckpt_path),
        "vocab": str(out_dir / "vocab.json"),
        "config": asdict(train_config),
        "history": history,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary
