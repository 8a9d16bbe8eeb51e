"""Command-line entry point orchestrating corpus building, training,
evaluation, statistics, and the dialogue service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .corpus.pipeline import (
    SplitRatios,
    build_corpus,
    corpus_stats,
    load_split,
    render_stats_table,
)
from .corpus.synthetic import generate_source_dialogues, write_source_jsonl
from .corpus.types import DuplicateId, SchemaError
from .engine import EngineConfig, run_dialogue
from .model.config import ModelConfig
from .model.network import Mas2sModel
from .numerics.checkpoint import load_params
from .reporting import write_report
from .tokenizer import Vocabulary
from .trainer import TrainConfig, train as run_training

EXIT_SCHEMA = 1
EXIT_IO = 2


@click.group()
def main():
    """Task-oriented information seeking: corpora, model, evaluation, service."""


@main.command("make-synthetic")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--n", default=200, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--irrelevant-fraction", default=0.1, show_default=True)
def make_synthetic(out_path, n, seed, irrelevant_fraction):
    """Generate a synthetic source-dialogue JSONL file."""
    dialogues = generate_source_dialogues(n, seed, irrelevant_fraction)
    write_source_jsonl(dialogues, out_path)
    click.echo(f"wrote {len(dialogues)} source dialogues to {out_path} (seed {seed})")


@main.command("build-corpus")
@click.option("--in", "in_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--min-turns", default=1, show_default=True)
@click.option("--max-turns", default=5, show_default=True)
@click.option("--ratios", default="0.7,0.1,0.2", show_default=True)
def build_corpus_cmd(in_path, out_dir, seed, min_turns, max_turns, ratios):
    """Ingest source dialogues and build the profile-augmented corpus."""
    try:
        parts = [float(x) for x in ratios.split(",")]
        if len(parts) != 3:
            raise ValueError("need three ratios")
        split_ratios = SplitRatios(*parts)
    except ValueError as e:
        click.echo(f"error: invalid ratios: {e}", err=True)
        sys.exit(EXIT_SCHEMA)
    try:
        stats = build_corpus(in_path, out_dir, seed, min_turns, max_turns, split_ratios)
    except FileNotFoundError as e:
        click.echo(f"error: input not found: {e}", err=True)
        sys.exit(EXIT_IO)
    except (SchemaError, DuplicateId) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_SCHEMA)
    click.echo(json.dumps({"seed": seed, "stats": stats}, indent=2, sort_keys=True))


@main.command("stats")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
def stats_cmd(corpus_dir):
    """Print the per-split corpus statistics table."""
    table = {}
    for name in ("train", "valid", "test"):
        path = Path(corpus_dir) / f"{name}.jsonl"
        if path.exists():
            table[name] = corpus_stats(load_split(corpus_dir, name))
    click.echo(render_stats_table(table))


@main.command("train")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--epochs", type=int)
@click.option("--seed", type=int)
@click.option("--hidden", type=int, default=64, show_default=True)
@click.option("--layers", type=int, default=2, show_default=True)
@click.option("--no-confidence-network", is_flag=True, help="w/oCEN ablation")
@click.option("--no-profile", is_flag=True, help="w/oProfile ablation")
def train_cmd(corpus_dir, config_path, out_dir, epochs, seed, hidden, layers,
              no_confidence_network, no_profile):
    """Train on a built corpus and write the best-validation checkpoint."""
    train_config = TrainConfig.load(config_path) if config_path else TrainConfig()
    if epochs is not None:
        train_config.epochs = epochs
    if seed is not None:
        train_config.seed = seed
    model_config = ModelConfig(
        hidden=hidden,
        layers=layers,
        use_confidence_network=not no_confidence_network,
        use_profile=not no_profile,
    )
    splits = {name: load_split(corpus_dir, name) for name in ("train", "valid")}
    summary = run_training(splits, train_config, model_config, out_dir,
                           log=lambda m: click.echo(m))
    click.echo(f"best epoch {summary['best_epoch']} "
               f"(valid loss {summary['best_valid_loss']:.4f})")


def _load_model(ckpt_dir) -> Mas2sModel:
    ckpt_dir = Path(ckpt_dir)
    vocab = Vocabulary.load(ckpt_dir / "vocab.json")
    config = ModelConfig.load(ckpt_dir / "model_config.json")
    return Mas2sModel(config, vocab, params=load_params(ckpt_dir / "checkpoint.json"))


@main.command("eval")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "ckpt_dir", required=True, type=click.Path(exists=True),
              help="Training output directory (checkpoint + vocab + config).")
@click.option("--report", "report_dir", required=True, type=click.Path())
@click.option("--split", default="test", show_default=True)
@click.option("--tau", default=0.5, show_default=True)
@click.option("--turn-cap", default=8, show_default=True)
@click.option("--limit", type=int, help="Evaluate only the first N dialogues.")
def eval_cmd(corpus_dir, ckpt_dir, report_dir, split, tau, turn_cap, limit):
    """Run simulated dialogues over a split and write report + figures."""
    model = _load_model(ckpt_dir)
    dialogues = load_split(corpus_dir, split)
    if limit:
        dialogues = dialogues[:limit]
    config = EngineConfig(tau=tau, turn_cap=turn_cap)
    transcripts = [run_dialogue(model, d, config) for d in dialogues]
    report = write_report(transcripts, report_dir)
    click.echo(json.dumps(
        {"success": report["success"], "bleu_1": report["bleu"]["bleu_1"],
         "rouge_l": report["rouge"]["rouge_l"], "noq": report["noq"],
         "absdiff": report["absdiff"], "count": report["count"]},
        indent=2,
    ))


@main.command("serve")
@click.option("--checkpoint", "ckpt_dir", required=True, type=click.Path(exists=True),
              help="Training output directory (checkpoint + vocab + config).")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True))
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--tau", default=0.5, show_default=True)
@click.option("--turn-cap", default=8, show_default=True)
@click.option("--persist", "persist_path", type=click.Path())
def serve_cmd(ckpt_dir, corpus_dir, port, host, tau, turn_cap, persist_path):
    """Serve the interactive dialogue HTTP API."""
    import uvicorn

    from .service import create_app

    ckpt_dir = Path(ckpt_dir)
    app = create_app(
        checkpoint=ckpt_dir / "checkpoint.json",
        vocab_path=ckpt_dir / "vocab.json",
        model_config_path=ckpt_dir / "model_config.json",
        corpus_dir=corpus_dir,
        tau=tau,
        turn_cap=turn_cap,
        persist_path=persist_path,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
