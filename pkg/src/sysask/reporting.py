"""Evaluation report rendering: JSON report, stratified CSV tables, and
matplotlib figures for the per-k and per-request-length success curves."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import Transcript, evaluation_report  # noqa: E402


def write_stratified_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["stratum", "count", "success"])
        writer.writeheader()
        for r in rows:
            writer.writerow(r)


def _plot_strata(rows: list[dict], title: str, xlabel: str, path) -> None:
    filled = [r for r in rows if r["count"] > 0]
    labels = [r["stratum"] for r in filled]
    values = [r["success"] for r in filled]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, values, color="#4878b0")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("Success")
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    for x, v in enumerate(values):
        ax.text(x, v + 0.02, f"{v:.2f}", ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(transcripts: list[Transcript], out_dir,
                 report_name: str = "report.json") -> dict:
    """Write report.json, stratified CSVs, PNG figures, and transcripts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = evaluation_report(transcripts)
    (out_dir / report_name).write_text(json.dumps(report, indent=2))

    write_stratified_csv(report["by_gold_k"], out_dir / "success_by_gold_k.csv")
    write_stratified_csv(report["by_request_length"],
                         out_dir / "success_by_request_length.csv")
    _plot_strata(report["by_gold_k"], "Success by gold clarification count",
                 "gold clarification questions", out_dir / "success_by_gold_k.png")
    _plot_strata(report["by_request_length"], "Success by request length",
                 "request length (tokens)", out_dir / "success_by_request_length.png")
    return report
