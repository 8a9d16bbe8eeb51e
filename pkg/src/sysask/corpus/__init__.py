from .types import (
    SourceDialogue,
    ClaritDialogue,
    SchemaError,
    DuplicateId,
    parse_source_line,
)
from .rules import RewriteRule, UntransformableError, rewrite_qa, DEFAULT_RULES
from .pipeline import (
    SplitRatios,
    QualityReport,
    ingest,
    sample_turns,
    build_profile,
    split_dataset,
    corpus_stats,
    render_stats_table,
    build_corpus,
    load_split,
)
from .synthetic import generate_source_dialogues, write_source_jsonl

__all__ = [
    "SourceDialogue", "ClaritDialogue", "SchemaError", "DuplicateId",
    "parse_source_line", "RewriteRule", "UntransformableError", "rewrite_qa",
    "DEFAULT_RULES", "SplitRatios", "QualityReport", "ingest", "sample_turns",
    "build_profile", "split_dataset", "corpus_stats", "render_stats_table",
    "build_corpus", "load_split", "generate_source_dialogues",
    "write_source_jsonl",
]
