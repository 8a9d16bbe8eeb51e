"""Model hyperparameters and ablation flags."""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path


@dataclass
class ModelConfig:
    # full-scale defaults are hidden=768 / max_len=512; the toy profile
    # used throughout the tests is hidden=64 / max_len=128
    hidden: int = 64
    layers: int = 2
    heads: int = 4
    dropout: float = 0.1
    max_len: int = 128
    ffn_mult: int = 4
    beam_size: int = 5
    max_decode_len: int = 16
    use_confidence_network: bool = True
    use_profile: bool = True
    literal_eq4: bool = False

    def __post_init__(self):
        if self.hidden % self.heads != 0:
            raise ValueError("hidden size must be divisible by head count")

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "ModelConfig":
        return cls(**json.loads(Path(path).read_text()))
