"""Parameter checkpoint serialization: JSON map name -> (shape, values)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tensor import Tensor

FORMAT_TAG = "sysask-params-v1"


class CheckpointFormatError(ValueError):
    pass


def save_params(params: dict[str, Tensor], path) -> None:
    payload = {
        "format": FORMAT_TAG,
        "params": {
            name: {"shape": list(p.values.shape), "values": p.values.reshape(-1).tolist()}
            for name, p in params.items()
        },
    }
    Path(path).write_text(json.dumps(payload))


def load_params(path) -> dict[str, np.ndarray]:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != FORMAT_TAG:
        raise CheckpointFormatError(f"unexpected checkpoint format: {payload.get('format')!r}")
    out = {}
    for name, entry in payload["params"].items():
        out[name] = np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])
    return out
