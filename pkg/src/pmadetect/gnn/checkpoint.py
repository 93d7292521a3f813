"""JSON model checkpoints: config, seed and row-major float64 tensors."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import SchemaError
from .model import ModelConfig, ModelParams, validate_params

FORMAT = "pmadetect-checkpoint"
VERSION = 1


@dataclass
class Checkpoint:
    config: ModelConfig
    params: ModelParams
    train_config: dict | None = None

    def dumps(self) -> str:
        doc = {
            "format": FORMAT,
            "version": VERSION,
            "config": self.config.to_dict(),
            "seed": self.params.seed,
            "train_config": self.train_config,
            "params": {
                name: {"shape": list(t.shape), "data": t.ravel(order="C").tolist()}
                for name, t in self.params.tensors.items()
            },
        }
        return json.dumps(doc, indent=1)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()

    @classmethod
    def loads(cls, text: str | bytes) -> "Checkpoint":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError("checkpoint", f"checkpoint is not JSON: {exc.msg}") from None
        if doc.get("format") != FORMAT:
            raise SchemaError("format", "not a model checkpoint")
        if doc.get("version") != VERSION:
            raise SchemaError("version", f"unsupported checkpoint version {doc.get('version')}")
        config = ModelConfig.from_dict(doc["config"])
        tensors = {}
        for name, entry in doc["params"].items():
            data = np.asarray(entry["data"], dtype=np.float64)
            shape = tuple(entry["shape"])
            if data.size != int(np.prod(shape)):
                raise SchemaError(name, f"{name}: {data.size} values for shape {shape}")
            tensors[name] = data.reshape(shape)
        params = ModelParams(tensors, doc.get("seed"))
        validate_params(params, config)
        return cls(config, params, doc.get("train_config"))

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        return cls.loads(Path(path).read_text(encoding="utf-8"))
