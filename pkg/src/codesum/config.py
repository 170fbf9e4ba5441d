"""Flat experiment configuration, mirrored one-to-one by the JSON
config file and the CLI flags."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 32
    dropout: float = 0.2
    max_epochs: int = 200
    patience: int = 20
    seed: int = 13
    fusion_mode: str = "fgfm"
    d_model: int = 64
    n_heads: int = 4
    d_k: int = 64
    d_ff: int = 128
    n_layers: int = 2
    gcn_layers: int = 2
    max_len: int = 64  # shared padded length for code tokens and AST nodes
    max_summary_len: int = 24
    code_vocab_cap: int = 30000
    summary_vocab_cap: int = 30000
    beam_size: int = 4
    grad_clip: float = 5.0  # global norm; 0 disables

    def validate(self):
        positive = (
            "batch_size", "max_epochs", "patience",
            "d_model", "n_heads", "d_k", "d_ff", "n_layers", "gcn_layers",
            "max_len", "max_summary_len", "code_vocab_cap",
            "summary_vocab_cap", "beam_size",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError("config field %s must be positive" % name)
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.grad_clip < 0:
            raise ValueError("grad_clip must be >= 0")
        if self.patience > self.max_epochs:
            raise ValueError("patience must not exceed max_epochs")
        if self.d_model % 2 != 0:
            raise ValueError("d_model must be even")
        if self.max_summary_len < 2:
            raise ValueError("max_summary_len must be >= 2")
        from .fusion import FUSION_MODES

        if self.fusion_mode not in FUSION_MODES:
            raise ValueError("fusion_mode must be one of %r" % (FUSION_MODES,))
        return self

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        return cls(**data).validate()

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
