"""Training hyperparameters; the defaults are the protocol, a config file may override."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

SMALL_SET_BATCH = 5
LARGE_SET_BATCH = 32
SMALL_SET_LIMIT = 50  # sentences; at or below this the small batch applies


@dataclass(frozen=True)
class TrainSpec:
    model_path: str
    batch_size: int | None = None  # None: auto (5 for tiny train sets, else 32)
    learning_rate: float = 5e-5
    betas: tuple[float, float] = (0.9, 0.999)
    epsilon: float = 1e-8
    weight_decay: float = 1e-2
    max_epochs: int = 10
    seeds: tuple[int, ...] = (11, 22, 33, 44, 55)
    freeze_encoder: bool = False
    lowercase: bool = True  # uncased encoders expect lowercased input

    def __post_init__(self) -> None:
        if self.batch_size is not None and self.batch_size not in (SMALL_SET_BATCH, LARGE_SET_BATCH):
            raise ValueError(f"batch_size is {SMALL_SET_BATCH} or {LARGE_SET_BATCH}, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if not self.seeds:
            raise ValueError("at least one seed")

    def resolve_batch_size(self, n_train: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return SMALL_SET_BATCH if n_train <= SMALL_SET_LIMIT else LARGE_SET_BATCH

    def to_dict(self) -> dict:
        d = asdict(self)
        d["betas"] = list(self.betas)
        d["seeds"] = list(self.seeds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainSpec":
        d = dict(d)
        if "betas" in d:
            d["betas"] = tuple(d["betas"])
        if "seeds" in d:
            d["seeds"] = tuple(d["seeds"])
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "TrainSpec":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))
