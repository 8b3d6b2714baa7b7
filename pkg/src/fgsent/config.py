"""Shared training hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class TrainConfig:
    """Defaults follow the reference setup: 50 epochs, batch 32, warmup over
    the first 10% of steps, max sequence length 128, dropout-analog masking
    0.3, L2 penalty 0.01. learning_rate is the SGD step size (the perceptron
    ignores it)."""

    epochs: int = 50
    learning_rate: float = 0.1
    warmup: float = 0.1
    batch_size: int = 32
    max_len: int = 128
    dropout: float = 0.3
    l2: float = 0.01
    seed: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not 0 <= self.warmup < 1:
            raise ValueError(f"warmup must be in [0, 1), got {self.warmup}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_len < 2:
            raise ValueError(f"max_len must be >= 2, got {self.max_len}")
        if not 0 <= self.dropout < 1:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be non-negative, got {self.l2}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @staticmethod
    def from_dict(data: dict) -> "TrainConfig":
        known = {f.name for f in fields(TrainConfig)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown TrainConfig fields: {sorted(unknown)}")
        return TrainConfig(**data)

    def replace(self, **kwargs) -> "TrainConfig":
        merged = self.to_dict()
        merged.update(kwargs)
        return TrainConfig.from_dict(merged)
