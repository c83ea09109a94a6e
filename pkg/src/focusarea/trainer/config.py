"""Training hyperparameters.

Defaults are the full-scale settings for a pretrained generator; toy
fixtures override learning rates and epoch counts explicitly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields


@dataclass
class SLConfig:
    max_prompt_len: int = 650
    epochs: int = 120
    lr: float = 1e-5
    weight_decay: float = 0.01
    batch_size: int = 8
    seed: int = 0


@dataclass
class RLConfig:
    lr: float = 1e-4
    # entropy bonus weight
    entropy_coef: float = 0.1
    target_kl: float = 3.0
    clip_ratio: float = 0.2
    batch_size: int = 8
    ppo_epochs: int = 4
    init_kl_coef: float = 0.1
    kl_horizon: int = 1000
    max_grad_norm: float = 1.0
    iterations: int = 20
    steps_per_iteration: int = 4
    normalize_advantages: bool = False
    divergence_factor: float = 10.0
    seed: int = 0


@dataclass
class TrainConfig:
    sl: SLConfig = field(default_factory=SLConfig)
    rl: RLConfig = field(default_factory=RLConfig)
    patience: float = 3
    rouge_weight: float = 0.25

    def validate(self) -> None:
        for section in (self.sl, self.rl):
            for f in fields(section):
                v = getattr(section, f.name)
                if isinstance(v, bool) or f.name == "seed":
                    continue
                if v <= 0:
                    raise ValueError(f"{type(section).__name__}.{f.name} must be positive, got {v}")
        if not (self.patience > 0 or math.isinf(self.patience)):
            raise ValueError("patience must be positive")
        if not 0 <= self.rouge_weight < 1:
            raise ValueError("rouge_weight must be in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(
            sl=SLConfig(**d.get("sl", {})),
            rl=RLConfig(**d.get("rl", {})),
            patience=d.get("patience", 3),
            rouge_weight=d.get("rouge_weight", 0.25),
        )
