"""Model, loss, and schedule configuration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict


@dataclass
class TemperatureSchedule:
    """Geometric anneal for the selection temperature over post-warmup epochs."""

    start: float = 1.0
    end: float = 0.1
    anneal_epochs: int = 95

    def at(self, epoch: float) -> float:
        if self.anneal_epochs <= 0:
            return self.end
        t = min(max(epoch / self.anneal_epochs, 0.0), 1.0)
        return self.start * (self.end / self.start) ** t


@dataclass
class ModelConfig:
    n_facts: int
    n_views: int
    feat_dim: int
    n_rules: int = 16
    n_slots: int = 4
    n_classes: int = 4
    attribution_eps: float = 1e-8
    temperature: TemperatureSchedule = field(default_factory=TemperatureSchedule)
    selection_mode: str = "sampled"  # "sampled" | "deterministic"
    hard_forward: bool = False
    uniform_attribution: bool = False  # mean-pooling ablation switch

    def __post_init__(self) -> None:
        for name in ("n_facts", "n_views", "feat_dim", "n_rules", "n_slots", "n_classes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.selection_mode not in ("sampled", "deterministic"):
            raise ValueError(f"bad selection_mode: {self.selection_mode!r}")
        if isinstance(self.temperature, dict):
            self.temperature = TemperatureSchedule(**self.temperature)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SparsityRamp:
    """Zero before `start_epoch`, linear ramp to `max_value` over `ramp_epochs`."""

    max_value: float = 0.01
    start_epoch: int = 20
    ramp_epochs: int = 20

    def at(self, epoch: float) -> float:
        if epoch < self.start_epoch or self.max_value == 0.0:
            return 0.0
        if self.ramp_epochs <= 0:
            return self.max_value
        t = min((epoch - self.start_epoch) / self.ramp_epochs, 1.0)
        return self.max_value * t


@dataclass
class LossConfig:
    fact_weight: float = 1.0  # lambda_f
    sparsity: SparsityRamp = field(default_factory=SparsityRamp)
    supervision: str = "full"  # "full" | "weak" | "semi"
    semi_fraction: float = 0.2
    entropy_sparsity: bool = True  # False: literal L1 on selections (constant, kept for fidelity)
    bce_clip: float = 1e-7

    def __post_init__(self) -> None:
        if self.fact_weight < 0:
            raise ValueError("fact_weight must be >= 0")
        if self.supervision not in ("full", "weak", "semi"):
            raise ValueError(f"bad supervision mode: {self.supervision!r}")
        if self.supervision == "semi" and not (0.0 < self.semi_fraction < 1.0):
            raise ValueError("semi_fraction must be in (0, 1)")
        if isinstance(self.sparsity, dict):
            self.sparsity = SparsityRamp(**self.sparsity)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class OptimConfig:
    base_lr: float = 1e-4
    weight_decay: float = 0.05
    warmup_epochs: int = 5
    total_epochs: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def lr_at(self, epoch: float) -> float:
        """Linear warmup from 0, then cosine decay to 0 at total_epochs."""
        if self.warmup_epochs > 0 and epoch < self.warmup_epochs:
            return self.base_lr * epoch / self.warmup_epochs
        span = max(self.total_epochs - self.warmup_epochs, 1)
        t = min((epoch - self.warmup_epochs) / span, 1.0)
        return self.base_lr * 0.5 * (1.0 + math.cos(math.pi * t))

    def to_dict(self) -> dict:
        return asdict(self)
