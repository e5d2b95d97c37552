"""Named parameter groups with matching gradient accumulators."""
from __future__ import annotations

import numpy as np

from .config import ModelConfig


class ShapeError(ValueError):
    """Raised when an array does not match the configured shape."""


class NumericalError(FloatingPointError):
    """Raised when a non-finite value appears in a named tensor."""

    def __init__(self, tensor_name: str):
        super().__init__(f"non-finite values in tensor {tensor_name!r}")
        self.tensor_name = tensor_name


FUSION_GROUPS = ("W_pred", "b_pred", "W_rel", "b_rel")
LOGIC_GROUPS = ("Gamma", "eta", "w", "beta")
ALL_GROUPS = FUSION_GROUPS + LOGIC_GROUPS


class ParamStore:
    """Flat named arrays for every learnable group, plus gradient buffers."""

    def __init__(self, params: dict[str, np.ndarray]):
        missing = [g for g in ALL_GROUPS if g not in params]
        if missing:
            raise ShapeError(f"missing parameter groups: {missing}")
        self.params = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    @classmethod
    def init(cls, config: ModelConfig, rng: np.random.Generator) -> "ParamStore":
        """Initialize heads with small random weights; rule weights at the neutral 0.5,
        negation pre-gates at 0 (gate = 0.5), selection logits with small noise."""
        n, v, d = config.n_facts, config.n_views, config.feat_dim
        m, l, c = config.n_rules, config.n_slots, config.n_classes
        scale = 1.0 / np.sqrt(d)
        return cls({
            "W_pred": rng.normal(0.0, scale, size=(n, d)),
            "b_pred": np.zeros(n),
            "W_rel": rng.normal(0.0, scale, size=(n, d)),
            "b_rel": np.zeros(n),
            "Gamma": rng.normal(0.0, 0.1, size=(m, l, n)),
            "eta": np.zeros((m, l)),
            "w": np.full((c, m), 0.5),
            "beta": np.zeros(c),
        })

    def expected_shapes(self, config: ModelConfig) -> dict[str, tuple[int, ...]]:
        n, d = config.n_facts, config.feat_dim
        m, l, c = config.n_rules, config.n_slots, config.n_classes
        return {
            "W_pred": (n, d), "b_pred": (n,),
            "W_rel": (n, d), "b_rel": (n,),
            "Gamma": (m, l, n), "eta": (m, l),
            "w": (c, m), "beta": (c,),
        }

    def check_shapes(self, config: ModelConfig) -> None:
        for name, shape in self.expected_shapes(config).items():
            if self.params[name].shape != shape:
                raise ShapeError(
                    f"group {name!r} has shape {self.params[name].shape}, expected {shape}")

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g[...] = 0.0

    def check_finite(self) -> None:
        for name, p in self.params.items():
            if not np.all(np.isfinite(p)):
                raise NumericalError(name)

    def copy(self) -> "ParamStore":
        clone = ParamStore({k: v.copy() for k, v in self.params.items()})
        clone.grads = {k: v.copy() for k, v in self.grads.items()}
        return clone

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]
