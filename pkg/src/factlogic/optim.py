"""Decoupled-weight-decay adaptive-moment optimizer with warmup + cosine schedule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import OptimConfig
from .params import NumericalError, ParamStore


@dataclass
class OptimState:
    config: OptimConfig
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step_count: int = 0

    @classmethod
    def init(cls, params: ParamStore, config: OptimConfig | None = None) -> "OptimState":
        config = config or OptimConfig()
        return cls(
            config=config,
            m={k: np.zeros_like(p) for k, p in params.params.items()},
            v={k: np.zeros_like(p) for k, p in params.params.items()},
        )


def optimizer_step(
    params: ParamStore,
    state: OptimState,
    epoch: float,
    groups: tuple[str, ...] | None = None,
) -> None:
    """Apply one update from the accumulated gradients.

    `groups` restricts the update (the perception-warmup phase freezes the
    reasoning parameters); frozen groups keep both values and moments untouched.
    """
    cfg = state.config
    lr = cfg.lr_at(epoch)
    state.step_count += 1
    t = state.step_count
    for name, p in params.params.items():
        if groups is not None and name not in groups:
            continue
        grad = params.grads[name]
        if not np.all(np.isfinite(grad)):
            raise NumericalError(f"grad:{name}")
        state.m[name] = cfg.beta1 * state.m[name] + (1.0 - cfg.beta1) * grad
        state.v[name] = cfg.beta2 * state.v[name] + (1.0 - cfg.beta2) * grad * grad
        m_hat = state.m[name] / (1.0 - cfg.beta1 ** t)
        v_hat = state.v[name] / (1.0 - cfg.beta2 ** t)
        p -= lr * (m_hat / (np.sqrt(v_hat) + cfg.eps) + cfg.weight_decay * p)
