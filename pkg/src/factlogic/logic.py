"""Differentiable rule layer: literal selection, negation gating, T-norm firing,
and the weighted-disjunction class posterior."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ModelConfig
from .fusion import FactGraph, sigmoid
from .params import ParamStore, ShapeError


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def sample_gumbel(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    u = rng.uniform(1e-12, 1.0, size=shape)
    return -np.log(-np.log(u))


def one_hot_argmax(gamma: np.ndarray) -> np.ndarray:
    """Snap each trailing-axis distribution to a one-hot at its argmax."""
    idx = np.argmax(gamma, axis=-1)
    hard = np.zeros_like(gamma)
    np.put_along_axis(hard, idx[..., None], 1.0, axis=-1)
    return hard


def select_literal(
    logits: np.ndarray,
    temperature: float,
    mode: str = "deterministic",
    rng: np.random.Generator | None = None,
    hard: bool = False,
) -> np.ndarray:
    """Gumbel-softmax selection over the fact pool for one or more literal slots.

    Works on any shape whose trailing axis indexes facts. In sampled mode a
    fresh Gumbel draw perturbs the logits; with `hard` the forward value is the
    one-hot argmax (straight-through callers keep the soft value for gradients).
    """
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    logits = np.asarray(logits, dtype=np.float64)
    if mode == "sampled":
        if rng is None:
            raise ValueError("sampled mode requires an rng")
        logits = logits + sample_gumbel(logits.shape, rng)
    elif mode != "deterministic":
        raise ValueError(f"bad selection mode: {mode!r}")
    gamma = softmax(logits / temperature, axis=-1)
    return one_hot_argmax(gamma) if hard else gamma


def literal_truth(gamma: np.ndarray, eta: np.ndarray | float, c: np.ndarray) -> np.ndarray | float:
    """Negation-gated truth: (1-eta) * <gamma, c> + eta * (1 - <gamma, c>)."""
    selected = np.sum(np.asarray(gamma) * np.asarray(c), axis=-1)
    return (1.0 - eta) * selected + eta * (1.0 - selected)


def rule_strength(mu: np.ndarray) -> np.ndarray | float:
    """Product T-norm over the literal slots (trailing axis)."""
    return np.prod(np.asarray(mu, dtype=np.float64), axis=-1)


def class_posterior(tau: np.ndarray, w: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Softmax over per-class scores beta_y + sum_m w_{y,m} tau_m."""
    scores = np.asarray(beta) + np.asarray(tau) @ np.asarray(w).T
    return softmax(scores, axis=-1)


@dataclass
class RuleActivation:
    """Full forward trace of the rule layer for one fact vector."""

    gamma: np.ndarray   # (M, L, N) selection distributions (forward values)
    eta: np.ndarray     # (M, L) gate values in [0, 1]
    mu: np.ndarray      # (M, L) literal truths
    tau: np.ndarray     # (M,) firing strengths
    scores: np.ndarray  # (C,) pre-softmax class scores


def reason(
    fact_graph: FactGraph | np.ndarray,
    params: ParamStore,
    config: ModelConfig,
    rng: np.random.Generator | None = None,
    temperature: float | None = None,
) -> tuple[np.ndarray, RuleActivation]:
    """Evaluate the rule layer on a fact confidence vector.

    Accepts either a FactGraph or a bare confidence vector. Mode and the
    hard-forward flag come from `config`; temperature defaults to the schedule
    endpoint (evaluation-time value).
    """
    c = fact_graph.confidences if isinstance(fact_graph, FactGraph) else np.asarray(fact_graph, dtype=np.float64)
    if c.shape != (config.n_facts,):
        raise ShapeError(f"fact vector shape {c.shape} does not match n_facts={config.n_facts}")
    if temperature is None:
        temperature = config.temperature.end
    gamma = select_literal(
        params["Gamma"], temperature, mode=config.selection_mode, rng=rng,
        hard=config.hard_forward,
    )
    eta = sigmoid(params["eta"])
    mu = literal_truth(gamma, eta, c)
    tau = rule_strength(mu)
    scores = params["beta"] + tau @ params["w"].T
    posterior = softmax(scores)
    return posterior, RuleActivation(gamma=gamma, eta=np.asarray(eta), mu=np.asarray(mu),
                                     tau=np.asarray(tau), scores=scores)
