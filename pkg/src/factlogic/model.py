"""Trained-model facade: evaluation-mode inference from views or fact vectors."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .config import ModelConfig
from .fusion import FactGraph, build_fact_graph
from .logic import RuleActivation, reason
from .params import ParamStore, ShapeError
from .vocab import ClassVocabulary, FactVocabulary


@dataclass
class RuleModel:
    """Parameters plus vocabularies; inference is deterministic hard selection."""

    config: ModelConfig
    params: ParamStore
    facts: FactVocabulary
    classes: ClassVocabulary
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.params.check_shapes(self.config)
        if len(self.facts) != self.config.n_facts:
            raise ShapeError("fact vocabulary size does not match model config")
        if len(self.classes) != self.config.n_classes:
            raise ShapeError("class vocabulary size does not match model config")

    @property
    def eval_config(self) -> ModelConfig:
        return replace(self.config, selection_mode="deterministic", hard_forward=True)

    def reason_on_facts(self, confidences: np.ndarray) -> tuple[np.ndarray, RuleActivation]:
        return reason(np.asarray(confidences, dtype=np.float64), self.params, self.eval_config)

    def perceive(self, view_features: np.ndarray) -> FactGraph:
        return build_fact_graph(view_features, self.params,
                                eps=self.config.attribution_eps,
                                uniform_attribution=self.config.uniform_attribution)

    def predict_views(self, view_features: np.ndarray) -> tuple[np.ndarray, FactGraph, RuleActivation]:
        graph = self.perceive(view_features)
        posterior, activation = self.reason_on_facts(graph.confidences)
        return posterior, graph, activation

    def predict_label(self, confidences: np.ndarray) -> int:
        posterior, _ = self.reason_on_facts(confidences)
        return int(np.argmax(posterior))


def batched_confidences(params: ParamStore, features: np.ndarray, config: ModelConfig) -> np.ndarray:
    """Fused fact confidences for a stack of samples, features shape (B, V, D)."""
    X = np.asarray(features, dtype=np.float64)
    z = np.einsum("nd,bvd->bnv", params["W_pred"], X) + params["b_pred"][None, :, None]
    rho = np.einsum("nd,bvd->bnv", params["W_rel"], X) + params["b_rel"][None, :, None]
    if config.uniform_attribution:
        attr = np.full_like(rho, 1.0 / config.n_views)
    else:
        e = np.exp(rho - rho.max(axis=-1, keepdims=True))
        attr = e / (e.sum(axis=-1, keepdims=True) + config.attribution_eps)
    fused = np.sum(attr * z, axis=-1)
    return 1.0 / (1.0 + np.exp(-fused))


def batched_posterior(
    params: ParamStore,
    confidences: np.ndarray,
    config: ModelConfig,
    hard: bool = True,
) -> np.ndarray:
    """Evaluation-mode class posteriors for a stack of fact vectors (B, N)."""
    c = np.asarray(confidences, dtype=np.float64)
    logits = params["Gamma"] / config.temperature.end
    e = np.exp(logits - logits.max(axis=-1, keepdims=True))
    gamma = e / e.sum(axis=-1, keepdims=True)
    if hard:
        from .logic import one_hot_argmax
        gamma = one_hot_argmax(gamma)
    gate = 1.0 / (1.0 + np.exp(-params["eta"]))
    s = np.einsum("mln,bn->bml", gamma, c)
    mu = gate + (1.0 - 2.0 * gate) * s
    tau = mu.prod(axis=-1)
    scores = params["beta"][None, :] + tau @ params["w"].T
    es = np.exp(scores - scores.max(axis=-1, keepdims=True))
    return es / es.sum(axis=-1, keepdims=True)


def predict_dataset(model: RuleModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Confidences and posteriors for a whole corpus at once."""
    c = batched_confidences(model.params, features, model.config)
    return c, batched_posterior(model.params, c, model.config, hard=True)
