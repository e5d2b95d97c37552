"""Multi-view fact fusion: per-view heads, view attribution, and logit pooling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ParamStore, ShapeError


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


@dataclass
class FactGraph:
    """Probabilistic fact graph: fused confidences plus per-view evidence trace.

    confidences:  (N,) in [0, 1]
    attribution:  (N, V) rows on the simplex (up to the eps slack)
    logits:       (N, V) raw per-view fact logits
    reliability:  (N, V) raw per-view reliability scores
    """

    confidences: np.ndarray
    attribution: np.ndarray
    logits: np.ndarray
    reliability: np.ndarray

    @property
    def n_facts(self) -> int:
        return self.confidences.shape[0]

    @property
    def n_views(self) -> int:
        return self.attribution.shape[1]


def predict_view(features: np.ndarray, params: ParamStore) -> tuple[np.ndarray, np.ndarray]:
    """Affine prediction and reliability heads for a single view.

    Returns raw logits z and reliabilities rho, both shape (N,). No activation
    here; the sigmoid is applied after fusion.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (params["W_pred"].shape[1],):
        raise ShapeError(
            f"feature dim {features.shape} does not match head dim {params['W_pred'].shape[1]}")
    z = params["W_pred"] @ features + params["b_pred"]
    rho = params["W_rel"] @ features + params["b_rel"]
    return z, rho


def view_attribution(rho: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    """Softmax over views with the eps guard added to the max-shifted denominator.

    With eps = 0 this is exactly softmax; rows sum to a value in (1 - eps, 1].
    """
    rho = np.asarray(rho, dtype=np.float64)
    shifted = rho - rho.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / (e.sum(axis=-1, keepdims=True) + eps)


def fuse(logits: np.ndarray, weights: np.ndarray) -> np.ndarray | float:
    """Weighted logit pooling: sigma(sum_v w_v * z_v)."""
    return sigmoid(np.sum(np.asarray(weights) * np.asarray(logits), axis=-1))


def build_fact_graph(
    view_features: np.ndarray,
    params: ParamStore,
    eps: float = 1e-8,
    uniform_attribution: bool = False,
) -> FactGraph:
    """Run the full perception stage for one sample.

    view_features: (V, D) feature matrix, one row per view.
    """
    view_features = np.asarray(view_features, dtype=np.float64)
    if view_features.ndim != 2:
        raise ShapeError(f"expected (V, D) features, got shape {view_features.shape}")
    z_cols, rho_cols = [], []
    for v in range(view_features.shape[0]):
        z, rho = predict_view(view_features[v], params)
        z_cols.append(z)
        rho_cols.append(rho)
    z = np.stack(z_cols, axis=1)      # (N, V)
    rho = np.stack(rho_cols, axis=1)  # (N, V)
    if uniform_attribution:
        attr = np.full_like(rho, 1.0 / rho.shape[1])
    else:
        attr = view_attribution(rho, eps=eps)
    c = fuse(z, attr)
    return FactGraph(confidences=np.asarray(c), attribution=attr, logits=z, reliability=rho)
