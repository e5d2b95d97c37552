"""Scikit-learn style estimator facade over the training loop.

``X`` is the flattened per-view feature matrix of shape
``(n_samples, n_views * feat_dim)``; optional per-sample binary fact labels
enable the fact-grounding loss and the perception warmup phase.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .config import LossConfig, ModelConfig, OptimConfig, SparsityRamp
from .extraction import discretize, prune
from .model import batched_confidences, batched_posterior
from .trainer import TrainConfig, supervision_masks, train_arrays
from .vocab import ClassVocabulary, FactVocabulary


class RuleInductionClassifier(BaseEstimator, ClassifierMixin):
    """Learns weighted logic rules with negation over fused fact confidences.

    Parameters mirror the training configuration; everything has a sensible
    default so ``RuleInductionClassifier(n_views=3).fit(X, y, fact_bits=b)``
    reproduces the reference pipeline.
    """

    def __init__(
        self,
        n_views: int = 1,
        n_facts: int | None = None,
        n_rules: int = 16,
        n_slots: int = 4,
        base_lr: float = 0.045,
        total_epochs: int = 100,
        batch_size: int = 32,
        warmup_phase_epochs: int = 10,
        fact_weight: float = 1.0,
        sparsity_max: float = 0.01,
        hard_forward: bool = True,
        selection_mode: str = "sampled",
        val_fraction: float = 0.15,
        random_state: int = 0,
        fact_names: list[str] | None = None,
        class_names: list[str] | None = None,
        risk_classes: list[str] | None = None,
    ) -> None:
        self.n_views = n_views
        self.n_facts = n_facts
        self.n_rules = n_rules
        self.n_slots = n_slots
        self.base_lr = base_lr
        self.total_epochs = total_epochs
        self.batch_size = batch_size
        self.warmup_phase_epochs = warmup_phase_epochs
        self.fact_weight = fact_weight
        self.sparsity_max = sparsity_max
        self.hard_forward = hard_forward
        self.selection_mode = selection_mode
        self.val_fraction = val_fraction
        self.random_state = random_state
        self.fact_names = fact_names
        self.class_names = class_names
        self.risk_classes = risk_classes

    def _views(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
        if X.shape[1] % self.n_views != 0:
            raise ValueError(
                f"X has {X.shape[1]} columns, not divisible by n_views={self.n_views}")
        return X.reshape(len(X), self.n_views, X.shape[1] // self.n_views)

    def fit(self, X, y, fact_bits: np.ndarray | None = None) -> "RuleInductionClassifier":
        Xv = self._views(X)
        y = np.asarray(y)
        if len(y) != len(Xv):
            raise ValueError("X and y length mismatch")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        self.n_features_in_ = X.shape[1]

        if fact_bits is not None:
            fact_bits = np.asarray(fact_bits, dtype=np.float64)
            if fact_bits.shape[0] != len(Xv):
                raise ValueError("fact_bits and X length mismatch")
            n_facts = fact_bits.shape[1]
            if self.n_facts is not None and self.n_facts != n_facts:
                raise ValueError(
                    f"n_facts={self.n_facts} but fact_bits has {n_facts} columns")
            supervision = "full"
        else:
            if self.n_facts is None:
                raise ValueError("n_facts is required when fact_bits is not given")
            n_facts = self.n_facts
            fact_bits = np.zeros((len(Xv), n_facts))
            supervision = "weak"

        fact_ids = self.fact_names or [f"fact_{i}" for i in range(n_facts)]
        class_ids = (self.class_names
                     or [str(c) for c in self.classes_])
        if len(fact_ids) != n_facts:
            raise ValueError("fact_names length does not match fact_bits")
        if len(class_ids) != len(self.classes_):
            raise ValueError("class_names length does not match observed classes")
        facts = FactVocabulary.from_ids(list(fact_ids))
        classes = ClassVocabulary.from_names(list(class_ids),
                                             risk=set(self.risk_classes or []))

        config = TrainConfig(
            model=ModelConfig(
                n_facts=n_facts, n_views=self.n_views,
                feat_dim=Xv.shape[2], n_rules=self.n_rules, n_slots=self.n_slots,
                n_classes=len(self.classes_), selection_mode=self.selection_mode,
                hard_forward=self.hard_forward),
            loss=LossConfig(fact_weight=self.fact_weight,
                            sparsity=SparsityRamp(max_value=self.sparsity_max),
                            supervision=supervision),
            optim=OptimConfig(base_lr=self.base_lr, total_epochs=self.total_epochs),
            batch_size=self.batch_size,
            warmup_phase_epochs=self.warmup_phase_epochs,
            seed=self.random_state,
            val_fraction=self.val_fraction,
        )
        rng = np.random.default_rng(self.random_state)
        masks = supervision_masks(len(Xv), n_facts, config.loss, rng)

        n_val = max(1, int(len(Xv) * self.val_fraction))
        order = rng.permutation(len(Xv))
        val, trn = order[:n_val], order[n_val:]
        result = train_arrays(
            Xv[trn], y_idx[trn], fact_bits[trn], masks[trn],
            Xv[val], y_idx[val], config, facts, classes, rng)
        self.model_ = result.model
        self.history_ = result.history
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        c = batched_confidences(self.model_.params, self._views(X), self.model_.config)
        return batched_posterior(self.model_.params, c, self.model_.config, hard=True)

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_proba(X).argmax(axis=1)]

    def predict_facts(self, X) -> np.ndarray:
        """Fused fact confidences for each sample."""
        check_is_fitted(self, "model_")
        return batched_confidences(self.model_.params, self._views(X), self.model_.config)

    def extract_rules(self, X=None, y=None, tau_prune: float = 0.5,
                      rho_min: float = 0.1):
        """Symbolic rule set; with (X, y) validation data, reliability-pruned."""
        check_is_fitted(self, "model_")
        model = self.model_
        candidates = discretize(model.params, model.config, model.facts, tau_prune)
        if X is None:
            from .extraction import RuleSet
            return RuleSet(rules=[r for r in candidates if r.size >= 2],
                           provenance={"note": "no validation data"})
        y_idx = np.searchsorted(self.classes_, np.asarray(y))
        conf = self.predict_facts(X)
        return prune(candidates, model.facts, conf, y_idx, rho_min=rho_min)
