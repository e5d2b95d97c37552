"""Discretization of the trained soft logic into a symbolic rule set."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ModelConfig
from .params import ParamStore
from .vocab import ClassVocabulary, FactVocabulary


@dataclass
class SymbolicRule:
    rule_index: int
    positive: tuple[str, ...]          # fact ids, index order
    negated: tuple[str, ...]
    class_weights: np.ndarray          # (C,)
    reliability: float | None = None   # validation firing rate, set by prune
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if set(self.positive) & set(self.negated):
            raise ValueError("positive and negated literal sets must be disjoint")

    @property
    def size(self) -> int:
        return len(self.positive) + len(self.negated)

    @property
    def top_class(self) -> int:
        return int(np.argmax(self.class_weights))

    def fires(self, bits: np.ndarray, facts: FactVocabulary) -> np.ndarray:
        """Hard Boolean evaluation on binarized facts; bits shape (..., N)."""
        bits = np.asarray(bits)
        out = np.ones(bits.shape[:-1], dtype=bool)
        for f in self.positive:
            out &= bits[..., facts.index_of(f)] > 0.5
        for f in self.negated:
            out &= bits[..., facts.index_of(f)] <= 0.5
        return out


@dataclass
class RuleSet:
    rules: list[SymbolicRule]
    provenance: dict = field(default_factory=dict)
    warning: str | None = None

    def __len__(self) -> int:
        return len(self.rules)


def selection_distributions(params: ParamStore, config: ModelConfig) -> np.ndarray:
    """Deterministic (g = 0) soft selections at the evaluation temperature."""
    logits = params["Gamma"] / config.temperature.end
    e = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def discretize(
    params: ParamStore,
    config: ModelConfig,
    facts: FactVocabulary,
    tau_prune: float = 0.5,
) -> list[SymbolicRule]:
    """Threshold the positive/negative selection mass of every literal slot.

    Slot mass splits into alpha+ = gamma * (1 - gate) and alpha- = gamma * gate;
    a fact joins the positive (negated) set when its mass strictly exceeds
    tau_prune. Slots clearing neither threshold stay vacant.
    """
    if not (0.0 < tau_prune < 1.0):
        raise ValueError("tau_prune must lie in (0, 1)")
    gamma = selection_distributions(params, config)          # (M, L, N)
    gate = 1.0 / (1.0 + np.exp(-params["eta"]))              # (M, L)
    alpha_pos = gamma * (1.0 - gate)[:, :, None]
    alpha_neg = gamma * gate[:, :, None]
    candidates = []
    for m in range(config.n_rules):
        pos_mass: dict[int, float] = {}
        neg_mass: dict[int, float] = {}
        for j in range(config.n_slots):
            for i in range(config.n_facts):
                if alpha_pos[m, j, i] > tau_prune:
                    pos_mass[i] = pos_mass.get(i, 0.0) + alpha_pos[m, j, i]
                if alpha_neg[m, j, i] > tau_prune:
                    neg_mass[i] = neg_mass.get(i, 0.0) + alpha_neg[m, j, i]
        # a fact selected with opposite polarities in different slots makes the
        # conjunction contradictory; keep the heavier side, drop on a tie
        for i in sorted(set(pos_mass) & set(neg_mass)):
            if pos_mass[i] > neg_mass[i]:
                del neg_mass[i]
            elif neg_mass[i] > pos_mass[i]:
                del pos_mass[i]
            else:
                del pos_mass[i], neg_mass[i]
        candidates.append(SymbolicRule(
            rule_index=m,
            positive=tuple(facts.ids[i] for i in sorted(pos_mass)),
            negated=tuple(facts.ids[i] for i in sorted(neg_mass)),
            class_weights=params["w"][:, m].copy(),
            provenance={"tau_prune": tau_prune, "temperature": config.temperature.end},
        ))
    return candidates


def active_rule_count(params: ParamStore, config: ModelConfig, facts: FactVocabulary,
                      tau_prune: float = 0.5, w_min: float = 0.25) -> int:
    """Rules surviving the length filter that still carry class weight.

    The weight criterion is what makes the sparsity penalty visible: the L1
    term drives unused rule weights to zero while the literal sets stay intact.
    """
    wmax = np.abs(params["w"]).max(axis=0)
    return sum(1 for r in discretize(params, config, facts, tau_prune)
               if r.size >= 2 and wmax[r.rule_index] > w_min)


def prune(
    candidates: list[SymbolicRule],
    facts: FactVocabulary,
    val_confidences: np.ndarray,
    val_labels: np.ndarray,
    rho_min: float = 0.1,
) -> RuleSet:
    """Drop short rules, then rules whose validation firing rate is too low.

    Reliability is the mean hard firing rate of the discretized rule over
    validation samples of the rule's top-weighted class.
    """
    if len(val_labels) == 0:
        raise ValueError("validation set must be non-empty")
    val_confidences = np.asarray(val_confidences, dtype=np.float64)
    val_labels = np.asarray(val_labels)
    kept = []
    for rule in candidates:
        if rule.size < 2:
            continue
        of_class = val_confidences[val_labels == rule.top_class]
        rho = float(rule.fires(of_class, facts).mean()) if len(of_class) else 0.0
        rule.reliability = rho
        if rho >= rho_min:
            rule.provenance["rho_min"] = rho_min
            kept.append(rule)
    kept.sort(key=lambda r: (-float(np.max(r.class_weights)), r.rule_index))
    warning = "all rules pruned" if not kept else None
    return RuleSet(rules=kept, provenance={"rho_min": rho_min}, warning=warning)


def render(rule: SymbolicRule, facts: FactVocabulary, classes: ClassVocabulary) -> str:
    """Canonical one-line form: ``Class <- lit ^ lit ^ ~lit`` with unicode glyphs."""
    for f in rule.positive + rule.negated:
        facts.index_of(f)  # raises on unknown ids
    literals = sorted(
        [(facts.index_of(f), f, False) for f in rule.positive]
        + [(facts.index_of(f), f, True) for f in rule.negated])
    body = " ∧ ".join(("¬" if neg else "") + f for _, f, neg in literals)
    return f"{classes.names[rule.top_class]} ← {body}"
