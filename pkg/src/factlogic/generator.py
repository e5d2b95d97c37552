"""Synthetic clinical-scenario generator with a known ground-truth rule set.

Labels come from a deterministic rule evaluation over sampled fact bits, so the
generator doubles as the Bayes-optimal reference classifier for every corpus it
emits.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field, asdict

import numpy as np

from .vocab import ClassVocabulary, FactVocabulary


@dataclass(frozen=True)
class GroundTruthRule:
    positive: tuple[str, ...]
    negated: tuple[str, ...]
    target_class: str
    priority: int

    def fires(self, bits: dict[str, int]) -> bool:
        return all(bits[f] == 1 for f in self.positive) and all(bits[f] == 0 for f in self.negated)


@dataclass(frozen=True)
class CorrelationLink:
    """Overrides the child's prior when the parent bit is 1 (parent index < child index)."""

    parent: str
    child: str
    prob_given_parent: float


@dataclass
class GeneratorConfig:
    fact_ids: list[str]
    class_names: list[str]
    risk_classes: list[str]
    default_class: str
    priors: list[float]
    rules: list[GroundTruthRule]
    correlations: list[CorrelationLink] = field(default_factory=list)
    n_views: int = 3
    feat_dim: int = 16
    occlusion_prob: float = 0.2
    noise_scale: float = 0.1
    label_noise: float = 0.05
    seed: int = 0
    allow_full_occlusion: bool = False

    def __post_init__(self) -> None:
        if len(self.priors) != len(self.fact_ids):
            raise ValueError("priors length must match fact_ids")
        if any(not (0.0 < p < 1.0) for p in self.priors):
            raise ValueError("priors must lie in (0, 1)")
        if not (0.0 <= self.occlusion_prob < 1.0):
            raise ValueError("occlusion_prob must lie in [0, 1)")
        if self.default_class not in self.class_names:
            raise ValueError("default_class must be one of class_names")
        self.rules = [
            GroundTruthRule(tuple(r["positive"]), tuple(r["negated"]), r["target_class"], r["priority"])
            if isinstance(r, dict) else r
            for r in self.rules
        ]
        self.correlations = [
            CorrelationLink(**l) if isinstance(l, dict) else l for l in self.correlations
        ]
        order = {f: i for i, f in enumerate(self.fact_ids)}
        for link in self.correlations:
            if order[link.parent] >= order[link.child]:
                raise ValueError("correlation links must point forward in fact order")

    @property
    def n_facts(self) -> int:
        return len(self.fact_ids)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def fact_vocabulary(self) -> FactVocabulary:
        return FactVocabulary.from_ids(self.fact_ids)

    def class_vocabulary(self) -> ClassVocabulary:
        return ClassVocabulary.from_names(self.class_names, risk=set(self.risk_classes))

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class Scenario:
    index: int
    fact_bits: np.ndarray       # (N,) ground-truth p*
    label: int                  # y*, possibly noise-corrupted
    clean_label: int            # rule evaluation before label noise
    features: np.ndarray        # (V, D)
    visibility: np.ndarray      # (V, N) 1 where the fact is visible in the view


@dataclass
class Dataset:
    scenarios: list[Scenario]
    config: GeneratorConfig
    manifest: dict

    def __len__(self) -> int:
        return len(self.scenarios)


def evaluate_rules(config: GeneratorConfig, bits: np.ndarray) -> int:
    """Deterministic label: highest-priority firing rule wins, else the default class."""
    named = {f: int(b) for f, b in zip(config.fact_ids, bits)}
    best: GroundTruthRule | None = None
    for rule in config.rules:
        if rule.fires(named) and (best is None or rule.priority > best.priority):
            best = rule
    cls = best.target_class if best is not None else config.default_class
    return config.class_names.index(cls)


def bayes_oracle(config: GeneratorConfig, bits: np.ndarray) -> int:
    """The generator's own labeling function; the attainable upper bound on its data."""
    return evaluate_rules(config, bits)


def _conditional_priors(config: GeneratorConfig, sampled: np.ndarray, index: int) -> float:
    p = config.priors[index]
    fact = config.fact_ids[index]
    for link in config.correlations:
        if link.child == fact and sampled[config.fact_ids.index(link.parent)] == 1:
            p = link.prob_given_parent
    return p


def sample_fact_bits(config: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    bits = np.zeros(config.n_facts, dtype=np.int64)
    for i in range(config.n_facts):
        bits[i] = int(rng.random() < _conditional_priors(config, bits, i))
    return bits


def assignment_probability(config: GeneratorConfig, bits: np.ndarray) -> float:
    prob = 1.0
    for i in range(config.n_facts):
        p = _conditional_priors(config, bits, i)
        prob *= p if bits[i] == 1 else (1.0 - p)
    return prob


def class_distribution(config: GeneratorConfig) -> np.ndarray:
    """Exact label distribution induced by the prior (before label noise)."""
    dist = np.zeros(config.n_classes)
    for bits in itertools.product((0, 1), repeat=config.n_facts):
        arr = np.asarray(bits)
        dist[evaluate_rules(config, arr)] += assignment_probability(config, arr)
    if config.label_noise > 0:
        c = config.n_classes
        noisy = np.full(c, config.label_noise / (c - 1)) * (1.0 - dist)
        dist = dist * (1.0 - config.label_noise) + noisy
    return dist


def generator_embedding(config: GeneratorConfig) -> np.ndarray:
    """Fixed seeded random embedding from (masked bits || mask) to feature space."""
    rng = np.random.default_rng([config.seed, 0x5EED])
    n2 = 2 * config.n_facts
    return rng.normal(0.0, 1.0 / np.sqrt(n2), size=(config.feat_dim, n2))


def sample_scenario(
    config: GeneratorConfig,
    index: int,
    w_gen: np.ndarray | None = None,
) -> Scenario:
    """Draw one scenario from the per-sample rng stream derived from (seed, index)."""
    rng = np.random.default_rng([config.seed, index])
    if w_gen is None:
        w_gen = generator_embedding(config)
    bits = sample_fact_bits(config, rng)
    clean = evaluate_rules(config, bits)
    label = clean
    if config.label_noise > 0 and rng.random() < config.label_noise:
        others = [c for c in range(config.n_classes) if c != clean]
        label = int(rng.choice(others))

    v, n = config.n_views, config.n_facts
    while True:
        visibility = (rng.random(size=(v, n)) >= config.occlusion_prob).astype(np.float64)
        if config.allow_full_occlusion or visibility.max(axis=0).min() > 0:
            break

    # occluded facts contribute a neutral 0.5; the mask channel carries visibility
    encoded = np.where(visibility > 0, bits[None, :].astype(np.float64), 0.5)
    inputs = np.concatenate([encoded, visibility], axis=1)      # (V, 2N)
    features = inputs @ w_gen.T
    if config.noise_scale > 0:
        features = features + rng.normal(0.0, config.noise_scale, size=features.shape)
    return Scenario(index=index, fact_bits=bits, label=label, clean_label=clean,
                    features=features, visibility=visibility)


def generate_dataset(config: GeneratorConfig, count: int) -> Dataset:
    if count < 1:
        raise ValueError("count must be >= 1")
    w_gen = generator_embedding(config)
    scenarios = [sample_scenario(config, i, w_gen) for i in range(count)]
    histogram = Counter(s.label for s in scenarios)
    census = Counter(tuple(int(b) for b in s.fact_bits) for s in scenarios)
    manifest = {
        "config_hash": config.config_hash(),
        "count": count,
        "class_histogram": {config.class_names[k]: v for k, v in sorted(histogram.items())},
        "fact_combination_census": {"".join(map(str, k)): v for k, v in census.items()},
    }
    return Dataset(scenarios=scenarios, config=config, manifest=manifest)


def clinic8_config(**overrides) -> GeneratorConfig:
    """Reference 8-predicate, 3-view, 4-class configuration."""
    defaults = dict(
        fact_ids=[
            "rail_down", "edge_sitting", "caregiver_near", "legs_over_edge",
            "support_contact", "on_bed", "standing", "lights_on",
        ],
        class_names=["Resting", "Assisted-Transfer", "Unattended-Exit-Risk", "Fall"],
        risk_classes=["Unattended-Exit-Risk", "Fall"],
        default_class="Resting",
        priors=[0.50, 0.55, 0.50, 0.30, 0.40, 0.50, 0.40, 0.60],
        rules=[
            GroundTruthRule(("standing",), ("on_bed", "support_contact"), "Fall", 3),
            GroundTruthRule(("edge_sitting", "rail_down"), ("caregiver_near",),
                            "Unattended-Exit-Risk", 2),
            GroundTruthRule(("legs_over_edge", "caregiver_near"), (), "Assisted-Transfer", 1),
            GroundTruthRule(("on_bed",), ("edge_sitting",), "Resting", 0),
        ],
        correlations=[
            CorrelationLink("edge_sitting", "legs_over_edge", 0.75),
            CorrelationLink("on_bed", "standing", 0.15),
        ],
        n_views=3,
        feat_dim=16,
        occlusion_prob=0.2,
        noise_scale=0.1,
        label_noise=0.05,
        seed=0,
    )
    defaults.update(overrides)
    return GeneratorConfig(**defaults)
