"""Two-phase curriculum training, supervision regimes, and the joint objective."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .config import LossConfig, ModelConfig, OptimConfig
from .extraction import active_rule_count
from .generator import Dataset, GeneratorConfig, Scenario
from .model import RuleModel, batched_confidences, batched_posterior
from .network import Batch, forward_backward
from .optim import OptimState, optimizer_step
from .params import FUSION_GROUPS, NumericalError, ParamStore


@dataclass
class TrainConfig:
    model: ModelConfig
    loss: LossConfig = field(default_factory=LossConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)
    batch_size: int = 32
    warmup_phase_epochs: int = 10
    seed: int = 0
    val_fraction: float = 0.15

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        doc = dict(doc)
        doc["model"] = ModelConfig(**doc["model"])
        if isinstance(doc.get("loss"), dict):
            doc["loss"] = LossConfig(**doc["loss"])
        if isinstance(doc.get("optim"), dict):
            doc["optim"] = OptimConfig(**doc["optim"])
        return cls(**doc)


def dataset_arrays(scenarios: list[Scenario]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    features = np.stack([s.features for s in scenarios])
    labels = np.asarray([s.label for s in scenarios], dtype=np.int64)
    bits = np.stack([s.fact_bits for s in scenarios]).astype(np.float64)
    return features, labels, bits


def supervision_masks(n_samples: int, n_facts: int, loss_cfg: LossConfig,
                      rng: np.random.Generator) -> np.ndarray:
    """Per-sample fact-label masks for the full/weak/semi regimes."""
    if loss_cfg.supervision == "full":
        return np.ones((n_samples, n_facts))
    if loss_cfg.supervision == "weak":
        return np.zeros((n_samples, n_facts))
    keep = rng.random(n_samples) < loss_cfg.semi_fraction
    return np.repeat(keep[:, None].astype(np.float64), n_facts, axis=1)


def compute_loss(
    posterior: np.ndarray,
    label: int,
    confidences: np.ndarray,
    fact_bits: np.ndarray,
    fact_mask: np.ndarray,
    gamma: np.ndarray,
    w: np.ndarray,
    loss_cfg: LossConfig,
    epoch: float,
) -> tuple[float, dict]:
    """Single-sample joint objective; mirrors the batched training loss."""
    posterior = np.asarray(posterior, dtype=np.float64)
    if not (0 <= label < posterior.shape[-1]):
        raise ValueError("class label out of range")
    ce = float(-np.log(max(posterior[label], 1e-300)))
    clip = loss_cfg.bce_clip
    c = np.clip(np.asarray(confidences, dtype=np.float64), clip, 1.0 - clip)
    mask = np.asarray(fact_mask, dtype=np.float64)
    p = np.asarray(fact_bits, dtype=np.float64)
    bce = -(p * np.log(c) + (1.0 - p) * np.log(1.0 - c))
    fact_raw = float((bce * mask).sum()) if mask.sum() > 0 else 0.0
    if loss_cfg.entropy_sparsity:
        g = np.asarray(gamma, dtype=np.float64)
        sel = float(-(g * np.log(np.maximum(g, 1e-300))).sum())
    else:
        sel = float(np.abs(gamma).sum())
    sparse_raw = sel + float(np.abs(w).sum())
    lam_s = loss_cfg.sparsity.at(epoch)
    components = {
        "ce": ce,
        "fact": loss_cfg.fact_weight * fact_raw if mask.sum() > 0 else None,
        "sparsity": lam_s * sparse_raw,
    }
    total = ce + loss_cfg.fact_weight * fact_raw + lam_s * sparse_raw
    return total, components


def compositional_split(
    dataset: Dataset,
    holdout_patterns: list[dict[str, int]],
) -> tuple[Dataset, Dataset]:
    """Move every sample matching a held-out fact pattern to the test side.

    Patterns use union semantics; a split that empties the training support of
    any class is rejected.
    """
    if not holdout_patterns:
        raise ValueError("holdout spec must name at least one pattern")
    cfg = dataset.config
    idx = {f: i for i, f in enumerate(cfg.fact_ids)}

    def matches(s: Scenario) -> bool:
        return any(all(s.fact_bits[idx[f]] == b for f, b in pat.items())
                   for pat in holdout_patterns)

    held = [s for s in dataset.scenarios if matches(s)]
    kept = [s for s in dataset.scenarios if not matches(s)]
    kept_classes = {s.label for s in kept}
    all_classes = {s.label for s in dataset.scenarios}
    if kept_classes != all_classes:
        missing = sorted(all_classes - kept_classes)
        raise ValueError(f"holdout empties training support of classes {missing}")
    for s in held:
        assert matches(s)
    for s in kept:
        assert not matches(s)
    return (_subset(dataset, kept), _subset(dataset, held))


def _subset(dataset: Dataset, scenarios: list[Scenario]) -> Dataset:
    from collections import Counter
    cfg = dataset.config
    histogram = Counter(s.label for s in scenarios)
    census = Counter("".join(str(int(b)) for b in s.fact_bits) for s in scenarios)
    manifest = {
        "config_hash": cfg.config_hash(),
        "count": len(scenarios),
        "class_histogram": {cfg.class_names[k]: v for k, v in sorted(histogram.items())},
        "fact_combination_census": dict(census),
    }
    return Dataset(scenarios=scenarios, config=cfg, manifest=manifest)


@dataclass
class TrainResult:
    model: RuleModel
    history: list[dict]
    optim_state: OptimState


def train(
    dataset: Dataset,
    config: TrainConfig,
    val_dataset: Dataset | None = None,
) -> TrainResult:
    """Perception warmup (fusion heads only, fact loss only), then end-to-end
    training with temperature annealing and the sparsity ramp."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(config.seed)
    gen_cfg: GeneratorConfig = dataset.config

    if val_dataset is None:
        n_val = max(1, int(len(dataset) * config.val_fraction))
        order = rng.permutation(len(dataset))
        val_scen = [dataset.scenarios[i] for i in order[:n_val]]
        train_scen = [dataset.scenarios[i] for i in order[n_val:]]
    else:
        train_scen = dataset.scenarios
        val_scen = val_dataset.scenarios

    X, y, p_star = dataset_arrays(train_scen)
    Xv, yv, _ = dataset_arrays(val_scen)
    masks = supervision_masks(len(train_scen), gen_cfg.n_facts, config.loss, rng)
    result = train_arrays(
        X, y, p_star, masks, Xv, yv, config,
        gen_cfg.fact_vocabulary(), gen_cfg.class_vocabulary(), rng,
        extra_metadata={"dataset_hash": gen_cfg.config_hash()},
    )
    return result


def train_arrays(
    X: np.ndarray,
    y: np.ndarray,
    p_star: np.ndarray,
    masks: np.ndarray,
    Xv: np.ndarray,
    yv: np.ndarray,
    config: TrainConfig,
    facts,
    classes,
    rng: np.random.Generator,
    extra_metadata: dict | None = None,
) -> TrainResult:
    """Core training loop over pre-assembled arrays."""
    have_fact_labels = masks.sum() > 0

    params = ParamStore.init(config.model, rng)
    opt = OptimState.init(params, config.optim)

    n = len(y)
    steps_per_epoch = max(1, int(np.ceil(n / config.batch_size)))
    history: list[dict] = []
    warmup_epochs = config.warmup_phase_epochs if have_fact_labels else 0
    frozen_snapshot = {k: params[k].copy() for k in ("Gamma", "eta", "w", "beta")}

    for epoch in range(config.optim.total_epochs):
        in_warmup = epoch < warmup_epochs
        order = rng.permutation(n)
        sums: dict[str, float] = {}
        n_batches = 0
        for step in range(steps_per_epoch):
            sel = order[step * config.batch_size:(step + 1) * config.batch_size]
            if len(sel) == 0:
                continue
            batch = Batch(X[sel], y[sel], p_star[sel], masks[sel])
            frac_epoch = epoch + step / steps_per_epoch
            try:
                total, trace = forward_backward(
                    params, batch, config.model, config.loss,
                    epoch=frac_epoch, rng=rng,
                    ce_weight=0.0 if in_warmup else 1.0,
                )
                optimizer_step(params, opt, frac_epoch,
                               groups=FUSION_GROUPS if in_warmup else None)
            except NumericalError as err:
                raise NumericalError(
                    f"{err.tensor_name} (epoch {epoch}, step {step})") from err
            for k, v in trace.components.items():
                if v is not None:
                    sums[k] = sums.get(k, 0.0) + float(v)
            sums["total"] = sums.get("total", 0.0) + total
            n_batches += 1

        if in_warmup:
            for k, snap in frozen_snapshot.items():
                assert np.array_equal(params[k], snap), "reasoning params moved in warmup"

        cv = batched_confidences(params, Xv, config.model)
        post = batched_posterior(params, cv, config.model, hard=True)
        val_acc = float((post.argmax(axis=-1) == yv).mean())
        record = {
            "epoch": epoch,
            "phase": "warmup" if in_warmup else "joint",
            "lr": config.optim.lr_at(float(epoch)),
            "temperature": config.model.temperature.at(float(epoch)),
            "lambda_s": config.loss.sparsity.at(float(epoch)),
            "val_accuracy": val_acc,
            "active_rules": active_rule_count(params, config.model, facts),
            "fact_supervision": "absent" if not have_fact_labels else config.loss.supervision,
        }
        for k, v in sums.items():
            record[f"loss_{k}"] = v / max(n_batches, 1)
        if not have_fact_labels:
            record["loss_fact"] = None
        history.append(record)

    metadata = {"train_config": config.to_dict(), "warmup_epochs_run": warmup_epochs}
    metadata.update(extra_metadata or {})
    model = RuleModel(config=config.model, params=params, facts=facts, classes=classes,
                      metadata=metadata)
    return TrainResult(model=model, history=history, optim_state=opt)


def reference_train_config(gen_cfg: GeneratorConfig, seed: int = 0, **overrides) -> TrainConfig:
    """Training configuration used for the clinic-8 reference runs.

    Straight-through hard selection and a larger base lr than the schedule
    default; both are what make rule structure crisp at this data scale.
    """
    model = ModelConfig(
        n_facts=gen_cfg.n_facts, n_views=gen_cfg.n_views, feat_dim=gen_cfg.feat_dim,
        n_classes=gen_cfg.n_classes, hard_forward=True,
        **overrides.pop("model_overrides", {}),
    )
    defaults = dict(model=model, optim=OptimConfig(base_lr=0.045), seed=seed)
    defaults.update(overrides)
    return TrainConfig(**defaults)
