"""Human-readable persistence: checkpoints, datasets, rule sets, histories.

Everything is JSON (or JSON lines); floats serialize via repr so every value
round-trips bit-exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import LossConfig, ModelConfig, OptimConfig
from .extraction import RuleSet, SymbolicRule, render
from .generator import Dataset, GeneratorConfig, Scenario
from .model import RuleModel
from .params import ParamStore
from .vocab import ClassVocabulary, FactVocabulary

CHECKPOINT_VERSION = 1


class FormatError(ValueError):
    """Unknown or malformed persisted artifact."""


def _array_to_obj(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "data": a.reshape(-1).tolist()}


def _array_from_obj(obj: dict) -> np.ndarray:
    return np.asarray(obj["data"], dtype=np.float64).reshape(obj["shape"])


def save_checkpoint(path: str | Path, model: RuleModel,
                    history: list[dict] | None = None) -> None:
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "facts": model.facts.ids,
        "classes": [{"name": c.name, "risk": c.risk} for c in model.classes.classes],
        "model_config": model.config.to_dict(),
        "params": {k: _array_to_obj(v) for k, v in model.params.params.items()},
        "metadata": model.metadata,
        "history_digest": _history_digest(history) if history else None,
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_checkpoint(path: str | Path) -> RuleModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise FormatError(f"checkpoint is not valid JSON: {err}") from err
    version = doc.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint format version: {version!r}")
    config = ModelConfig(**doc["model_config"])
    params = ParamStore({k: _array_from_obj(v) for k, v in doc["params"].items()})
    facts = FactVocabulary.from_ids(doc["facts"])
    classes = ClassVocabulary.from_names(
        [c["name"] for c in doc["classes"]],
        risk={c["name"] for c in doc["classes"] if c["risk"]})
    return RuleModel(config=config, params=params, facts=facts, classes=classes,
                     metadata=doc.get("metadata", {}))


def _history_digest(history: list[dict]) -> dict:
    last = history[-1]
    return {
        "epochs": len(history),
        "final_val_accuracy": last.get("val_accuracy"),
        "final_active_rules": last.get("active_rules"),
        "final_loss_total": last.get("loss_total"),
    }


def save_history(path: str | Path, history: list[dict]) -> None:
    with open(path, "w") as fh:
        for record in history:
            fh.write(json.dumps(record) + "\n")


def load_history(path: str | Path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def save_dataset(directory: str | Path, dataset: Dataset) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "config.json").write_text(json.dumps(dataset.config.to_dict(), indent=1))
    (directory / "manifest.json").write_text(json.dumps(dataset.manifest, indent=1))
    with open(directory / "data.jsonl", "w") as fh:
        for s in dataset.scenarios:
            fh.write(json.dumps({
                "index": s.index,
                "fact_bits": [int(b) for b in s.fact_bits],
                "label": s.label,
                "clean_label": s.clean_label,
                "features": s.features.tolist(),
                "visibility": s.visibility.tolist(),
            }) + "\n")


def load_dataset(directory: str | Path) -> Dataset:
    directory = Path(directory)
    try:
        config = GeneratorConfig(**json.loads((directory / "config.json").read_text()))
        manifest = json.loads((directory / "manifest.json").read_text())
    except (OSError, json.JSONDecodeError, TypeError) as err:
        raise FormatError(f"cannot load dataset from {directory}: {err}") from err
    scenarios = []
    for line in (directory / "data.jsonl").read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        scenarios.append(Scenario(
            index=rec["index"],
            fact_bits=np.asarray(rec["fact_bits"], dtype=np.int64),
            label=rec["label"],
            clean_label=rec["clean_label"],
            features=np.asarray(rec["features"], dtype=np.float64),
            visibility=np.asarray(rec["visibility"], dtype=np.float64),
        ))
    return Dataset(scenarios=scenarios, config=config, manifest=manifest)


def ruleset_to_doc(ruleset: RuleSet, model: RuleModel) -> dict:
    return {
        "format_version": CHECKPOINT_VERSION,
        "provenance": ruleset.provenance,
        "warning": ruleset.warning,
        "rules": [{
            "rule_index": r.rule_index,
            "positive": list(r.positive),
            "negated": list(r.negated),
            "class_weights": r.class_weights.tolist(),
            "reliability": r.reliability,
            "text": render(r, model.facts, model.classes),
            "target_class": model.classes.names[r.top_class],
            "provenance": r.provenance,
        } for r in ruleset.rules],
    }


def save_ruleset(path: str | Path, ruleset: RuleSet, model: RuleModel) -> None:
    Path(path).write_text(json.dumps(ruleset_to_doc(ruleset, model), indent=1))


def load_ruleset(path: str | Path) -> RuleSet:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise FormatError(f"rule set is not valid JSON: {err}") from err
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported rule set version: {doc.get('format_version')!r}")
    rules = [SymbolicRule(
        rule_index=r["rule_index"],
        positive=tuple(r["positive"]),
        negated=tuple(r["negated"]),
        class_weights=np.asarray(r["class_weights"], dtype=np.float64),
        reliability=r.get("reliability"),
        provenance=r.get("provenance", {}),
    ) for r in doc["rules"]]
    return RuleSet(rules=rules, provenance=doc.get("provenance", {}),
                   warning=doc.get("warning"))
