"""Command-line interface.

Exit codes: 0 success; 2 usage error; 3 invalid input artifact (dataset,
checkpoint, config, or sample file); 4 numerical failure (gradient audit or
non-finite values); 5 no result (e.g. no counterfactual exists).
"""
from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .counterfactual import NoCounterfactual
from .explain import build_explanation
from .extraction import RuleSet, discretize, prune
from .generator import GeneratorConfig, clinic8_config, generate_dataset
from .gradcheck import run_gradcheck
from .metrics import evaluate
from .model import RuleModel, batched_confidences
from .params import NumericalError
from .persistence import (FormatError, load_checkpoint, load_dataset,
                          load_ruleset, save_checkpoint, save_dataset,
                          save_history, save_ruleset)
from .trainer import (TrainConfig, compositional_split, dataset_arrays,
                      reference_train_config, train)

EXIT_BAD_INPUT = 3
EXIT_NUMERICAL = 4
EXIT_NO_RESULT = 5


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _emit(doc: dict, out: str | None = None) -> None:
    text = json.dumps(doc, indent=1, default=_json_default)
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text)


def _fail(code: int, message: str, **extra) -> None:
    click.echo(json.dumps({"error": message, **extra}), err=True)
    sys.exit(code)


def _resolve_config(path: str) -> Path:
    """Relative config paths fall back to FACTLOGIC_CONFIG_DIR."""
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    base = os.environ.get("FACTLOGIC_CONFIG_DIR")
    if base and (Path(base) / p).exists():
        return Path(base) / p
    return p


def _read_json(path: str, kind: str) -> dict:
    p = _resolve_config(path)
    try:
        return json.loads(p.read_text())
    except OSError as err:
        _fail(EXIT_BAD_INPUT, f"cannot read {kind} file: {err}")
    except json.JSONDecodeError as err:
        _fail(EXIT_BAD_INPUT, f"{kind} file is not valid JSON: {err}", path=str(p))


def structured_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FormatError as err:
            _fail(EXIT_BAD_INPUT, str(err))
        except NumericalError as err:
            _fail(EXIT_NUMERICAL, str(err), tensor=err.tensor_name)
        except (ValueError, TypeError, KeyError, OSError) as err:
            _fail(EXIT_BAD_INPUT, str(err))
    return wrapper


@click.group()
def main() -> None:
    """Rule-induction toolchain: data generation, training, evaluation,
    rule export, explanation, serving, and gradient auditing."""


@main.command()
@click.option("--config", "config_path", default=None,
              help="Generator config JSON; defaults to the clinic-8 reference scenario.")
@click.option("--count", type=int, required=True, help="Number of samples.")
@click.option("--out", required=True, help="Output dataset directory.")
@click.option("--seed", type=int, default=None, help="Override the generator seed.")
@structured_errors
def generate(config_path: str | None, count: int, out: str, seed: int | None) -> None:
    """Sample a synthetic dataset with a known rule system."""
    if config_path:
        cfg = GeneratorConfig(**_read_json(config_path, "generator config"))
        if seed is not None:
            cfg = GeneratorConfig(**{**cfg.to_dict(), "seed": seed})
    else:
        cfg = clinic8_config(**({"seed": seed} if seed is not None else {}))
    dataset = generate_dataset(cfg, count)
    save_dataset(out, dataset)
    _emit({"out": out, "count": count, "config_hash": cfg.config_hash(),
           "class_histogram": dataset.manifest["class_histogram"]})


@main.command(name="train")
@click.option("--data", required=True, help="Dataset directory.")
@click.option("--config", "config_path", default=None,
              help="Training config JSON; defaults to the reference configuration.")
@click.option("--seed", type=int, default=None, help="Override the training seed.")
@click.option("--out", required=True, help="Checkpoint output path.")
@click.option("--history", "history_path", default=None,
              help="Per-epoch history JSONL path (default: <out>.history.jsonl).")
@structured_errors
def train_cmd(data: str, config_path: str | None, seed: int | None,
              out: str, history_path: str | None) -> None:
    """Two-phase training run producing a checkpoint and history records."""
    dataset = load_dataset(data)
    if config_path:
        cfg = TrainConfig.from_dict(_read_json(config_path, "training config"))
        if seed is not None:
            cfg.seed = seed
    else:
        cfg = reference_train_config(dataset.config, seed=seed if seed is not None else 0)
    result = train(dataset, cfg)
    save_checkpoint(out, result.model, history=result.history)
    hpath = history_path or f"{out}.history.jsonl"
    save_history(hpath, result.history)
    final = result.history[-1] if result.history else {}
    _emit({"out": out, "history": hpath,
           "epochs": len(result.history),
           "val_accuracy": final.get("val_accuracy"),
           "active_rules": final.get("active_rules")})



@main.command(name="eval")
@click.option("--ckpt", required=True, help="Checkpoint path.")
@click.option("--data", required=True, help="Dataset directory.")
@click.option("--compositional", "comp_path", default=None,
              help='JSON file {"holdout": [{fact_id: bit, ...}, ...]} defining '
                   "held-out fact combinations.")
@click.option("--out", default=None, help="Write the report here instead of stdout.")
@click.option("--no-counterfactual", is_flag=True,
              help="Skip counterfactual validity (faster).")
@structured_errors
def eval_cmd(ckpt: str, data: str, comp_path: str | None, out: str | None,
             no_counterfactual: bool) -> None:
    """Full metrics report; optionally with a compositional-generalization split."""
    model = load_checkpoint(ckpt)
    dataset = load_dataset(data)
    comp_test = None
    census = None
    if comp_path:
        spec = _read_json(comp_path, "compositional split")
        dataset, comp_test = compositional_split(dataset, spec["holdout"])
        census = dataset.manifest["fact_combination_census"]
    report = evaluate(model, dataset,
                      counterfactual_engine=not no_counterfactual,
                      compositional_test=comp_test, train_census=census)
    _emit(report.to_dict(), out)


@main.command()
@click.option("--ckpt", required=True, help="Checkpoint path.")
@click.option("--data", default=None,
              help="Validation dataset directory for reliability pruning; "
                   "without it only the length filter applies.")
@click.option("--tau-prune", type=float, default=0.5, show_default=True,
              help="Literal selection threshold.")
@click.option("--rho-min", type=float, default=0.1, show_default=True,
              help="Minimum validation firing rate.")
@click.option("--out", required=True, help="Rule set output path.")
@structured_errors
def rules(ckpt: str, data: str | None, tau_prune: float, rho_min: float,
          out: str) -> None:
    """Discretize learned parameters into a symbolic rule set."""
    model = load_checkpoint(ckpt)
    candidates = discretize(model.params, model.config, model.facts, tau_prune)
    if data:
        dataset = load_dataset(data)
        X, y, _ = dataset_arrays(dataset.scenarios)
        conf = batched_confidences(model.params, X, model.config)
        ruleset = prune(candidates, model.facts, conf, y, rho_min=rho_min)
    else:
        kept = [r for r in candidates if r.size >= 2]
        ruleset = RuleSet(rules=kept, provenance={
            "note": "no validation data; reliability pruning skipped"})
    save_ruleset(out, ruleset, model)
    _emit({"out": out, "n_rules": len(ruleset.rules),
           "warning": ruleset.warning})


@main.command()
@click.option("--ckpt", required=True, help="Checkpoint path.")
@click.option("--sample", "sample_path", required=True,
              help='JSON file with "confidences" (list or {fact_id: value}) '
                   'or "features" (n_views x feat_dim).')
@click.option("--rules", "rules_path", default=None,
              help="Rule set export used for rendered rule text.")
@click.option("--exact-cf", is_flag=True, help="Include the exact minimal counterfactual.")
@click.option("--max-card", type=int, default=3, show_default=True)
@click.option("--out", default=None)
@structured_errors
def explain(ckpt: str, sample_path: str, rules_path: str | None,
            exact_cf: bool, max_card: int, out: str | None) -> None:
    """Explanation payload: posterior, fired rules, counterfactual suggestions."""
    model = load_checkpoint(ckpt)
    sample = _read_json(sample_path, "sample")
    graph = None
    if "features" in sample:
        x = np.asarray(sample["features"], dtype=np.float64)
        expected = (model.config.n_views, model.config.feat_dim)
        if x.shape != expected:
            _fail(EXIT_BAD_INPUT,
                  f"expected features of shape {expected}, got {x.shape}")
        graph = model.perceive(x)
        c = graph.confidences
    elif "confidences" in sample:
        raw = sample["confidences"]
        if isinstance(raw, dict):
            try:
                c = np.asarray([raw[f] for f in model.facts.ids], dtype=np.float64)
            except KeyError as err:
                _fail(EXIT_BAD_INPUT, f"sample missing fact {err}")
        else:
            c = np.asarray(raw, dtype=np.float64)
        if c.shape != (len(model.facts),):
            _fail(EXIT_BAD_INPUT,
                  f"expected {len(model.facts)} confidences, got {c.shape}")
    else:
        _fail(EXIT_BAD_INPUT, "sample must contain 'confidences' or 'features'")
    ruleset = load_ruleset(rules_path) if rules_path else None
    payload = build_explanation(model, c, ruleset=ruleset, fact_graph=graph,
                                exact_cf=exact_cf, cf_max_card=max_card)
    _emit(payload, out)


@main.command()
@click.option("--ckpt", required=True, help="Checkpoint path.")
@click.option("--rules", "rules_path", required=True, help="Rule set export path.")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--cf-budget", type=float, default=5.0, show_default=True,
              help="Wall-clock budget (seconds) per exact counterfactual search.")
@structured_errors
def serve(ckpt: str, rules_path: str, port: int, host: str, cf_budget: float) -> None:
    """Run the HTTP inference service until interrupted."""
    import uvicorn

    from .service import create_app
    model = load_checkpoint(ckpt)
    ruleset = load_ruleset(rules_path)
    app = create_app(model, ruleset, cf_time_budget=cf_budget)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cases", type=int, default=100, show_default=True)
@click.option("--tol", type=float, default=1e-4, show_default=True)
@structured_errors
def gradcheck(seed: int, cases: int, tol: float) -> None:
    """Audit analytic gradients against the finite-difference oracle."""
    report = run_gradcheck(seed=seed, n_cases=cases, tol=tol)
    _emit(report)
    if not report["passed"]:
        sys.exit(EXIT_NUMERICAL)


if __name__ == "__main__":
    main()
