"""Randomized gradient audit: many small seeded configurations against the
finite-difference oracle."""
from __future__ import annotations

import numpy as np

from .config import LossConfig, ModelConfig, SparsityRamp
from .network import Batch, finite_diff_check
from .params import ParamStore


def random_case(rng: np.random.Generator) -> tuple[ParamStore, Batch, ModelConfig, LossConfig, float]:
    config = ModelConfig(
        n_facts=int(rng.integers(2, 9)),
        n_views=int(rng.integers(1, 4)),
        feat_dim=int(rng.integers(2, 7)),
        n_rules=int(rng.integers(1, 5)),
        n_slots=int(rng.integers(1, 4)),
        n_classes=int(rng.integers(2, 5)),
        selection_mode="sampled" if rng.random() < 0.5 else "deterministic",
        attribution_eps=float(rng.choice([0.0, 1e-8, 1e-3])),
    )
    params = ParamStore.init(config, rng)
    for k in params.params:
        params.params[k] = params.params[k] + rng.normal(0.0, 0.5, params.params[k].shape)
    b = int(rng.integers(1, 5))
    batch = Batch(
        features=rng.normal(size=(b, config.n_views, config.feat_dim)),
        labels=rng.integers(0, config.n_classes, size=b),
        fact_bits=rng.integers(0, 2, size=(b, config.n_facts)).astype(float),
        fact_mask=(rng.random((b, config.n_facts)) < 0.8).astype(float),
    )
    loss_cfg = LossConfig(
        fact_weight=float(rng.choice([0.0, 0.5, 1.0])),
        sparsity=SparsityRamp(max_value=float(rng.choice([0.0, 0.01, 0.1])),
                              start_epoch=0, ramp_epochs=0),
    )
    epoch = float(rng.uniform(0.0, 100.0))
    return params, batch, config, loss_cfg, epoch


def run_gradcheck(seed: int = 0, n_cases: int = 100, h: float = 1e-5,
                  tol: float = 1e-4) -> dict:
    """Returns a summary report; `passed` is the overall verdict."""
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    failures = []
    for case in range(n_cases):
        params, batch, config, loss_cfg, epoch = random_case(rng)
        report = finite_diff_check(params, batch, config, loss_cfg,
                                   epoch=epoch, h=h, tol=tol, rng=rng)
        for group, res in report["groups"].items():
            worst[group] = max(worst.get(group, 0.0), res["max_rel_error"])
        if not report["passed"]:
            failures.append({"case": case, "groups": {
                g: r for g, r in report["groups"].items() if not r["passed"]}})
    return {
        "seed": seed, "n_cases": n_cases, "h": h, "tol": tol,
        "worst_by_group": worst,
        "failures": failures,
        "passed": not failures,
    }
