"""Shared fixtures: datasets and trained models reused across test modules.

Heavy fixtures are session-scoped; the reference runs (5 seeds on the 5000
sample clinic-8 corpus) are built once and shared by the acceptance suite.
"""
from __future__ import annotations

import numpy as np
import pytest

from factlogic import (
    OptimConfig,
    clinic8_config,
    generate_dataset,
    reference_train_config,
    train,
)
from factlogic.trainer import _subset

SEEDS = (0, 1, 2, 3, 4)


@pytest.fixture(scope="session")
def clinic_config():
    return clinic8_config(seed=1)


@pytest.fixture(scope="session")
def clinic_split(clinic_config):
    """5000 training + 1000 held-out evaluation samples from one corpus."""
    full = generate_dataset(clinic_config, 6000)
    train_ds = _subset(full, full.scenarios[:5000])
    val_ds = _subset(full, full.scenarios[5000:])
    return train_ds, val_ds


@pytest.fixture(scope="session")
def reference_results(clinic_split):
    """Reference training runs for the five acceptance seeds."""
    train_ds, val_ds = clinic_split
    return {
        seed: train(train_ds, reference_train_config(train_ds.config, seed=seed),
                    val_dataset=val_ds)
        for seed in SEEDS
    }


@pytest.fixture(scope="session")
def small_dataset():
    return generate_dataset(clinic8_config(seed=3), 400)


@pytest.fixture(scope="session")
def small_result(small_dataset):
    """A cheap, short training run for plumbing tests (quality irrelevant)."""
    cfg = reference_train_config(
        small_dataset.config, seed=0,
        optim=OptimConfig(base_lr=0.045, total_epochs=16),
        warmup_phase_epochs=4,
    )
    return train(small_dataset, cfg)


@pytest.fixture(scope="session")
def small_model(small_result):
    return small_result.model


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
