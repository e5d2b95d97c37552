"""Joint objective, two-phase curriculum, supervision regimes, and splits."""
import numpy as np
import pytest

from factlogic import (
    LossConfig,
    ModelConfig,
    OptimConfig,
    SparsityRamp,
    TrainConfig,
    clinic8_config,
    compositional_split,
    generate_dataset,
    reference_train_config,
    train,
)
from factlogic.trainer import compute_loss, supervision_masks


def _one_hot(n, i):
    v = np.zeros(n)
    v[i] = 1.0
    return v


class TestComputeLoss:
    def test_all_terms_at_minimum(self):
        gamma = np.zeros((2, 2, 3))
        gamma[..., 0] = 1.0
        total, comp = compute_loss(
            posterior=_one_hot(4, 1), label=1,
            confidences=np.array([1.0, 0.0, 1.0]),
            fact_bits=np.array([1.0, 0.0, 1.0]),
            fact_mask=np.ones(3), gamma=gamma, w=np.zeros((4, 2)),
            loss_cfg=LossConfig(), epoch=50.0)
        assert total == pytest.approx(0.0, abs=1e-5)

    def test_uniform_posterior_gives_ln4(self):
        total, comp = compute_loss(
            posterior=np.full(4, 0.25), label=2,
            confidences=np.array([0.5]), fact_bits=np.array([1.0]),
            fact_mask=np.zeros(1), gamma=np.ones((1, 1, 2)) / 2,
            w=np.zeros((4, 1)), loss_cfg=LossConfig(), epoch=0.0)
        assert comp["ce"] == pytest.approx(np.log(4.0), abs=1e-12)

    def test_half_confidence_bce_is_ln2_per_fact(self):
        _, comp = compute_loss(
            posterior=_one_hot(2, 0), label=0,
            confidences=np.array([0.5, 0.5]), fact_bits=np.array([1.0, 0.0]),
            fact_mask=np.ones(2), gamma=np.ones((1, 1, 2)) / 2,
            w=np.zeros((2, 1)), loss_cfg=LossConfig(), epoch=0.0)
        assert comp["fact"] == pytest.approx(2 * np.log(2.0), abs=1e-12)

    def test_masked_fact_term_reported_absent(self):
        _, comp = compute_loss(
            posterior=_one_hot(2, 0), label=0,
            confidences=np.array([0.1]), fact_bits=np.array([1.0]),
            fact_mask=np.zeros(1), gamma=np.ones((1, 1, 2)) / 2,
            w=np.zeros((2, 1)), loss_cfg=LossConfig(), epoch=0.0)
        assert comp["fact"] is None

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            compute_loss(_one_hot(2, 0), 5, np.array([0.5]), np.array([1.0]),
                         np.ones(1), np.ones((1, 1, 2)) / 2, np.zeros((2, 1)),
                         LossConfig(), 0.0)


class TestSparsityRamp:
    def test_zero_before_start(self):
        ramp = SparsityRamp(max_value=0.01, start_epoch=20, ramp_epochs=20)
        assert ramp.at(0) == 0.0
        assert ramp.at(19.9) == 0.0

    def test_reaches_max_at_ramp_end(self):
        ramp = SparsityRamp(max_value=0.01, start_epoch=20, ramp_epochs=20)
        assert ramp.at(40) == pytest.approx(0.01)
        assert ramp.at(100) == pytest.approx(0.01)

    def test_nondecreasing(self):
        ramp = SparsityRamp(max_value=0.01, start_epoch=20, ramp_epochs=20)
        vals = [ramp.at(float(e)) for e in range(100)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestSupervisionMasks:
    def test_full_is_all_ones(self):
        m = supervision_masks(10, 4, LossConfig(supervision="full"),
                              np.random.default_rng(0))
        assert np.all(m == 1.0)

    def test_weak_is_all_zeros(self):
        m = supervision_masks(10, 4, LossConfig(supervision="weak"),
                              np.random.default_rng(0))
        assert np.all(m == 0.0)

    def test_semi_fraction_approximate_and_rowwise(self):
        m = supervision_masks(5000, 4, LossConfig(supervision="semi",
                                                  semi_fraction=0.2),
                              np.random.default_rng(0))
        assert np.all((m.sum(axis=1) == 0) | (m.sum(axis=1) == 4))
        assert m[:, 0].mean() == pytest.approx(0.2, abs=0.03)


@pytest.fixture(scope="module")
def tiny_dataset():
    return generate_dataset(clinic8_config(seed=11), 200)


def _tiny_config(ds, **overrides):
    return reference_train_config(
        ds.config, seed=0,
        optim=OptimConfig(base_lr=0.03, total_epochs=8),
        warmup_phase_epochs=3, **overrides)


class TestTrain:
    def test_history_schema_and_phases(self, tiny_dataset):
        result = train(tiny_dataset, _tiny_config(tiny_dataset))
        assert len(result.history) == 8
        for rec in result.history:
            for key in ("epoch", "phase", "lr", "temperature", "lambda_s",
                        "val_accuracy", "active_rules", "loss_total"):
                assert key in rec
        assert [r["phase"] for r in result.history[:3]] == ["warmup"] * 3
        assert all(r["phase"] == "joint" for r in result.history[3:])

    def test_weak_supervision_skips_warmup_and_fact_loss(self, tiny_dataset):
        cfg = _tiny_config(tiny_dataset, loss=LossConfig(supervision="weak"))
        result = train(tiny_dataset, cfg)
        assert all(r["phase"] == "joint" for r in result.history)
        assert all(r["loss_fact"] is None for r in result.history)
        assert all(r["fact_supervision"] == "absent" for r in result.history)

    def test_determinism_across_runs(self, tiny_dataset):
        cfg = _tiny_config(tiny_dataset)
        a = train(tiny_dataset, cfg)
        b = train(tiny_dataset, cfg)
        for k in a.model.params.params:
            assert np.array_equal(a.model.params[k], b.model.params[k])
        assert a.history == b.history

    def test_empty_dataset_rejected(self, tiny_dataset):
        from factlogic.generator import Dataset
        empty = Dataset(scenarios=[], config=tiny_dataset.config, manifest={})
        with pytest.raises(ValueError):
            train(empty, _tiny_config(tiny_dataset))

    def test_loss_decomposition_in_history(self, tiny_dataset):
        result = train(tiny_dataset, _tiny_config(tiny_dataset))
        for rec in result.history:
            fact = rec["loss_fact"] or 0.0
            assert rec["loss_total"] == pytest.approx(
                rec["loss_ce"] + fact + rec["loss_sparsity"], abs=1e-9)


class TestCompositionalSplit:
    def test_pattern_never_generated_gives_empty_test(self, tiny_dataset):
        kept, held = compositional_split(
            tiny_dataset, [{"rail_down": 1, "lights_on": 1, "edge_sitting": 1,
                            "caregiver_near": 1, "legs_over_edge": 1,
                            "support_contact": 1, "on_bed": 1, "standing": 0}])
        if len(held) == 0:
            assert len(kept) == len(tiny_dataset)

    def test_holdout_moves_all_matches(self, tiny_dataset):
        pattern = {"rail_down": 1, "edge_sitting": 1, "caregiver_near": 1}
        kept, held = compositional_split(tiny_dataset, [pattern])
        idx = [tiny_dataset.config.fact_ids.index(f) for f in pattern]
        for s in held.scenarios:
            assert all(s.fact_bits[i] == 1 for i in idx)
        for s in kept.scenarios:
            assert not all(s.fact_bits[i] == 1 for i in idx)
        assert len(kept) + len(held) == len(tiny_dataset)

    def test_train_side_retains_partial_combinations(self, tiny_dataset):
        pattern = {"rail_down": 1, "edge_sitting": 1, "caregiver_near": 1}
        kept, _ = compositional_split(tiny_dataset, [pattern])
        r = tiny_dataset.config.fact_ids.index("rail_down")
        e = tiny_dataset.config.fact_ids.index("edge_sitting")
        assert any(s.fact_bits[r] == 1 for s in kept.scenarios)
        assert any(s.fact_bits[e] == 1 for s in kept.scenarios)

    def test_union_semantics_no_duplicates(self, tiny_dataset):
        kept, held = compositional_split(
            tiny_dataset, [{"rail_down": 1}, {"rail_down": 1, "edge_sitting": 1}])
        assert len(kept) + len(held) == len(tiny_dataset)
        seen = {s.index for s in kept.scenarios} | {s.index for s in held.scenarios}
        assert len(seen) == len(tiny_dataset)

    def test_emptying_a_class_rejected(self, tiny_dataset):
        with pytest.raises(ValueError):
            compositional_split(tiny_dataset, [{"on_bed": 0}, {"on_bed": 1}])

    def test_empty_spec_rejected(self, tiny_dataset):
        with pytest.raises(ValueError):
            compositional_split(tiny_dataset, [])


class TestTrainConfig:
    def test_round_trips_through_dict(self, tiny_dataset):
        cfg = _tiny_config(tiny_dataset)
        clone = TrainConfig.from_dict(cfg.to_dict())
        assert clone.to_dict() == cfg.to_dict()
