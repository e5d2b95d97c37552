"""Discretization of soft logic into symbolic rules, pruning, rendering."""
import numpy as np
import pytest

from factlogic import (
    ClassVocabulary,
    FactVocabulary,
    ModelConfig,
    ParamStore,
    RuleSet,
    SymbolicRule,
    discretize,
    prune,
    render,
)
from factlogic.config import TemperatureSchedule


def _setup(n_facts=3, n_rules=1, n_slots=2, n_classes=2):
    cfg = ModelConfig(n_facts=n_facts, n_views=1, feat_dim=2, n_rules=n_rules,
                      n_slots=n_slots, n_classes=n_classes,
                      temperature=TemperatureSchedule(end=1.0))
    params = ParamStore.init(cfg, np.random.default_rng(0))
    params.params["Gamma"][...] = 0.0
    params.params["eta"][...] = 0.0
    params.params["w"][...] = 0.0
    facts = FactVocabulary.from_ids([f"f{i}" for i in range(n_facts)])
    return cfg, params, facts


def _set_slot(params, cfg, rule, slot, gamma_row, eta_logit):
    """Force an exact soft selection via logits at the eval temperature."""
    g = np.asarray(gamma_row, dtype=np.float64)
    logits = np.log(np.maximum(g, 1e-12)) * cfg.temperature.end
    params.params["Gamma"][rule, slot, :] = logits
    params.params["eta"][rule, slot] = eta_logit


class TestDiscretize:
    def test_one_hot_selection_positive_polarity(self):
        cfg, params, facts = _setup()
        _set_slot(params, cfg, 0, 0, [1.0, 0.0, 0.0], eta_logit=-50.0)  # gate -> 0
        rules = discretize(params, cfg, facts, tau_prune=0.5)
        assert "f0" in rules[0].positive
        assert rules[0].negated == ()

    def test_neutral_gate_leaves_slot_vacant(self):
        """alpha+ = alpha- = 0.5 at gate 0.5; the strict > excludes both."""
        cfg, params, facts = _setup()
        _set_slot(params, cfg, 0, 0, [1.0, 0.0, 0.0], eta_logit=0.0)  # gate = 0.5
        rules = discretize(params, cfg, facts, tau_prune=0.5)
        assert rules[0].positive == () and rules[0].negated == ()

    def test_soft_selection_arithmetic(self):
        """gamma = [0.6, 0.4], gate 0.1 -> alpha+ = [0.54, 0.36]; only fact 0."""
        cfg, params, facts = _setup(n_facts=2)
        eta_logit = float(np.log(0.1 / 0.9))
        _set_slot(params, cfg, 0, 0, [0.6, 0.4], eta_logit=eta_logit)
        rules = discretize(params, cfg, facts, tau_prune=0.5)
        assert rules[0].positive == ("f0",)
        assert rules[0].negated == ()

    def test_negated_polarity(self):
        cfg, params, facts = _setup()
        _set_slot(params, cfg, 0, 0, [0.0, 1.0, 0.0], eta_logit=50.0)  # gate -> 1
        rules = discretize(params, cfg, facts, tau_prune=0.5)
        assert rules[0].negated == ("f1",)

    def test_disjoint_sets_enforced_on_conflict(self):
        cfg, params, facts = _setup(n_slots=2)
        _set_slot(params, cfg, 0, 0, [1.0, 0.0, 0.0], eta_logit=-50.0)  # f0 positive
        _set_slot(params, cfg, 0, 1, [1.0, 0.0, 0.0], eta_logit=50.0)   # f0 negated
        rules = discretize(params, cfg, facts, tau_prune=0.5)
        assert not (set(rules[0].positive) & set(rules[0].negated))
        assert rules[0].size <= 1

    def test_bad_threshold_rejected(self):
        cfg, params, facts = _setup()
        with pytest.raises(ValueError):
            discretize(params, cfg, facts, tau_prune=1.5)


def _rule(positive=(), negated=(), weights=(1.0, 0.0), idx=0):
    return SymbolicRule(rule_index=idx, positive=positive, negated=negated,
                        class_weights=np.asarray(weights, dtype=np.float64))


class TestPrune:
    def test_single_literal_rule_dropped(self):
        facts = FactVocabulary.from_ids(["a", "b"])
        rs = prune([_rule(positive=("a",))], facts,
                   np.array([[1.0, 0.0]]), np.array([0]), rho_min=0.0)
        assert len(rs.rules) == 0
        assert rs.warning == "all rules pruned"

    def test_never_firing_rule_dropped(self):
        facts = FactVocabulary.from_ids(["a", "b"])
        conf = np.array([[0.0, 1.0], [0.0, 0.0]])
        rs = prune([_rule(positive=("a", "b"))], facts, conf,
                   np.array([0, 0]), rho_min=0.1)
        assert len(rs.rules) == 0

    def test_reliability_is_validation_firing_rate(self):
        facts = FactVocabulary.from_ids(["a", "b"])
        conf = np.array([[1.0, 1.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
        labels = np.array([0, 0, 0, 1])
        rs = prune([_rule(positive=("a", "b"))], facts, conf, labels, rho_min=0.1)
        assert rs.rules[0].reliability == pytest.approx(2 / 3)

    def test_ordering_by_max_class_weight(self):
        facts = FactVocabulary.from_ids(["a", "b"])
        conf = np.array([[1.0, 1.0]])
        labels = np.array([0])
        weak = _rule(positive=("a", "b"), weights=(0.5, 0.0), idx=0)
        strong = _rule(positive=("a", "b"), weights=(2.0, 0.0), idx=1)
        rs = prune([weak, strong], facts, conf, labels, rho_min=0.0)
        assert [r.rule_index for r in rs.rules] == [1, 0]

    def test_empty_validation_rejected(self):
        facts = FactVocabulary.from_ids(["a"])
        with pytest.raises(ValueError):
            prune([], facts, np.zeros((0, 1)), np.array([]), rho_min=0.1)


class TestRender:
    CLASSES = ClassVocabulary.from_names(["Rest", "Risk"], risk={"Risk"})
    FACTS = FactVocabulary.from_ids(["edge_sit", "rail_down", "caregiver_near"])

    def test_golden_rule_text(self):
        rule = _rule(positive=("edge_sit", "rail_down"),
                     negated=("caregiver_near",), weights=(0.0, 3.0))
        text = render(rule, self.FACTS, self.CLASSES)
        assert text == "Risk ← edge_sit ∧ rail_down ∧ ¬caregiver_near"

    def test_no_negations_no_negation_glyphs(self):
        rule = _rule(positive=("rail_down",), weights=(1.0, 0.0))
        assert "¬" not in render(rule, self.FACTS, self.CLASSES)

    def test_rendering_is_deterministic(self):
        rule = _rule(positive=("rail_down", "edge_sit"), negated=("caregiver_near",))
        a = render(rule, self.FACTS, self.CLASSES)
        b = render(rule, self.FACTS, self.CLASSES)
        assert a == b

    def test_literals_sorted_by_fact_index(self):
        rule = _rule(positive=("rail_down",), negated=("edge_sit",))
        text = render(rule, self.FACTS, self.CLASSES)
        assert text.index("edge_sit") < text.index("rail_down")

    def test_unknown_fact_id_rejected(self):
        rule = _rule(positive=("nonexistent", "rail_down"))
        with pytest.raises(KeyError):
            render(rule, self.FACTS, self.CLASSES)


class TestSymbolicRule:
    def test_overlapping_sets_rejected(self):
        with pytest.raises(ValueError):
            SymbolicRule(0, ("a",), ("a",), np.zeros(2))

    def test_hard_firing_semantics(self):
        facts = FactVocabulary.from_ids(["a", "b", "c"])
        rule = _rule(positive=("a",), negated=("c",))
        bits = np.array([[1, 0, 0], [1, 0, 1], [0, 0, 0], [0.9, 0.1, 0.2]])
        np.testing.assert_array_equal(rule.fires(bits, facts),
                                      [True, False, False, True])


class TestRoundTripFidelity:
    def test_near_discrete_model_agrees_with_hard_logic(self, rng):
        """With selection margins >= 5 and gates near {0, 1}, soft firing
        thresholded at 0.5 agrees with hard Boolean evaluation of the
        discretized rule on >= 95% of binarized samples."""
        from factlogic import reason

        cfg = ModelConfig(n_facts=4, n_views=1, feat_dim=2, n_rules=1, n_slots=3,
                          n_classes=2, selection_mode="deterministic",
                          temperature=TemperatureSchedule(end=0.1))
        params = ParamStore.init(cfg, rng)
        params.params["Gamma"][...] = 0.0
        params.params["Gamma"][0, 0, 0] = 6.0   # margin >= 5 on fact 0
        params.params["Gamma"][0, 1, 1] = 6.0   # fact 1
        params.params["Gamma"][0, 2, 3] = 6.0   # fact 3, negated
        params.params["eta"][0] = [-4.0, -4.0, 4.0]  # gates ~0.018 / ~0.982
        facts = FactVocabulary.from_ids([f"f{i}" for i in range(4)])
        [rule] = [r for r in discretize(params, cfg, facts) if r.size >= 2]
        assert rule.positive == ("f0", "f1") and rule.negated == ("f3",)

        # confidences concentrated near {0, 1}, as a converged perception
        # stage produces on validation data
        true_bits = rng.integers(0, 2, size=(400, 4)).astype(float)
        conf = np.clip(true_bits + rng.normal(0.0, 0.1, size=(400, 4)), 0.0, 1.0)
        bits = (conf > 0.5).astype(float)
        agree = []
        for i in range(len(conf)):
            _, act = reason(conf[i], params, cfg)
            soft_fire = act.tau[rule.rule_index] > 0.5
            agree.append(soft_fire == bool(rule.fires(bits[i], facts)))
        assert np.mean(agree) >= 0.95
