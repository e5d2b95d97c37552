"""Differentiable rule learning over multi-view probabilistic facts."""

from .config import LossConfig, ModelConfig, OptimConfig, SparsityRamp, TemperatureSchedule
from .counterfactual import (
    CounterfactualResult,
    NoCounterfactual,
    SearchTimeout,
    exact_search,
    greedy_search,
    sensitivity_report,
)
from .estimator import RuleInductionClassifier
from .explain import build_explanation
from .extraction import RuleSet, SymbolicRule, active_rule_count, discretize, prune, render
from .fusion import FactGraph, build_fact_graph, fuse, predict_view, view_attribution
from .generator import (
    CorrelationLink,
    Dataset,
    GeneratorConfig,
    GroundTruthRule,
    Scenario,
    bayes_oracle,
    clinic8_config,
    generate_dataset,
)
from .gradcheck import run_gradcheck
from .logic import (
    RuleActivation,
    class_posterior,
    literal_truth,
    reason,
    rule_strength,
    select_literal,
)
from .metrics import MetricsReport, evaluate
from .model import RuleModel, batched_confidences, batched_posterior, predict_dataset
from .network import Batch, finite_diff_check, forward_backward
from .optim import OptimState, optimizer_step
from .params import NumericalError, ParamStore, ShapeError
from .persistence import (
    FormatError,
    load_checkpoint,
    load_dataset,
    load_ruleset,
    save_checkpoint,
    save_dataset,
    save_ruleset,
)
from .service import create_app
from .trainer import (
    TrainConfig,
    TrainResult,
    compositional_split,
    reference_train_config,
    train,
    train_arrays,
)
from .vocab import ClassInfo, ClassVocabulary, FactVocabulary, Predicate

__all__ = [
    "Batch", "ClassInfo", "ClassVocabulary", "CorrelationLink",
    "CounterfactualResult", "Dataset", "FactGraph", "FactVocabulary",
    "FormatError", "GeneratorConfig", "GroundTruthRule", "LossConfig",
    "MetricsReport", "ModelConfig", "NoCounterfactual", "NumericalError",
    "OptimConfig", "OptimState", "ParamStore", "Predicate", "RuleActivation",
    "RuleInductionClassifier", "RuleModel", "RuleSet", "Scenario",
    "SearchTimeout", "ShapeError", "SparsityRamp", "SymbolicRule",
    "TemperatureSchedule", "TrainConfig", "TrainResult", "active_rule_count",
    "batched_confidences", "batched_posterior", "bayes_oracle",
    "build_explanation", "build_fact_graph", "class_posterior",
    "clinic8_config", "compositional_split", "create_app", "discretize",
    "evaluate", "exact_search", "finite_diff_check", "forward_backward",
    "fuse", "generate_dataset", "greedy_search", "literal_truth",
    "load_checkpoint", "load_dataset", "load_ruleset", "optimizer_step",
    "predict_dataset", "predict_view", "prune", "reason",
    "reference_train_config", "render", "rule_strength", "run_gradcheck",
    "save_checkpoint", "save_dataset", "save_ruleset", "select_literal",
    "sensitivity_report", "train", "train_arrays", "view_attribution",
]
