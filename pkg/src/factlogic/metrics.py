"""Evaluation metrics: standard classification scores plus the compositional,
counterfactual, and fact-grounding measures."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from sklearn.metrics import f1_score, precision_recall_fscore_support, roc_auc_score

from .counterfactual import NoCounterfactual, exact_search
from .generator import Dataset
from .model import RuleModel, predict_dataset
from .trainer import dataset_arrays


@dataclass
class MetricsReport:
    accuracy: float
    macro_f1: float
    per_class_precision: list[float]
    per_class_recall: list[float]
    auc: float | None
    top_k_recall: float            # mR@k
    top_k_precision: float         # m@P
    k: int
    false_alarm_rate: float | None  # F@R, non-risk ground truth only
    fact_accuracy: float | None     # mS@Acc at threshold 0.5
    cgs: float | None               # accuracy on the held-out-composition split
    npr: float | None               # correct novel-combination rate on that split
    cf_validity: float | None       # CF@val
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


def _top_k(posteriors: np.ndarray, labels: np.ndarray, k: int) -> tuple[float, float]:
    k = min(k, posteriors.shape[1])
    topk = np.argsort(-posteriors, axis=1)[:, :k]
    hits = (topk == labels[:, None]).any(axis=1)
    return float(hits.mean()), float(hits.mean() / k)


def evaluate(
    model: RuleModel,
    dataset: Dataset,
    counterfactual_engine: bool = True,
    compositional_test: Dataset | None = None,
    train_census: dict[str, int] | None = None,
    cf_max_card: int = 3,
    cf_sample_cap: int = 200,
    k: int = 5,
) -> MetricsReport:
    X, y, p_star = dataset_arrays(dataset.scenarios)
    conf, post = predict_dataset(model, X)
    pred = post.argmax(axis=1)
    n_classes = model.config.n_classes

    accuracy = float((pred == y).mean())
    macro_f1 = float(f1_score(y, pred, average="macro",
                              labels=list(range(n_classes)), zero_division=0))
    prec, rec, _, _ = precision_recall_fscore_support(
        y, pred, labels=list(range(n_classes)), zero_division=0)
    try:
        auc = float(roc_auc_score(y, post, multi_class="ovr",
                                  labels=list(range(n_classes)), average="macro"))
    except ValueError:
        auc = None  # a class absent from the ground truth

    mr_k, mp_k = _top_k(post, y, k)

    risk = set(model.classes.risk_indices)
    non_risk_mask = ~np.isin(y, list(risk))
    if non_risk_mask.sum() > 0 and risk:
        false_alarm = float(np.isin(pred[non_risk_mask], list(risk)).mean())
    else:
        false_alarm = None

    fact_accuracy = float(((conf > 0.5).astype(float) == p_star).mean())

    cgs = npr = None
    if compositional_test is not None and len(compositional_test) > 0:
        Xc, yc, _ = dataset_arrays(compositional_test.scenarios)
        _, post_c = predict_dataset(model, Xc)
        pred_c = post_c.argmax(axis=1)
        cgs = float((pred_c == yc).mean())
        if train_census is not None:
            novel = np.asarray([
                "".join(str(int(b)) for b in s.fact_bits) not in train_census
                for s in compositional_test.scenarios])
            npr = float((pred_c[novel] == yc[novel]).mean()) if novel.sum() else None

    cf_validity = None
    if counterfactual_engine and risk:
        risk_pred_idx = [i for i in range(len(y)) if pred[i] in risk][:cf_sample_cap]
        if risk_pred_idx:
            flipped = 0
            for i in risk_pred_idx:
                try:
                    exact_search(model, conf[i], max_card=cf_max_card)
                    flipped += 1
                except NoCounterfactual:
                    continue
            cf_validity = flipped / len(risk_pred_idx)

    return MetricsReport(
        accuracy=accuracy,
        macro_f1=macro_f1,
        per_class_precision=[float(x) for x in prec],
        per_class_recall=[float(x) for x in rec],
        auc=auc,
        top_k_recall=mr_k,
        top_k_precision=mp_k,
        k=k,
        false_alarm_rate=false_alarm,
        fact_accuracy=fact_accuracy,
        cgs=cgs,
        npr=npr,
        cf_validity=cf_validity,
        extras={"n_samples": len(y)},
    )
