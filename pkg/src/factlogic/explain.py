"""Assembly of explanation payloads: posterior, fact graph, fired-rule traces,
and counterfactual suggestions."""
from __future__ import annotations

import numpy as np

from .counterfactual import NoCounterfactual, exact_search, sensitivity_report
from .extraction import RuleSet, render
from .fusion import FactGraph
from .model import RuleModel


def build_explanation(
    model: RuleModel,
    confidences: np.ndarray,
    ruleset: RuleSet | None = None,
    fact_graph: FactGraph | None = None,
    exact_cf: bool = False,
    cf_max_card: int = 3,
    top_k: int = 5,
    fire_threshold: float = 0.5,
) -> dict:
    posterior, activation = model.reason_on_facts(confidences)
    predicted = int(np.argmax(posterior))
    rule_text = {}
    if ruleset is not None:
        rule_text = {r.rule_index: render(r, model.facts, model.classes)
                     for r in ruleset.rules}

    fired = []
    for m in range(model.config.n_rules):
        tau = float(activation.tau[m])
        if tau <= fire_threshold:
            continue
        fired.append({
            "rule_index": m,
            "text": rule_text.get(m),
            "tau": tau,
            "contribution": float(model.params["w"][predicted, m]) * tau,
        })
    fired.sort(key=lambda r: -r["contribution"])

    sensitivity = sensitivity_report(model, confidences)
    suggestions = [{
        "fact_id": row["fact_id"],
        "value": row["value"],
        "risk_delta": row["risk_delta"],
        "label_change": row["label_change"],
        "posterior": [float(x) for x in row["posterior"]],
    } for row in sensitivity[:top_k]]

    counterfactual = None
    if exact_cf:
        try:
            result = exact_search(model, confidences, max_card=cf_max_card)
            counterfactual = {
                "interventions": result.interventions,
                "cardinality": result.cardinality,
                "new_label": model.classes.names[result.new_label],
                "new_posterior": [float(x) for x in result.new_posterior],
                "risk_delta": result.risk_delta,
                "complete": result.complete,
            }
        except NoCounterfactual:
            counterfactual = None

    payload = {
        "predicted_class": model.classes.names[predicted],
        "posterior": {model.classes.names[i]: float(p) for i, p in enumerate(posterior)},
        "fact_graph": {
            "confidences": {f: float(c) for f, c in zip(model.facts.ids, confidences)},
            "attribution": fact_graph.attribution.tolist() if fact_graph is not None else None,
        },
        "fired_rules": fired,
        "counterfactual_suggestions": suggestions,
        "exact_counterfactual": counterfactual,
        "risk_probability": float(sum(
            posterior[i] for i in model.classes.risk_indices)),
    }
    return payload
