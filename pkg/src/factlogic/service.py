"""HTTP inference service over an immutable trained model snapshot.

Endpoints: GET /health, /model, /rules; POST /infer, /counterfactual, /whatif.
Error contract: malformed body -> 400 with field-level detail; vocabulary
mismatch -> 422; exact-search timeout -> 504 carrying the greedy fallback
result flagged incomplete.
"""
from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .counterfactual import (CounterfactualResult, NoCounterfactual,
                             SearchTimeout, exact_search, greedy_search)
from .explain import build_explanation
from .extraction import RuleSet
from .model import RuleModel
from .persistence import ruleset_to_doc


class VocabularyMismatch(ValueError):
    """Request references facts or shapes the model does not know."""


Confidences = dict[str, float] | list[float]


class InferRequest(BaseModel):
    confidences: Confidences | None = None
    features: list[list[float]] | None = None
    exact_counterfactual: bool = False
    max_card: int = Field(default=3, ge=1)


class CounterfactualRequest(BaseModel):
    confidences: Confidences
    exact: bool = True
    max_card: int = Field(default=3, ge=1)


class WhatIfRequest(BaseModel):
    confidences: Confidences
    fact_id: str
    value: float = Field(ge=0.0, le=1.0)


def _parse_confidences(model: RuleModel, raw: Confidences) -> np.ndarray:
    if isinstance(raw, dict):
        unknown = sorted(set(raw) - set(model.facts.ids))
        if unknown:
            raise VocabularyMismatch(f"unknown fact ids: {unknown}")
        missing = sorted(set(model.facts.ids) - set(raw))
        if missing:
            raise VocabularyMismatch(f"missing fact ids: {missing}")
        c = np.asarray([raw[f] for f in model.facts.ids], dtype=np.float64)
    else:
        c = np.asarray(raw, dtype=np.float64)
        if c.shape != (len(model.facts),):
            raise VocabularyMismatch(
                f"expected {len(model.facts)} fact confidences, got {c.shape}")
    if np.any(c < 0.0) or np.any(c > 1.0):
        raise VocabularyMismatch("fact confidences must lie in [0, 1]")
    return c


def _parse_features(model: RuleModel, raw: list[list[float]]) -> np.ndarray:
    x = np.asarray(raw, dtype=np.float64)
    expected = (model.config.n_views, model.config.feat_dim)
    if x.shape != expected:
        raise VocabularyMismatch(
            f"expected per-view features of shape {expected}, got {x.shape}")
    return x


def _cf_payload(model: RuleModel, result: CounterfactualResult) -> dict:
    return {
        "found": True,
        "interventions": result.interventions,
        "cardinality": result.cardinality,
        "original_label": model.classes.names[result.original_label],
        "original_posterior": result.original_posterior.tolist(),
        "new_label": model.classes.names[result.new_label],
        "new_posterior": result.new_posterior.tolist(),
        "risk_delta": result.risk_delta,
        "complete": result.complete,
    }


def create_app(model: RuleModel, ruleset: RuleSet | None = None,
               cf_time_budget: float = 5.0) -> FastAPI:
    """The model (and optional rule set) are captured once and never mutated."""
    app = FastAPI(title="factlogic", docs_url=None, redoc_url=None)
    rules_doc = ruleset_to_doc(ruleset, model) if ruleset is not None else {"rules": []}

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request, exc):  # noqa: ANN001
        return JSONResponse(status_code=400, content={
            "error": "malformed request body",
            "detail": [{"field": ".".join(str(p) for p in e["loc"]),
                        "message": e["msg"]} for e in exc.errors()],
        })

    @app.exception_handler(VocabularyMismatch)
    async def vocab_mismatch(request, exc):  # noqa: ANN001
        return JSONResponse(status_code=422,
                            content={"error": "vocabulary mismatch",
                                     "detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/model")
    def model_info() -> dict:
        return {
            "facts": model.facts.ids,
            "classes": [{"name": c.name, "risk": c.risk}
                        for c in model.classes.classes],
            "config": model.config.to_dict(),
            "metadata": model.metadata,
        }

    @app.get("/rules")
    def rules() -> dict:
        return rules_doc

    @app.post("/infer")
    def infer(req: InferRequest) -> dict:
        if (req.confidences is None) == (req.features is None):
            raise VocabularyMismatch(
                "provide exactly one of 'confidences' or 'features'")
        graph = None
        if req.features is not None:
            graph = model.perceive(_parse_features(model, req.features))
            c = graph.confidences
        else:
            c = _parse_confidences(model, req.confidences)
        return build_explanation(model, c, ruleset=ruleset, fact_graph=graph,
                                 exact_cf=req.exact_counterfactual,
                                 cf_max_card=req.max_card)

    @app.post("/counterfactual")
    def counterfactual(req: CounterfactualRequest):
        c = _parse_confidences(model, req.confidences)
        try:
            if req.exact:
                result = exact_search(model, c, max_card=req.max_card,
                                      time_budget=cf_time_budget)
            else:
                result = greedy_search(model, c, max_card=req.max_card)
        except NoCounterfactual as err:
            return {"found": False, "detail": str(err)}
        except SearchTimeout as err:
            try:
                partial = _cf_payload(model, greedy_search(model, c,
                                                           max_card=req.max_card))
                partial["complete"] = False
            except NoCounterfactual:
                partial = None
            return JSONResponse(status_code=504, content={
                "error": "exact search timed out",
                "detail": str(err),
                "partial": partial,
            })
        return _cf_payload(model, result)

    @app.post("/whatif")
    def whatif(req: WhatIfRequest) -> dict:
        c = _parse_confidences(model, req.confidences)
        try:
            idx = model.facts.index_of(req.fact_id)
        except KeyError as err:
            raise VocabularyMismatch(f"unknown fact id: {req.fact_id!r}") from err
        before_post, before_act = model.reason_on_facts(c)
        new_c = c.copy()
        new_c[idx] = req.value
        after_post, after_act = model.reason_on_facts(new_c)
        risk = model.classes.risk_indices
        return {
            "fact_id": req.fact_id,
            "value": req.value,
            "original_posterior": before_post.tolist(),
            "posterior": after_post.tolist(),
            "original_label": model.classes.names[int(np.argmax(before_post))],
            "label": model.classes.names[int(np.argmax(after_post))],
            "risk_delta": float(sum(after_post[i] - before_post[i] for i in risk)),
            "rule_deltas": [{
                "rule_index": m,
                "tau_before": float(before_act.tau[m]),
                "tau_after": float(after_act.tau[m]),
            } for m in range(model.config.n_rules)],
        }

    return app
