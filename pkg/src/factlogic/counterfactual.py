"""Minimal-intervention counterfactual search over the fact layer."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .model import RuleModel

EXACT_SEARCH_FACT_CAP = 15


class NoCounterfactual(Exception):
    """No intervention within the cardinality budget flips the prediction."""


class SearchTimeout(Exception):
    """Exact search exceeded its wall-clock budget."""


@dataclass
class CounterfactualResult:
    interventions: dict[str, int]      # fact id -> hard value in {0, 1}
    cardinality: int
    original_label: int
    original_posterior: np.ndarray
    new_label: int
    new_posterior: np.ndarray
    risk_delta: float                  # change in total risk-class probability
    complete: bool                     # exact (minimal) vs greedy
    provenance: dict = field(default_factory=dict)


def _risk_prob(posterior: np.ndarray, risk_indices: list[int]) -> float:
    return float(sum(posterior[i] for i in risk_indices))


def apply_interventions(confidences: np.ndarray, interventions: dict[int, int]) -> np.ndarray:
    out = np.asarray(confidences, dtype=np.float64).copy()
    for i, v in interventions.items():
        out[i] = float(v)
    return out


def _result(model: RuleModel, c: np.ndarray, interventions: dict[int, int],
            original_label: int, original_posterior: np.ndarray,
            complete: bool) -> CounterfactualResult:
    new_c = apply_interventions(c, interventions)
    new_post, _ = model.reason_on_facts(new_c)
    new_label = int(np.argmax(new_post))
    if new_label == original_label:
        raise AssertionError("returned intervention does not flip the prediction")
    risk = model.classes.risk_indices
    return CounterfactualResult(
        interventions={model.facts.ids[i]: v for i, v in sorted(interventions.items())},
        cardinality=len(interventions),
        original_label=original_label,
        original_posterior=original_posterior,
        new_label=new_label,
        new_posterior=new_post,
        risk_delta=_risk_prob(new_post, risk) - _risk_prob(original_posterior, risk),
        complete=complete,
    )


def _candidate_values(c: np.ndarray, i: int) -> list[int]:
    """Skip identity interventions on facts already hard at 0 or 1."""
    vals = []
    if c[i] != 0.0:
        vals.append(0)
    if c[i] != 1.0:
        vals.append(1)
    return vals


def exact_search(model: RuleModel, confidences: np.ndarray, max_card: int = 3,
                 force: bool = False,
                 time_budget: float | None = None) -> CounterfactualResult:
    """Iterative deepening over intervention cardinality; guaranteed minimal.

    Ties at the minimal cardinality resolve to the largest post-flip posterior
    margin, then to the lowest fact indices (enumeration order).  With a
    `time_budget` in seconds, raises SearchTimeout once exceeded.
    """
    c = np.asarray(confidences, dtype=np.float64)
    n = len(c)
    if n > EXACT_SEARCH_FACT_CAP and not force:
        raise ValueError(
            f"exact search capped at {EXACT_SEARCH_FACT_CAP} facts (got {n}); "
            "use greedy_search or force=True")
    deadline = None if time_budget is None else time.monotonic() + time_budget
    orig_post, _ = model.reason_on_facts(c)
    orig_label = int(np.argmax(orig_post))
    for card in range(1, max_card + 1):
        best: tuple[float, tuple, dict[int, int]] | None = None
        for subset in itertools.combinations(range(n), card):
            if deadline is not None and time.monotonic() > deadline:
                raise SearchTimeout(
                    f"exact search exceeded {time_budget:.3f}s budget")
            value_choices = [_candidate_values(c, i) for i in subset]
            for values in itertools.product(*value_choices):
                iv = dict(zip(subset, values))
                new_post, _ = model.reason_on_facts(apply_interventions(c, iv))
                new_label = int(np.argmax(new_post))
                if new_label == orig_label:
                    continue
                runner_up = float(np.partition(new_post, -2)[-2])
                margin = float(new_post[new_label]) - runner_up
                key = (-margin, subset + values)
                if best is None or key < best[1]:
                    best = (margin, key, iv)
        if best is not None:
            return _result(model, c, best[2], orig_label, orig_post, complete=True)
    raise NoCounterfactual(f"no flipping intervention within cardinality {max_card}")


def greedy_search(model: RuleModel, confidences: np.ndarray,
                  max_card: int = 3) -> CounterfactualResult:
    """Repeatedly apply the single intervention that most lowers the original
    class posterior; scalable fallback, not guaranteed minimal."""
    c = np.asarray(confidences, dtype=np.float64)
    orig_post, _ = model.reason_on_facts(c)
    orig_label = int(np.argmax(orig_post))
    current = c.copy()
    chosen: dict[int, int] = {}
    for _ in range(max_card):
        best = None
        for i in range(len(c)):
            if i in chosen:
                continue
            for v in _candidate_values(current, i):
                post, _ = model.reason_on_facts(apply_interventions(current, {i: v}))
                drop = float(orig_post[orig_label]) - float(post[orig_label])
                score = float(post[orig_label])
                if best is None or score < best[0]:
                    best = (score, i, v, post)
        if best is None:
            break
        _, i, v, post = best
        chosen[i] = v
        current[i] = float(v)
        if int(np.argmax(post)) != orig_label:
            return _result(model, c, chosen, orig_label, orig_post, complete=False)
    raise NoCounterfactual(f"greedy search found no flip within cardinality {max_card}")


def sensitivity_report(model: RuleModel, confidences: np.ndarray) -> list[dict]:
    """All single-fact hard interventions, sorted by risk-probability delta."""
    c = np.asarray(confidences, dtype=np.float64)
    orig_post, _ = model.reason_on_facts(c)
    orig_label = int(np.argmax(orig_post))
    risk = model.classes.risk_indices
    base_risk = _risk_prob(orig_post, risk)
    rows = []
    for i in range(len(c)):
        for v in _candidate_values(c, i):
            post, _ = model.reason_on_facts(apply_interventions(c, {i: v}))
            rows.append({
                "fact_id": model.facts.ids[i],
                "fact_index": i,
                "value": v,
                "posterior": post,
                "risk_delta": _risk_prob(post, risk) - base_risk,
                "label_change": int(np.argmax(post)) != orig_label,
            })
    rows.sort(key=lambda r: (r["risk_delta"], r["fact_index"], r["value"]))
    return rows
