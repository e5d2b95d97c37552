/** Wire types for the factlogic HTTP service. */

export interface ClassInfo {
  name: string;
  risk: boolean;
}

export interface ModelInfo {
  facts: string[];
  classes: ClassInfo[];
  config: Record<string, unknown>;
  metadata: Record<string, unknown>;
}

export interface RuleDoc {
  rule_index: number;
  positive: string[];
  negated: string[];
  class_weights: number[];
  reliability: number | null;
  text: string;
  target_class: string;
}

export interface RulesDoc {
  rules: RuleDoc[];
  warning?: string | null;
}

export interface FiredRule {
  rule_index: number;
  text: string | null;
  tau: number;
  contribution: number;
}

export interface Suggestion {
  fact_id: string;
  value: number;
  risk_delta: number;
  label_change: boolean;
  posterior: number[];
}

export interface CounterfactualFound {
  found: true;
  interventions: Record<string, number>;
  cardinality: number;
  original_label: string;
  original_posterior: number[];
  new_label: string;
  new_posterior: number[];
  risk_delta: number;
  complete: boolean;
}

export interface CounterfactualNotFound {
  found: false;
  detail: string;
}

export type CounterfactualResponse = CounterfactualFound | CounterfactualNotFound;

export interface ExplanationPayload {
  predicted_class: string;
  posterior: Record<string, number>;
  fact_graph: {
    confidences: Record<string, number>;
    attribution: number[][] | null;
  };
  fired_rules: FiredRule[];
  counterfactual_suggestions: Suggestion[];
  exact_counterfactual: Omit<CounterfactualFound, "found" | "original_label" | "original_posterior"> | null;
  risk_probability: number;
}

export interface RuleDelta {
  rule_index: number;
  tau_before: number;
  tau_after: number;
}

export interface WhatIfResponse {
  fact_id: string;
  value: number;
  original_posterior: number[];
  posterior: number[];
  original_label: string;
  label: string;
  risk_delta: number;
  rule_deltas: RuleDelta[];
}
