/** Pure HTML-string renderers (DOM-free, unit-testable). */
import type { HistoryEntry } from "./state.js";
import type { CounterfactualFound, RuleDoc, Suggestion } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** One rule as `Class ← lit ∧ ¬lit`, with negated literals styled. */
export function renderRule(rule: RuleDoc): string {
  const literals = [
    ...rule.positive.map((f) => ({ fact: f, negated: false })),
    ...rule.negated.map((f) => ({ fact: f, negated: true })),
  ];
  const body = literals
    .map(({ fact, negated }) =>
      negated
        ? `<span class="literal negated">¬${escapeHtml(fact)}</span>`
        : `<span class="literal">${escapeHtml(fact)}</span>`,
    )
    .join(" ∧ ");
  const reliability =
    rule.reliability === null
      ? ""
      : ` <span class="reliability">(${(rule.reliability * 100).toFixed(0)}%)</span>`;
  return (
    `<div class="rule" data-rule-index="${rule.rule_index}">` +
    `<span class="rule-head">${escapeHtml(rule.target_class)}</span>` +
    ` ← ${body}${reliability}</div>`
  );
}

export function renderRules(rules: RuleDoc[]): string {
  return rules.map(renderRule).join("\n");
}

/** Slider plus snap-to-certainty buttons for one fact. */
export function renderFactControl(fact: string, value: number): string {
  const id = escapeHtml(fact);
  return (
    `<div class="fact-control" data-fact="${id}">` +
    `<label for="slider-${id}">${id}</label>` +
    `<input id="slider-${id}" type="range" min="0" max="1" step="0.01" value="${value}">` +
    `<button class="snap" data-fact="${id}" data-value="0">0</button>` +
    `<button class="snap" data-fact="${id}" data-value="1">1</button>` +
    `<span class="value">${value.toFixed(2)}</span></div>`
  );
}

export function renderPosterior(posterior: Record<string, number>): string {
  const rows = Object.entries(posterior)
    .map(([name, p]) => {
      const pct = (p * 100).toFixed(1);
      return (
        `<div class="posterior-row"><span class="class-name">${escapeHtml(name)}</span>` +
        `<div class="bar" style="width:${pct}%"></div>` +
        `<span class="pct">${pct}%</span></div>`
      );
    })
    .join("\n");
  return `<div class="posterior">${rows}</div>`;
}

/** A counterfactual suggestion with a one-click apply button; results that
 * are not guaranteed minimal carry an "approximate" badge. */
export function renderCounterfactual(result: CounterfactualFound): string {
  const edits = Object.entries(result.interventions)
    .map(([fact, v]) => `${escapeHtml(fact)} := ${v}`)
    .join(", ");
  const badge = result.complete
    ? ""
    : ` <span class="badge approximate">approximate</span>`;
  return (
    `<div class="counterfactual">` +
    `<span class="edits">${edits}</span> → ` +
    `<span class="new-label">${escapeHtml(result.new_label)}</span>${badge}` +
    ` <button class="apply-cf">apply</button></div>`
  );
}

export function renderSuggestion(s: Suggestion): string {
  const cls = s.label_change ? "suggestion flips" : "suggestion";
  const delta = (s.risk_delta >= 0 ? "+" : "") + s.risk_delta.toFixed(3);
  return (
    `<div class="${cls}" data-fact="${escapeHtml(s.fact_id)}" data-value="${s.value}">` +
    `${escapeHtml(s.fact_id)} := ${s.value} (risk ${delta})` +
    ` <button class="apply-suggestion">apply</button></div>`
  );
}

export function renderHistoryEntry(entry: HistoryEntry, index: number): string {
  const edits = Object.entries(entry.interventions)
    .map(([fact, v]) => `${escapeHtml(fact)} := ${v}`)
    .join(", ");
  const badge = entry.complete
    ? ""
    : ` <span class="badge approximate">approximate</span>`;
  return (
    `<li class="history-entry" data-index="${index}">` +
    `[${entry.kind}] ${edits} → ${escapeHtml(entry.label)}${badge}</li>`
  );
}
