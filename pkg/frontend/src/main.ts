/** Browser entry point: wires the API client and session state to the DOM. */
import { ApiClient, SearchTimedOut } from "./api.js";
import {
  renderCounterfactual,
  renderFactControl,
  renderHistoryEntry,
  renderPosterior,
  renderRules,
} from "./render.js";
import { SessionState } from "./state.js";
import type { CounterfactualFound } from "./types.js";

const api = new ApiClient(
  (window as { FACTLOGIC_BASE_URL?: string }).FACTLOGIC_BASE_URL ??
    "http://127.0.0.1:8000",
);

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

async function refreshPosterior(state: SessionState): Promise<void> {
  const payload = await api.infer(state.confidences);
  el("posterior").innerHTML = renderPosterior(payload.posterior);
  el("predicted").textContent = payload.predicted_class;
  el("risk").textContent = (payload.risk_probability * 100).toFixed(1) + "%";
  el("suggestions").innerHTML = payload.counterfactual_suggestions
    .map(
      (s) =>
        `<li data-fact="${s.fact_id}" data-value="${s.value}">` +
        `${s.fact_id} := ${s.value}</li>`,
    )
    .join("");
}

function refreshHistory(state: SessionState): void {
  el("history").innerHTML = state.history
    .map((entry, i) => renderHistoryEntry(entry, i))
    .join("");
}

function refreshControls(state: SessionState): void {
  el("facts").innerHTML = state.facts
    .map((fact, i) => renderFactControl(fact, state.confidences[i] ?? 0.5))
    .join("");
}

async function requestCounterfactual(state: SessionState): Promise<void> {
  const target = el("counterfactual");
  let result: CounterfactualFound | null = null;
  try {
    const response = await api.counterfactual(state.confidences);
    if (!response.found) {
      target.textContent = "no flipping intervention within budget";
      return;
    }
    result = response;
  } catch (error) {
    if (error instanceof SearchTimedOut && error.partial) {
      result = error.partial; // greedy fallback, rendered with the badge
    } else {
      target.textContent = "counterfactual request failed";
      return;
    }
  }
  target.innerHTML = renderCounterfactual(result);
  target.querySelector(".apply-cf")?.addEventListener("click", () => {
    state.applyCounterfactual(result);
    refreshControls(state);
    refreshHistory(state);
    void refreshPosterior(state);
  });
}

async function boot(): Promise<void> {
  const info = await api.modelInfo();
  const state = new SessionState(api, info.facts);
  el("rules").innerHTML = renderRules((await api.rules()).rules);
  refreshControls(state);
  await refreshPosterior(state);

  el("facts").addEventListener("input", (event) => {
    const input = event.target as HTMLInputElement;
    const holder = input.closest<HTMLElement>(".fact-control");
    if (!holder?.dataset.fact) return;
    state.setFact(holder.dataset.fact, Number(input.value));
  });

  el("facts").addEventListener("click", async (event) => {
    const button = event.target as HTMLElement;
    if (!button.matches("button.snap")) return;
    const fact = button.dataset.fact;
    const value = Number(button.dataset.value) as 0 | 1;
    if (!fact) return;
    const outcome = await state.applyWhatIf(fact, value);
    if (outcome.status === "failed") {
      refreshControls(state); // rolled back; re-sync the sliders
      return;
    }
    if (outcome.status === "applied") {
      refreshControls(state);
      refreshHistory(state);
      await refreshPosterior(state);
    }
  });

  el("find-cf").addEventListener("click", () => {
    void requestCounterfactual(state);
  });
}

void boot();
