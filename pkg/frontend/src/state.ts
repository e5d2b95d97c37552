/** Session state for the what-if panel.
 *
 * Holds the current fact-confidence vector, the latest posterior, and an
 * append-only history of applied interventions. Server round-trips carry a
 * sequence number; a response that resolves after a newer one has already
 * been applied is discarded so the panel never regresses to stale data.
 */
import type { ApiClient } from "./api.js";
import type { CounterfactualFound, WhatIfResponse } from "./types.js";

export interface HistoryEntry {
  kind: "whatif" | "counterfactual";
  /** fact id -> value applied in this step */
  interventions: Record<string, number>;
  valuesBefore: number[];
  valuesAfter: number[];
  label: string;
  riskDelta: number;
  /** false when the step came from a greedy/timed-out (approximate) result */
  complete: boolean;
}

export type ApplyOutcome =
  | { status: "applied"; entry: HistoryEntry }
  | { status: "stale" }
  | { status: "failed"; error: unknown };

export class SessionState {
  private values: number[];
  private readonly initialValues: number[];
  private readonly history_: HistoryEntry[] = [];
  private nextSeq = 0;
  private appliedSeq = -1;
  private label_: string | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly facts: string[],
    initial?: number[],
  ) {
    if (initial !== undefined && initial.length !== facts.length) {
      throw new Error(
        `expected ${facts.length} initial confidences, got ${initial.length}`,
      );
    }
    this.initialValues = initial ? [...initial] : facts.map(() => 0.5);
    this.values = [...this.initialValues];
  }

  get confidences(): number[] {
    return [...this.values];
  }

  get history(): readonly HistoryEntry[] {
    return this.history_;
  }

  get label(): string | null {
    return this.label_;
  }

  private factIndex(factId: string): number {
    const idx = this.facts.indexOf(factId);
    if (idx < 0) throw new Error(`unknown fact: ${factId}`);
    return idx;
  }

  /** Local slider edit; no server round-trip, no history entry. */
  setFact(factId: string, value: number): void {
    if (value < 0 || value > 1) throw new Error("confidence must lie in [0, 1]");
    this.values[this.factIndex(factId)] = value;
  }

  /** Snap-to-certainty buttons beside each slider. */
  snapFact(factId: string, bit: 0 | 1): void {
    this.setFact(factId, bit);
  }

  /** Apply a single intervention through /whatif.
   *
   * The value is committed optimistically so the UI tracks the slider; if the
   * request fails the previous vector is restored, and if a newer request has
   * already been applied by the time this one resolves, the response is
   * discarded without touching state.
   */
  async applyWhatIf(factId: string, value: number): Promise<ApplyOutcome> {
    const idx = this.factIndex(factId);
    const seq = this.nextSeq++;
    const before = [...this.values];
    this.values[idx] = value;
    let response: WhatIfResponse;
    try {
      response = await this.api.whatIf(before, factId, value);
    } catch (error) {
      if (seq > this.appliedSeq) {
        this.values = before; // roll back the optimistic edit
      }
      return { status: "failed", error };
    }
    if (seq < this.appliedSeq) {
      return { status: "stale" }; // a newer response already landed
    }
    this.appliedSeq = seq;
    this.label_ = response.label;
    const entry: HistoryEntry = {
      kind: "whatif",
      interventions: { [factId]: value },
      valuesBefore: before,
      valuesAfter: [...this.values],
      label: response.label,
      riskDelta: response.risk_delta,
      complete: true,
    };
    this.history_.push(entry);
    return { status: "applied", entry };
  }

  /** One-click apply of a counterfactual suggestion (all interventions at once). */
  applyCounterfactual(result: CounterfactualFound): HistoryEntry {
    const seq = this.nextSeq++;
    const before = [...this.values];
    for (const [factId, value] of Object.entries(result.interventions)) {
      this.values[this.factIndex(factId)] = value;
    }
    this.appliedSeq = seq;
    this.label_ = result.new_label;
    const entry: HistoryEntry = {
      kind: "counterfactual",
      interventions: { ...result.interventions },
      valuesBefore: before,
      valuesAfter: [...this.values],
      label: result.new_label,
      riskDelta: result.risk_delta,
      complete: result.complete,
    };
    this.history_.push(entry);
    return entry;
  }

  /** Replay the history from the initial vector; must reproduce the current
   * state exactly (used as a consistency check and for session restore). */
  replay(): number[] {
    const values = [...this.initialValues];
    for (const entry of this.history_) {
      for (const [factId, value] of Object.entries(entry.interventions)) {
        values[this.factIndex(factId)] = value;
      }
    }
    return values;
  }
}
