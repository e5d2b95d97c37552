import { describe, expect, it, vi } from "vitest";

import type { ApiClient } from "../src/api.js";
import { SessionState } from "../src/state.js";
import type { CounterfactualFound, WhatIfResponse } from "../src/types.js";

const FACTS = ["rail_down", "edge_sitting", "caregiver_near"];

function whatIfResponse(factId: string, value: number): WhatIfResponse {
  return {
    fact_id: factId,
    value,
    original_posterior: [0.7, 0.3],
    posterior: [0.2, 0.8],
    original_label: "Resting",
    label: "Unattended-Exit-Risk",
    risk_delta: 0.5,
    rule_deltas: [],
  };
}

function fakeApi(whatIf: ApiClient["whatIf"]): ApiClient {
  return { whatIf } as unknown as ApiClient;
}

describe("SessionState", () => {
  it("starts at neutral confidences and supports slider edits and snapping", () => {
    const state = new SessionState(fakeApi(vi.fn()), FACTS);
    expect(state.confidences).toEqual([0.5, 0.5, 0.5]);
    state.setFact("edge_sitting", 0.73);
    state.snapFact("rail_down", 1);
    expect(state.confidences).toEqual([1, 0.73, 0.5]);
    expect(() => state.setFact("bogus", 0.5)).toThrow(/unknown fact/);
    expect(() => state.setFact("rail_down", 1.5)).toThrow(/\[0, 1\]/);
  });

  it("commits a successful what-if and records a history entry", async () => {
    const whatIf = vi.fn(async (c: number[], f: string, v: number) =>
      whatIfResponse(f, v),
    );
    const state = new SessionState(fakeApi(whatIf), FACTS);
    const outcome = await state.applyWhatIf("rail_down", 1);

    expect(outcome.status).toBe("applied");
    expect(state.confidences).toEqual([1, 0.5, 0.5]);
    expect(state.label).toBe("Unattended-Exit-Risk");
    expect(state.history).toHaveLength(1);
    expect(state.history[0]).toMatchObject({
      kind: "whatif",
      interventions: { rail_down: 1 },
      valuesBefore: [0.5, 0.5, 0.5],
      valuesAfter: [1, 0.5, 0.5],
      complete: true,
    });
    // the request body carries the pre-intervention vector
    expect(whatIf).toHaveBeenCalledWith([0.5, 0.5, 0.5], "rail_down", 1);
  });

  it("rolls back the optimistic edit when the request fails", async () => {
    const whatIf = vi.fn(async () => {
      throw new Error("503");
    });
    const state = new SessionState(fakeApi(whatIf), FACTS);
    state.setFact("edge_sitting", 0.9);
    const outcome = await state.applyWhatIf("rail_down", 1);

    expect(outcome.status).toBe("failed");
    expect(state.confidences).toEqual([0.5, 0.9, 0.5]);
    expect(state.history).toHaveLength(0);
  });

  it("discards a stale response that resolves after a newer one was applied", async () => {
    const resolvers: Array<(r: WhatIfResponse) => void> = [];
    const whatIf = vi.fn(
      (_c: number[], f: string, v: number) =>
        new Promise<WhatIfResponse>((resolve) => {
          resolvers.push(() => resolve(whatIfResponse(f, v)));
        }),
    );
    const state = new SessionState(fakeApi(whatIf), FACTS);

    const first = state.applyWhatIf("rail_down", 1);
    const second = state.applyWhatIf("edge_sitting", 1);
    resolvers[1]!(whatIfResponse("edge_sitting", 1)); // newer request lands first
    expect((await second).status).toBe("applied");
    resolvers[0]!(whatIfResponse("rail_down", 1)); // older response is now stale
    expect((await first).status).toBe("stale");

    expect(state.history).toHaveLength(1);
    expect(state.history[0]!.interventions).toEqual({ edge_sitting: 1 });
    // both optimistic edits remain visible; only the stale *response* is dropped
    expect(state.confidences).toEqual([1, 1, 0.5]);
  });

  it("applies a counterfactual in one click and flags approximate results", () => {
    const state = new SessionState(fakeApi(vi.fn()), FACTS);
    const result: CounterfactualFound = {
      found: true,
      interventions: { rail_down: 0, caregiver_near: 1 },
      cardinality: 2,
      original_label: "Unattended-Exit-Risk",
      original_posterior: [0.1, 0.9],
      new_label: "Resting",
      new_posterior: [0.9, 0.1],
      risk_delta: -0.8,
      complete: false,
    };
    const entry = state.applyCounterfactual(result);
    expect(state.confidences).toEqual([0, 0.5, 1]);
    expect(entry.complete).toBe(false);
    expect(entry.kind).toBe("counterfactual");
  });

  it("replays the history to reproduce the final applied state", async () => {
    const whatIf = vi.fn(async (c: number[], f: string, v: number) =>
      whatIfResponse(f, v),
    );
    const state = new SessionState(fakeApi(whatIf), FACTS);
    await state.applyWhatIf("rail_down", 1);
    await state.applyWhatIf("edge_sitting", 1);
    state.applyCounterfactual({
      found: true,
      interventions: { rail_down: 0, caregiver_near: 1 },
      cardinality: 2,
      original_label: "Unattended-Exit-Risk",
      original_posterior: [0.1, 0.9],
      new_label: "Resting",
      new_posterior: [0.9, 0.1],
      risk_delta: -0.8,
      complete: true,
    });
    await state.applyWhatIf("edge_sitting", 0);

    expect(state.replay()).toEqual(state.confidences);
    expect(state.confidences).toEqual([0, 0, 1]);
  });

  it("rejects an initial vector of the wrong length", () => {
    expect(() => new SessionState(fakeApi(vi.fn()), FACTS, [0.5])).toThrow(
      /expected 3/,
    );
  });
});
