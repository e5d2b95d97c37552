/** Thin typed client for the factlogic HTTP service.
 *
 * All model access goes through these routes; nothing in the UI touches the
 * Python package directly. The fetch implementation is injectable for tests.
 */
import type {
  CounterfactualFound,
  CounterfactualResponse,
  ExplanationPayload,
  ModelInfo,
  RulesDoc,
  WhatIfResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
    message?: string,
  ) {
    super(message ?? `request failed with status ${status}`);
    this.name = "ApiError";
  }
}

/** A 504 from /counterfactual: exact search timed out; the body may carry a
 * greedy partial result flagged incomplete. */
export class SearchTimedOut extends ApiError {
  constructor(
    status: number,
    body: unknown,
    readonly partial: CounterfactualFound | null,
  ) {
    super(status, body, "exact counterfactual search timed out");
    this.name = "SearchTimedOut";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body: unknown = await response.json();
    if (!response.ok) {
      if (response.status === 504) {
        const partial = (body as { partial?: CounterfactualFound | null })
          .partial ?? null;
        throw new SearchTimedOut(response.status, body, partial);
      }
      throw new ApiError(response.status, body);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  modelInfo(): Promise<ModelInfo> {
    return this.request("/model");
  }

  rules(): Promise<RulesDoc> {
    return this.request("/rules");
  }

  infer(confidences: number[], opts?: { exactCounterfactual?: boolean; maxCard?: number }): Promise<ExplanationPayload> {
    return this.post("/infer", {
      confidences,
      exact_counterfactual: opts?.exactCounterfactual ?? false,
      max_card: opts?.maxCard ?? 3,
    });
  }

  counterfactual(confidences: number[], opts?: { exact?: boolean; maxCard?: number }): Promise<CounterfactualResponse> {
    return this.post("/counterfactual", {
      confidences,
      exact: opts?.exact ?? true,
      max_card: opts?.maxCard ?? 3,
    });
  }

  whatIf(confidences: number[], factId: string, value: number): Promise<WhatIfResponse> {
    return this.post("/whatif", { confidences, fact_id: factId, value });
  }
}
