/** Typed fetch client for the engine HTTP API. */

import {
  AnswerReply,
  EstimatePayload,
  ModelTag,
  Scenario,
  SegmentPayload,
  SolveRecord,
} from "./types.js";

export interface ApiErrorBody {
  error: { type: string; message: string; field?: string; section?: string; row?: string };
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody | null,
  ) {
    super(body?.error?.message ?? `HTTP ${status}`);
  }

  get field(): string {
    return this.body?.error?.field ?? "";
  }

  get kind(): string {
    return this.body?.error?.type ?? "http";
  }
}

type FetchLike = typeof fetch;

export class EngineApi {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let parsed: ApiErrorBody | null = null;
      try {
        parsed = (await res.json()) as ApiErrorBody;
      } catch {
        parsed = null;
      }
      throw new ApiError(res.status, parsed);
    }
    return (await res.json()) as T;
  }

  listScenarios(): Promise<Scenario[]> {
    return this.request("GET", "/api/scenarios");
  }

  getScenario(id: string): Promise<Scenario> {
    return this.request("GET", `/api/scenarios/${id}`);
  }

  saveScenario(scenario: Scenario): Promise<Scenario> {
    return this.request("POST", "/api/scenarios", scenario);
  }

  deleteScenario(id: string): Promise<{ deleted: string }> {
    return this.request("DELETE", `/api/scenarios/${id}`);
  }

  solve(id: string, model: ModelTag, options: Record<string, unknown> = {}): Promise<SolveRecord> {
    return this.request("POST", `/api/scenarios/${id}/solve`, { model, options });
  }

  getSolve(id: string): Promise<SolveRecord> {
    return this.request("GET", `/api/solves/${id}`);
  }

  listSolves(scenarioId: string): Promise<SolveRecord[]> {
    return this.request("GET", `/api/scenarios/${scenarioId}/solves`);
  }

  openAbilitySession(body: {
    prices: number[];
    timestamps?: number[];
    length: number;
    trials: number;
    seed: number;
  }): Promise<{ id: string; length: number; trials: number; segment: SegmentPayload | null }> {
    return this.request("POST", "/api/ability/sessions", body);
  }

  answer(sessionId: string, prediction: "up" | "not_up"): Promise<AnswerReply> {
    return this.request("POST", `/api/ability/sessions/${sessionId}/answer`, { prediction });
  }

  estimate(sessionId: string): Promise<EstimatePayload> {
    return this.request("GET", `/api/ability/sessions/${sessionId}/estimate`);
  }
}
