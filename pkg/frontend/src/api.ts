import type { MovesDoc, ScenarioInfo, StepResult, ViewDoc } from './types.js';

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
    readonly detail: unknown = null,
  ) {
    super(message);
  }
}

export interface GameApi {
  listScenarios(): Promise<ScenarioInfo[]>;
  createSession(scenario: string, formula?: string, seed?: number): Promise<string>;
  view(sessionId: string): Promise<ViewDoc>;
  moves(sessionId: string): Promise<MovesDoc>;
  humanMove(sessionId: string, action: string): Promise<StepResult>;
  robotStep(sessionId: string): Promise<StepResult>;
}

type FetchLike = typeof fetch;

/** Thin typed wrapper over the /api/v1 endpoints. */
export class ApiClient implements GameApi {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      const doc = body as { code?: string; message?: string; detail?: unknown } | null;
      throw new ApiError(
        doc?.code ?? 'http_error',
        doc?.message ?? `request failed with ${resp.status}`,
        resp.status,
        doc?.detail ?? null,
      );
    }
    return body as T;
  }

  async listScenarios(): Promise<ScenarioInfo[]> {
    const doc = await this.request<{ scenarios: ScenarioInfo[] }>('/scenarios');
    return doc.scenarios;
  }

  async createSession(scenario: string, formula?: string, seed?: number): Promise<string> {
    const doc = await this.request<{ session_id: string }>('/sessions', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ scenario, formula: formula ?? null, seed: seed ?? null }),
    });
    return doc.session_id;
  }

  view(sessionId: string): Promise<ViewDoc> {
    return this.request(`/sessions/${sessionId}`);
  }

  moves(sessionId: string): Promise<MovesDoc> {
    return this.request(`/sessions/${sessionId}/moves`);
  }

  humanMove(sessionId: string, action: string): Promise<StepResult> {
    return this.request(`/sessions/${sessionId}/human`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ action }),
    });
  }

  robotStep(sessionId: string): Promise<StepResult> {
    return this.request(`/sessions/${sessionId}/robot`, { method: 'POST' });
  }
}
