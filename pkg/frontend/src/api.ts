/** Thin client for the /v1 REST API. The UI never mutates plan state
 * locally: every change round-trips through these calls and re-renders from
 * the response document. */

import type {
  Candidate,
  ChatResponse,
  CreatePlanForm,
  EventType,
  PlanDocument,
  SessionSummary,
} from './types.js';

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly body: unknown = undefined,
  ) {
    super(message);
  }

  get currentVersion(): number | undefined {
    const body = this.body as { current_version?: number } | undefined;
    return body?.current_version;
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly sessionId: string,
    private readonly fetchImpl: typeof fetch = globalThis.fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(new URL(path, this.baseUrl), {
      method,
      headers: {
        'Content-Type': 'application/json',
        'X-Session-Id': this.sessionId,
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : undefined;
    if (!response.ok) {
      const detail =
        (parsed as { detail?: unknown } | undefined)?.detail ?? response.statusText;
      throw new ApiError(
        `${method} ${path} failed: ${response.status} ${JSON.stringify(detail)}`,
        response.status,
        parsed,
      );
    }
    return parsed as T;
  }

  health(): Promise<{ status: string; mode: string }> {
    return this.request('GET', '/v1/health');
  }

  createPlan(form: CreatePlanForm): Promise<PlanDocument> {
    return this.request('POST', '/v1/plans', form);
  }

  getPlan(planId: string): Promise<PlanDocument> {
    return this.request('GET', `/v1/plans/${encodeURIComponent(planId)}`);
  }

  getLevels(subject: string): Promise<{ levels: Record<string, string> }> {
    return this.request(
      'GET',
      `/v1/levels?subject=${encodeURIComponent(subject)}`,
    );
  }

  applyEdit(
    planId: string,
    field: string,
    newValue: unknown,
    expectedVersion: number,
  ): Promise<PlanDocument> {
    return this.request('POST', `/v1/plans/${encodeURIComponent(planId)}/edits`, {
      field,
      new_value: newValue,
      expected_version: expectedVersion,
    });
  }

  sendChat(
    planId: string,
    message: string,
    expectedVersion: number,
  ): Promise<ChatResponse> {
    return this.request('POST', `/v1/plans/${encodeURIComponent(planId)}/chat`, {
      message,
      expected_version: expectedVersion,
    });
  }

  alternatives(
    planId: string,
    week: number,
    day: number,
    resourceId?: string,
    limit = 10,
  ): Promise<{ topic: string; candidates: Candidate[] }> {
    const params = new URLSearchParams({
      week: String(week),
      day: String(day),
      limit: String(limit),
    });
    if (resourceId) params.set('resource', resourceId);
    return this.request(
      'GET',
      `/v1/plans/${encodeURIComponent(planId)}/alternatives?${params}`,
    );
  }

  replaceResource(
    planId: string,
    week: number,
    day: number,
    oldExternalId: string,
    newExternalId: string,
    expectedVersion: number,
  ): Promise<PlanDocument> {
    return this.request(
      'POST',
      `/v1/plans/${encodeURIComponent(planId)}/resources/replace`,
      {
        week,
        day,
        old_external_id: oldExternalId,
        new_external_id: newExternalId,
        expected_version: expectedVersion,
      },
    );
  }

  postEvent(
    eventType: EventType,
    planId?: string,
    payload: Record<string, string> = {},
  ): Promise<void> {
    return this.request('POST', '/v1/events', {
      event_type: eventType,
      plan_id: planId ?? null,
      payload,
    });
  }

  sessionSummary(): Promise<SessionSummary> {
    return this.request(
      'GET',
      `/v1/sessions/${encodeURIComponent(this.sessionId)}/summary`,
    );
  }
}
