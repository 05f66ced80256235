/**
 * Typed client for the labeling service. All console state of record lives
 * server-side; this module only moves it over the wire.
 */

export interface PendingItem {
  sample_id: number;
  features?: number[];
  display_ref?: string;
}

export interface ApiSession {
  session_id: string;
  status: string;
  round: number;
  rounds_total: number;
  labeled_count: number;
  budget: number;
  class_names: string[];
  pending: PendingItem[];
}

export interface SessionSummary {
  session_id: string;
  status: string;
  round: number;
  rounds_total: number;
  labeled_count: number;
  budget: number;
}

export interface RoundMetrics {
  round: number;
  labeled_total: number;
  holdout_accuracy: number;
  mean_pool_uncertainty: number;
}

export interface SessionMetrics {
  session_id: string;
  status: string;
  round: number;
  initial: RoundMetrics;
  history: RoundMetrics[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(detail);
  }
}

async function parse<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let code = "http_error";
  let detail = `${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: string; detail?: string };
    code = body.error ?? code;
    detail = body.detail ?? detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, code, detail);
}

export class Client {
  constructor(readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listSessions(): Promise<SessionSummary[]> {
    return parse(await fetch(this.url("/sessions")));
  }

  async getSession(id: string): Promise<ApiSession> {
    return parse(await fetch(this.url(`/sessions/${id}`)));
  }

  async postLabel(id: string, sampleId: number, classId: number): Promise<ApiSession> {
    const resp = await fetch(this.url(`/sessions/${id}/labels`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify([{ sample_id: sampleId, class_id: classId }]),
    });
    return parse(resp);
  }

  async getMetrics(id: string): Promise<SessionMetrics> {
    return parse(await fetch(this.url(`/sessions/${id}/metrics`)));
  }

  exportUrl(id: string): string {
    return this.url(`/sessions/${id}/export`);
  }

  async fetchExport(id: string): Promise<string> {
    const resp = await fetch(this.exportUrl(id));
    if (!resp.ok) {
      throw new ApiError(resp.status, "export_failed", `${resp.status}`);
    }
    return resp.text();
  }
}
