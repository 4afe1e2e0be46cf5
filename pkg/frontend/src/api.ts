/**
 * Typed client for the consultation session API.
 *
 * Field names follow docs/api-schema.json. Every numeric field arrives with
 * a `*_str` twin; display code uses only the strings, so nothing numeric is
 * ever recomputed on the client.
 */

export interface QuestionItem {
  id: string;
  prompt: string;
}

export interface Question {
  hierarchy: string;
  node: string;
  max_increment: number;
  max_increment_str: string;
  items: QuestionItem[];
}

export interface BeliefRow {
  node: string;
  frame: boolean;
  mass: number;
  mass_str: string;
  belief: number;
  belief_str: string;
  pot_confirm: number;
  pot_confirm_str: string;
  pot_disconfirm: number;
  pot_disconfirm_str: string;
}

export interface BeliefHierarchy {
  hierarchy: string;
  rows: BeliefRow[];
}

export interface BeliefReport {
  status: string;
  answers: number;
  hierarchies: BeliefHierarchy[];
}

export interface Contribution {
  source: string;
  equation: string;
  value: number;
  value_str: string;
}

export interface IncrementRow {
  node: string;
  total: number;
  total_str: string;
  contributions: Contribution[];
}

export interface IncrementReport {
  step: number;
  hierarchies: { hierarchy: string; rows: IncrementRow[] }[];
}

export interface TraceEvent {
  event: "selected" | "answered" | "switched" | "finished";
  step: number;
  [key: string]: unknown;
}

export interface SessionCreated {
  session_id: string;
  kb: string;
  status: string;
  question: Question | null;
}

export interface AnswerResponse {
  status: string;
  switched: boolean;
  question: Question | null;
  belief: BeliefReport;
}

export type AnswerValue = "present" | "absent" | "unknown";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  /** Raw response bodies, for pass-through audits in tests. */
  readonly rawBodies: string[] = [];

  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = String((JSON.parse(text) as { detail?: string }).detail ?? text);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    this.rawBodies.push(text);
    return JSON.parse(text) as T;
  }

  healthz(): Promise<{ status: string; kb: string }> {
    return this.request("GET", "/healthz");
  }

  createSession(): Promise<SessionCreated> {
    return this.request("POST", "/sessions");
  }

  answer(sessionId: string, item: string, value: AnswerValue): Promise<AnswerResponse> {
    return this.request("POST", `/sessions/${sessionId}/answers`, { item, value });
  }

  belief(sessionId: string): Promise<BeliefReport> {
    return this.request("GET", `/sessions/${sessionId}/belief`);
  }

  increments(sessionId: string): Promise<IncrementReport> {
    return this.request("GET", `/sessions/${sessionId}/increments`);
  }

  trace(sessionId: string): Promise<{ events: TraceEvent[] }> {
    return this.request("GET", `/sessions/${sessionId}/trace`);
  }
}
