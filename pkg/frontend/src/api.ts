/**
 * Typed client for the question-answering JSON API.
 *
 * The UI never computes SQL, answers, or targets itself: every string in a
 * TurnResponse is passed through to the transcript exactly as the server
 * sent it.
 */

export type Target = "database" | "previous_result";

export type Cell = string | number | null;

export interface TurnResponse {
  sql: string;
  target: Target;
  answer: string;
  columns: string[];
  rows: Cell[][];
  elapsed_ms: number;
}

export interface SchemaColumn {
  name: string;
  type: string;
}

export interface SchemaTable {
  name: string;
  columns: SchemaColumn[];
}

export interface SchemaResponse {
  database: string;
  tables: SchemaTable[];
}

/** Where a request failed: the transport, the HTTP layer, or the language pipeline. */
export type ApiErrorKind = "network" | "http" | "pipeline";

export class ApiError extends Error {
  readonly kind: ApiErrorKind;
  readonly stage?: string;
  readonly status?: number;

  constructor(kind: ApiErrorKind, message: string, stage?: string, status?: number) {
    super(message);
    this.name = "ApiError";
    this.kind = kind;
    this.stage = stage;
    this.status = status;
  }

  /** Network failures are worth retrying; pipeline errors need a new question. */
  get retryable(): boolean {
    return this.kind === "network";
  }
}

/** The slice of fetch the client needs; injectable for tests. */
export interface FetchLike {
  (input: string, init?: { method?: string; headers?: Record<string, string>; body?: string }): Promise<{
    status: number;
    json(): Promise<unknown>;
  }>;
}

interface ErrorBody {
  error?: { stage?: string; message?: string };
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async post(path: string, payload: unknown): Promise<{ status: number; body: unknown }> {
    let response;
    try {
      response = await this.fetchFn(this.base + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (cause) {
      throw new ApiError("network", `request to ${path} failed: ${String(cause)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    return { status: response.status, body };
  }

  async turn(sessionId: string, text: string): Promise<TurnResponse> {
    const { status, body } = await this.post("/api/turn", { session_id: sessionId, text });
    if (status === 200) {
      return body as TurnResponse;
    }
    const error = (body as ErrorBody | null)?.error;
    if (status === 422 && error) {
      throw new ApiError("pipeline", error.message ?? "question could not be answered", error.stage);
    }
    throw new ApiError("http", error?.message ?? `unexpected status ${status}`, error?.stage, status);
  }

  async reset(sessionId: string): Promise<void> {
    const { status, body } = await this.post("/api/session/reset", { session_id: sessionId });
    if (status !== 200) {
      const error = (body as ErrorBody | null)?.error;
      throw new ApiError("http", error?.message ?? `unexpected status ${status}`, error?.stage, status);
    }
  }

  async schema(): Promise<SchemaResponse> {
    let response;
    try {
      response = await this.fetchFn(this.base + "/api/schema");
    } catch (cause) {
      throw new ApiError("network", `request to /api/schema failed: ${String(cause)}`);
    }
    if (response.status !== 200) {
      throw new ApiError("http", `unexpected status ${response.status}`, undefined, response.status);
    }
    return (await response.json()) as SchemaResponse;
  }
}
