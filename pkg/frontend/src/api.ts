/** Typed client for the dialogue session HTTP API. */

export interface Move {
  kind: "ask" | "answer";
  text: string;
  confidence: number;
}

export interface TranscriptMove {
  role: "system" | "user";
  text: string;
  kind?: "ask" | "answer";
  confidence?: number;
}

export interface Transcript {
  id: string;
  status: "awaiting_system" | "awaiting_user" | "answered";
  request: string;
  profile: string[];
  knowledge: string;
  moves: TranscriptMove[];
  predicted_k: number;
  gold_k: number | null;
  predicted_answer: string | null;
  gold_answer: string | null;
}

export interface SampleSummary {
  index: number;
  request: string;
  gold_k: number;
}

export interface NewSessionResult {
  session_id: string;
  first_move: Move;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (typeof body?.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return parseOrThrow<T>(response);
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    return parseOrThrow<T>(response);
  }

  health(): Promise<{ status: string; vocab_size: number }> {
    return this.get("/health");
  }

  samples(): Promise<SampleSummary[]> {
    return this.get("/samples");
  }

  newSession(body: {
    request?: string;
    profile?: string[];
    knowledge?: string;
    sample_from?: string;
    sample_index?: number;
  }): Promise<NewSessionResult> {
    return this.post("/sessions", body);
  }

  reply(sessionId: string, answer: string): Promise<{ next_move: Move }> {
    return this.post(`/sessions/${sessionId}/reply`, { answer });
  }

  transcript(sessionId: string): Promise<Transcript> {
    return this.get(`/sessions/${sessionId}`);
  }

  /** Raw transcript bytes, for byte-identical export. */
  async transcriptRaw(sessionId: string): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }
}
