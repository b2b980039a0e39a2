/** Typed client for the simulation control API. */

export interface FdaAnnouncement {
  period: number;
  severity: string;
  urgency: string;
  text: string;
}

export interface ManufacturerDecision {
  manufacturer_id: number;
  invest_fraction: number;
  confidence: string;
  rationale: string;
  invested_units: number;
}

export interface TrajectoryRecord {
  period: number;
  total_demand: number;
  total_supply: number;
  shortage: number;
  buyer_inventory: number;
  fda_announcement: FdaAnnouncement | null;
  disrupted: number[];
  new_disruptions: number[];
  decisions: {
    fda?: { announce: boolean; severity: string; text: string; confidence: string; rationale: string };
    manufacturers?: ManufacturerDecision[];
    buyer?: { order_quantity: number; confidence: string; rationale: string };
  };
  costs: Record<string, unknown>;
  flags: string[];
}

export interface SessionView {
  id: string;
  mode: "auto" | "human_fda";
  status: "running" | "awaiting_fda" | "finished";
  period: number;
  horizon: number;
  pending_decision: boolean;
  config: Record<string, unknown>;
  latest_record: TrajectoryRecord | null;
}

export interface FdaDecisionBody {
  announce: boolean;
  severity: "none" | "monitoring" | "elevated" | "high_alert";
  text: string;
  confidence: "low" | "moderate" | "high";
  rationale: string;
}

export interface CreateSessionBody {
  config: Record<string, unknown>;
  mode: "auto" | "human_fda";
  fda_script?: FdaDecisionBody[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private fetchFn: FetchLike;

  constructor(
    public baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    // Injectable for tests; bound so plain `fetch` keeps its global receiver.
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) {
      let code = "http_error";
      let message = text;
      try {
        const parsed = JSON.parse(text);
        code = parsed?.error?.code ?? code;
        message = parsed?.error?.message ?? message;
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ApiError(response.status, code, message);
    }
    return JSON.parse(text) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  createSession(body: CreateSessionBody): Promise<SessionView> {
    return this.request("POST", "/sessions", body);
  }

  getSession(id: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${id}`);
  }

  step(id: string): Promise<{ record: TrajectoryRecord; status: string; period: number }> {
    return this.request("POST", `/sessions/${id}/step`, {});
  }

  postFdaDecision(
    id: string,
    decision: FdaDecisionBody,
  ): Promise<{ record: TrajectoryRecord; status: string; period: number; warnings: string[] }> {
    return this.request("POST", `/sessions/${id}/fda-decision`, decision);
  }

  /** Trajectory records so far; the payload is JSON lines, one record each. */
  async trajectory(id: string): Promise<TrajectoryRecord[]> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${id}/trajectory`);
    const text = await response.text();
    if (!response.ok) {
      throw new ApiError(response.status, "http_error", text);
    }
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as TrajectoryRecord);
  }

  /** Raw JSON-lines text, for byte-level comparisons and downloads. */
  async trajectoryText(id: string): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${id}/trajectory`);
    if (!response.ok) {
      throw new ApiError(response.status, "http_error", await response.text());
    }
    return response.text();
  }
}
