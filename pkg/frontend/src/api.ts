/**
 * Typed client for the broker API under /api/v1.
 *
 * The console performs no authorization logic of its own: every decision is
 * posted to the server and the server's verdict is rendered verbatim.
 */

export interface PendingSummary {
  pending_id: string;
  invocation_id: string;
  subject: string;
  tool: string;
  params: Record<string, unknown>;
  runtime_pit: number;
  created_tick: number;
  deadline_tick: number;
  required_approvals: number;
  obtained_approvals: number;
  route_to: string;
  resolved: string | null;
}

export interface HumanSummary {
  id: string;
  can_dual_authorize: boolean;
}

export interface StatusSnapshot {
  scenario: string;
  tick: number;
  humans: HumanSummary[];
  contracted_agents: string[];
}

export interface TrustSnapshot {
  tick: number;
  trust: Record<string, number>;
}

export interface AuditRecord {
  kind: string;
  tick: number;
  [key: string]: unknown;
}

export interface DecisionResult {
  status: "resolved" | "still-pending";
  outcome: string | null;
  pending: PendingSummary | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ConsoleApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message =
        typeof body === "object" && body !== null && "error" in body
          ? String((body as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  async getStatus(): Promise<StatusSnapshot> {
    return this.request<StatusSnapshot>("/status");
  }

  async getPending(): Promise<PendingSummary[]> {
    const body = await this.request<{ pending: PendingSummary[] }>("/pending");
    return body.pending;
  }

  async getTrust(): Promise<TrustSnapshot> {
    return this.request<TrustSnapshot>("/trust");
  }

  async getAudit(sinceTick: number): Promise<AuditRecord[]> {
    const body = await this.request<{ records: AuditRecord[] }>(
      `/audit?since=${encodeURIComponent(sinceTick)}`,
    );
    return body.records;
  }

  async postDecision(
    pendingId: string,
    humanId: string,
    verdict: "approve" | "deny",
  ): Promise<DecisionResult> {
    return this.request<DecisionResult>(`/pending/${encodeURIComponent(pendingId)}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ human_id: humanId, verdict }),
    });
  }
}
