/**
 * Console wiring: poll the broker API every 500 ms, derive the view model,
 * render, and feed human decisions back. Connection loss shows a banner and
 * retries with exponential backoff; at most one decision per pending is in
 * flight at a time.
 */

import { ApiError, ConsoleApi } from "./api.js";
import type { AuditRecord } from "./api.js";
import { buildViewModel, nextPollDelay } from "./state.js";
import type { RenderContext } from "./render.js";
import { render } from "./render.js";

const POLL_MS = 500;

export class ConsoleApp {
  private readonly api: ConsoleApi;
  private selectedPrincipal: string | null = null;
  private approversSoFar = new Map<string, string[]>();
  private inFlight = new Set<string>();
  private connectionError: string | null = null;
  private lastResult: string | null = null;
  private consecutiveFailures = 0;
  private auditSince = 0;
  private auditLog: AuditRecord[] = [];
  // Records for one tick may arrive split across polls, so the cursor
  // stays AT the newest tick and its already-seen records are deduped.
  private boundarySeen = new Set<string>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;

  constructor(
    private readonly root: HTMLElement,
    baseUrl: string,
    fetchImpl?: (input: string, init?: RequestInit) => Promise<Response>,
  ) {
    this.api = new ConsoleApi(baseUrl, fetchImpl);
  }

  start(): void {
    void this.tick();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
  }

  /** One poll cycle; exposed for tests. */
  async tick(): Promise<void> {
    try {
      const [status, pendings, trust, fresh] = await Promise.all([
        this.api.getStatus(),
        this.api.getPending(),
        this.api.getTrust(),
        this.api.getAudit(this.auditSince),
      ]);
      for (const record of fresh) {
        const tick = record.tick ?? 0;
        const key = JSON.stringify(record);
        if (tick < this.auditSince) continue;
        if (tick === this.auditSince && this.boundarySeen.has(key)) continue;
        if (tick > this.auditSince) {
          this.auditSince = tick;
          this.boundarySeen = new Set();
        }
        this.boundarySeen.add(key);
        this.auditLog.push(record);
      }
      this.connectionError = null;
      this.consecutiveFailures = 0;
      const model = buildViewModel(status, pendings, trust, this.auditLog);
      if (this.selectedPrincipal === null && model.principals.length > 0) {
        this.selectedPrincipal = model.principals[0];
      }
      this.render(model);
    } catch (error) {
      this.consecutiveFailures += 1;
      this.connectionError = error instanceof Error ? error.message : String(error);
      this.renderErrorOnly();
    }
    if (!this.stopped) {
      this.timer = setTimeout(
        () => void this.tick(),
        nextPollDelay(POLL_MS, this.consecutiveFailures),
      );
    }
  }

  private context(): RenderContext {
    return {
      selectedPrincipal: this.selectedPrincipal,
      approversSoFar: this.approversSoFar,
      inFlight: this.inFlight,
      connectionError: this.connectionError,
      lastResult: this.lastResult,
    };
  }

  private render(model: ReturnType<typeof buildViewModel>): void {
    render(this.root, model, this.context(), {
      onDecision: (pendingId, verdict) => void this.decide(pendingId, verdict),
      onPrincipalChange: (principal) => {
        this.selectedPrincipal = principal || null;
        this.render(model);
      },
    });
  }

  private renderErrorOnly(): void {
    const empty = buildViewModel(
      { scenario: "", tick: 0, humans: [], contracted_agents: [] },
      [],
      { tick: 0, trust: {} },
      this.auditLog,
    );
    this.render(empty);
  }

  async decide(pendingId: string, verdict: "approve" | "deny"): Promise<void> {
    const principal = this.selectedPrincipal;
    if (!principal || this.inFlight.has(pendingId)) {
      return;
    }
    this.inFlight.add(pendingId);
    try {
      const result = await this.api.postDecision(pendingId, principal, verdict);
      if (result.status === "resolved") {
        this.lastResult = `${pendingId}: ${result.outcome}`;
      } else {
        this.lastResult = `${pendingId}: still pending (more approvals needed)`;
        const prior = this.approversSoFar.get(pendingId) ?? [];
        if (verdict === "approve" && !prior.includes(principal)) {
          this.approversSoFar.set(pendingId, [...prior, principal]);
        }
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 410) {
        this.lastResult = `${pendingId}: expired before the decision arrived`;
      } else {
        this.lastResult = `${pendingId}: ${error instanceof Error ? error.message : error}`;
      }
    } finally {
      this.inFlight.delete(pendingId);
    }
  }
}

export function mount(root: HTMLElement, baseUrl?: string): ConsoleApp {
  const resolved = baseUrl ?? inferBaseUrl();
  const app = new ConsoleApp(root, resolved);
  app.start();
  return app;
}

function inferBaseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? `${window.location.protocol}//${window.location.host}`;
}
