/**
 * View-model derivation: everything the console shows is computed here from
 * API snapshots, so rendering stays a dumb projection and this module can be
 * tested without a DOM.
 */

import type {
  AuditRecord,
  PendingSummary,
  StatusSnapshot,
  TrustSnapshot,
} from "./api.js";

export const DUAL_AUTH_TIER = 4;
export const AUDIT_TAIL_LENGTH = 30;

export interface PendingCard {
  pendingId: string;
  subject: string;
  tool: string;
  paramsLabel: string;
  runtimePit: number;
  ticksLeft: number;
  requiredApprovals: number;
  obtainedApprovals: number;
  dualAuth: boolean;
}

export interface TrustRow {
  agent: string;
  score: number;
  contracted: boolean;
}

export interface AuditLine {
  tick: number;
  text: string;
  decision: string | null;
}

export interface ConsoleViewModel {
  scenario: string;
  tick: number;
  principals: string[];
  pendings: PendingCard[];
  trust: TrustRow[];
  auditTail: AuditLine[];
}

export function formatParams(params: Record<string, unknown>): string {
  const parts = Object.entries(params).map(([key, value]) => {
    const shown = typeof value === "number" ? round3(value) : String(value);
    return `${key}=${shown}`;
  });
  return parts.join(" ");
}

function round3(value: number): string {
  return (Math.round(value * 1000) / 1000).toString();
}

export function buildViewModel(
  status: StatusSnapshot,
  pendings: PendingSummary[],
  trust: TrustSnapshot,
  audit: AuditRecord[],
): ConsoleViewModel {
  const cards = pendings
    .filter((p) => p.resolved === null)
    .map(
      (p): PendingCard => ({
        pendingId: p.pending_id,
        subject: p.subject,
        tool: p.tool,
        paramsLabel: formatParams(p.params),
        runtimePit: p.runtime_pit,
        ticksLeft: Math.max(0, p.deadline_tick - status.tick),
        requiredApprovals: p.required_approvals,
        obtainedApprovals: p.obtained_approvals,
        dualAuth: p.runtime_pit >= DUAL_AUTH_TIER,
      }),
    )
    .sort((a, b) => a.ticksLeft - b.ticksLeft || a.pendingId.localeCompare(b.pendingId));

  const trustRows = Object.entries(trust.trust)
    .map(
      ([agent, score]): TrustRow => ({
        agent,
        score,
        contracted: status.contracted_agents.includes(agent),
      }),
    )
    .sort((a, b) => a.agent.localeCompare(b.agent));

  const tail = audit
    .slice(-AUDIT_TAIL_LENGTH)
    .map((record): AuditLine => ({
      tick: record.tick ?? 0,
      text: describeAudit(record),
      decision: record.kind === "decision" ? String(record.decision) : null,
    }));

  return {
    scenario: status.scenario,
    tick: status.tick,
    principals: status.humans.map((h) => h.id),
    pendings: cards,
    trust: trustRows,
    auditTail: tail,
  };
}

export function describeAudit(record: AuditRecord): string {
  switch (record.kind) {
    case "decision":
      return `${record.decision} ${record.invocation_id} at ${record.ep} (tier ${record.runtime_pit})`;
    case "admission":
      return record.admitted
        ? `admitted ${record.channel} ${record.item_id}`
        : `rejected ${record.channel} ${record.item_id}: ${record.primitive} ${record.reason}`;
    case "exec":
      return `executed ${record.tool} ${record.invocation_id}`;
    case "pending":
      return `deferred ${record.invocation_id} as ${record.pending_id}`;
    case "resolution":
      return `resolved ${record.pending_id}: ${record.outcome} (${record.rationale})`;
    case "drift":
      return `drift verdict for ${record.agent}: ${record.action}`;
    case "plan_hold":
      return `planner hold: ${record.reason}`;
    case "attack":
      return `attack injected: ${record.attack_class}`;
    default:
      return `${record.kind}`;
  }
}

/**
 * Client-side gate for the approve button. Advisory only: the server
 * re-validates every decision, this merely explains why a click would be
 * pointless.
 */
export function approvalGuard(
  card: PendingCard,
  principal: string | null,
  approversSoFar: ReadonlyMap<string, readonly string[]>,
): { allowed: boolean; reason: string } {
  if (!principal) {
    return { allowed: false, reason: "select a principal first" };
  }
  const prior = approversSoFar.get(card.pendingId) ?? [];
  if (card.dualAuth && prior.includes(principal)) {
    return { allowed: false, reason: "distinct approver required" };
  }
  return { allowed: true, reason: "" };
}

/** Exponential backoff schedule for the poll loop, capped at 5 s. */
export function nextPollDelay(baseMs: number, consecutiveFailures: number): number {
  if (consecutiveFailures <= 0) {
    return baseMs;
  }
  return Math.min(baseMs * 2 ** consecutiveFailures, 5000);
}
