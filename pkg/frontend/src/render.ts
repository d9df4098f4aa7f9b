/** DOM projection of the view model. No state of its own beyond the root. */

import type { ConsoleViewModel, PendingCard } from "./state.js";
import { approvalGuard } from "./state.js";

export interface RenderCallbacks {
  onDecision: (pendingId: string, verdict: "approve" | "deny") => void;
  onPrincipalChange: (principal: string) => void;
}

export interface RenderContext {
  selectedPrincipal: string | null;
  approversSoFar: ReadonlyMap<string, readonly string[]>;
  inFlight: ReadonlySet<string>;
  connectionError: string | null;
  lastResult: string | null;
}

function el(
  doc: Document,
  tag: string,
  className?: string,
  text?: string,
): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderCard(
  doc: Document,
  card: PendingCard,
  ctx: RenderContext,
  callbacks: RenderCallbacks,
): HTMLElement {
  const root = el(doc, "article", `card tier-${card.runtimePit}`);
  root.dataset.pendingId = card.pendingId;

  const head = el(doc, "header", "card-head");
  head.appendChild(el(doc, "span", "card-tool", `${card.subject} · ${card.tool}`));
  head.appendChild(el(doc, "span", "card-tier", `PIT-${card.runtimePit}`));
  root.appendChild(head);

  root.appendChild(el(doc, "p", "card-params", card.paramsLabel));
  root.appendChild(
    el(doc, "p", "card-deadline", `expires in ${card.ticksLeft} ticks`),
  );
  root.appendChild(
    el(
      doc,
      "p",
      "card-approvals",
      `approvals ${card.obtainedApprovals}/${card.requiredApprovals}`,
    ),
  );
  if (card.dualAuth) {
    root.appendChild(
      el(doc, "p", "card-dual", "safety-critical: two distinct approvers required"),
    );
  }

  const guard = approvalGuard(card, ctx.selectedPrincipal, ctx.approversSoFar);
  const busy = ctx.inFlight.has(card.pendingId);

  const actions = el(doc, "div", "card-actions");
  const approve = el(doc, "button", "approve", "Approve") as HTMLButtonElement;
  approve.disabled = busy || !guard.allowed;
  approve.addEventListener("click", () => callbacks.onDecision(card.pendingId, "approve"));
  const deny = el(doc, "button", "deny", "Deny") as HTMLButtonElement;
  deny.disabled = busy || ctx.selectedPrincipal === null;
  deny.addEventListener("click", () => callbacks.onDecision(card.pendingId, "deny"));
  actions.appendChild(approve);
  actions.appendChild(deny);
  if (!guard.allowed && guard.reason) {
    actions.appendChild(el(doc, "span", "guard-reason", guard.reason));
  }
  root.appendChild(actions);
  return root;
}

export function render(
  root: HTMLElement,
  model: ConsoleViewModel,
  ctx: RenderContext,
  callbacks: RenderCallbacks,
): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  const header = el(doc, "header", "top");
  header.appendChild(el(doc, "h1", undefined, "Approval console"));
  header.appendChild(
    el(doc, "span", "status-line", `${model.scenario} · tick ${model.tick}`),
  );
  root.appendChild(header);

  if (ctx.connectionError) {
    root.appendChild(
      el(doc, "div", "banner error", `connection lost: ${ctx.connectionError} (retrying)`),
    );
  }
  if (ctx.lastResult) {
    root.appendChild(el(doc, "div", "banner result", ctx.lastResult));
  }

  const who = el(doc, "div", "principal-picker");
  who.appendChild(el(doc, "label", undefined, "acting as "));
  const select = doc.createElement("select");
  select.className = "principal";
  const placeholder = doc.createElement("option");
  placeholder.value = "";
  placeholder.textContent = "choose principal";
  select.appendChild(placeholder);
  for (const principal of model.principals) {
    const option = doc.createElement("option");
    option.value = principal;
    option.textContent = principal;
    if (principal === ctx.selectedPrincipal) option.selected = true;
    select.appendChild(option);
  }
  select.addEventListener("change", () => callbacks.onPrincipalChange(select.value));
  who.appendChild(select);
  root.appendChild(who);

  const queue = el(doc, "section", "queue");
  queue.appendChild(el(doc, "h2", undefined, `Pending (${model.pendings.length})`));
  if (model.pendings.length === 0) {
    queue.appendChild(el(doc, "p", "empty", "nothing awaiting approval"));
  }
  for (const card of model.pendings) {
    queue.appendChild(renderCard(doc, card, ctx, callbacks));
  }
  root.appendChild(queue);

  const trust = el(doc, "section", "trust");
  trust.appendChild(el(doc, "h2", undefined, "Agents"));
  const table = el(doc, "table");
  for (const row of model.trust) {
    const tr = el(doc, "tr", row.contracted ? "contracted" : undefined);
    tr.appendChild(el(doc, "td", "agent", row.agent));
    tr.appendChild(el(doc, "td", "score", row.score.toFixed(3)));
    tr.appendChild(el(doc, "td", "badge", row.contracted ? "scope contracted" : ""));
    table.appendChild(tr);
  }
  trust.appendChild(table);
  root.appendChild(trust);

  const audit = el(doc, "section", "audit");
  audit.appendChild(el(doc, "h2", undefined, "Audit feed"));
  const list = el(doc, "ul", "audit-list");
  for (const line of model.auditTail) {
    const item = el(
      doc,
      "li",
      line.decision ? `audit-${line.decision.toLowerCase()}` : undefined,
      `[${line.tick}] ${line.text}`,
    );
    list.appendChild(item);
  }
  audit.appendChild(list);
  root.appendChild(audit);
}
