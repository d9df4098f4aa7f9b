"""The deferral broker: pending high-consequence actions awaiting human
judgment.

Deferred invocations are queued, routed to human principals, and resolved
at most once: any denial is final, approvals release execution once the
required count of distinct principals is reached (two for safety-critical
grants), and anything still pending past its deadline becomes a DENY. The
broker is the one stateful concurrent component, so every mutation runs
under a single lock and readers get consistent snapshots.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .engine import Decision, Effect, EngineConfig
from .model import HumanPrincipal, Invocation


class UnknownPendingError(Exception):
    pass


class NotAHumanError(Exception):
    pass


class NotDualAuthorizerError(Exception):
    pass


class AlreadyResolvedError(Exception):
    pass


class ExpiredError(Exception):
    pass


@dataclass(frozen=True)
class Approval:
    human_id: str
    tick: int
    verdict: str  # "approve" | "deny"


@dataclass(frozen=True)
class PendingAction:
    pending_id: str
    invocation: Invocation
    runtime_pit: int
    created_tick: int
    deadline_tick: int
    required_approvals: int
    route_to: str = "any"
    approvals: Tuple[Approval, ...] = ()
    resolved: Optional[Effect] = None
    resolved_tick: Optional[int] = None
    rationale: str = ""

    def distinct_approvers(self) -> Tuple[str, ...]:
        seen: List[str] = []
        for a in self.approvals:
            if a.verdict == "approve" and a.human_id not in seen:
                seen.append(a.human_id)
        return tuple(seen)

    def summary(self) -> Dict[str, Any]:
        return {
            "pending_id": self.pending_id,
            "invocation_id": self.invocation.id,
            "subject": self.invocation.subject,
            "tool": self.invocation.tool,
            "params": dict(self.invocation.params),
            "runtime_pit": self.runtime_pit,
            "created_tick": self.created_tick,
            "deadline_tick": self.deadline_tick,
            "required_approvals": self.required_approvals,
            "obtained_approvals": len(self.distinct_approvers()),
            "route_to": self.route_to,
            "resolved": self.resolved.value if self.resolved else None,
        }


@dataclass(frozen=True)
class Resolution:
    status: str  # "resolved" | "still-pending"
    outcome: Optional[Effect] = None
    pending: Optional[PendingAction] = None


class DeferBroker:
    """Queue of deferred actions with timeout-to-deny semantics."""

    def __init__(self, humans: Mapping[str, HumanPrincipal], cfg: EngineConfig):
        self._humans = dict(humans)
        self._cfg = cfg
        self._lock = threading.Lock()
        self._pendings: Dict[str, PendingAction] = {}
        self._order: List[str] = []
        self._counter = 0

    # -- writers ------------------------------------------------------------

    def submit(self, decision: Decision, invocation: Invocation, now: int) -> str:
        """Enqueue a deferred decision. The invocation is *not* executed;
        it only runs if a final PERMIT is recorded later."""
        if decision.outcome is not Effect.DEFER:
            raise ValueError(f"only DEFER decisions can be submitted, got {decision.outcome.value}")
        with self._lock:
            self._counter += 1
            pending_id = f"pend-{self._counter:04d}"
            required = 2 if decision.runtime_pit >= 4 else 1
            pending = PendingAction(
                pending_id=pending_id,
                invocation=invocation,
                runtime_pit=decision.runtime_pit,
                created_tick=now,
                deadline_tick=now + self._cfg.defer_timeout_ticks,
                required_approvals=required,
            )
            self._pendings[pending_id] = pending
            self._order.append(pending_id)
            return pending_id

    def resolve(self, pending_id: str, human_id: str, verdict: str, now: int) -> Resolution:
        """Record one human verdict.

        A deny from anyone is final. Approvals accumulate until the
        required number of *distinct* principals is reached; a repeat
        approval from the same principal never releases anything.
        Safety-critical (tier 4) items additionally require approvers
        empowered for dual authorisation.
        """
        if verdict not in ("approve", "deny"):
            raise ValueError(f"verdict must be approve or deny, got {verdict!r}")
        with self._lock:
            pending = self._pendings.get(pending_id)
            if pending is None:
                raise UnknownPendingError(pending_id)
            human = self._humans.get(human_id)
            if human is None:
                raise NotAHumanError(f"{human_id!r} is not a registered human principal")
            if pending.resolved is not None:
                raise AlreadyResolvedError(pending_id)
            if now > pending.deadline_tick:
                raise ExpiredError(pending_id)
            if pending.runtime_pit >= 4 and not human.can_dual_authorize:
                raise NotDualAuthorizerError(
                    f"{human_id!r} may not authorise safety-critical actions"
                )

            approvals = pending.approvals + (Approval(human_id, now, verdict),)
            pending = replace(pending, approvals=approvals)

            if verdict == "deny":
                pending = replace(
                    pending, resolved=Effect.DENY, resolved_tick=now,
                    rationale=f"denied by {human_id}",
                )
            elif len(pending.distinct_approvers()) >= pending.required_approvals:
                pending = replace(
                    pending, resolved=Effect.PERMIT, resolved_tick=now,
                    rationale=f"approved by {', '.join(pending.distinct_approvers())}",
                )

            self._pendings[pending_id] = pending
            if pending.resolved is not None:
                return Resolution("resolved", pending.resolved, pending)
            return Resolution("still-pending", None, pending)

    def tick(self, now: int) -> List[PendingAction]:
        """Expire every pending past its deadline (deadline tick itself is
        still live). Returns the newly denied pendings."""
        expired: List[PendingAction] = []
        with self._lock:
            for pending_id in self._order:
                pending = self._pendings[pending_id]
                if pending.resolved is None and now > pending.deadline_tick:
                    pending = replace(
                        pending, resolved=Effect.DENY, resolved_tick=now, rationale="timeout",
                    )
                    self._pendings[pending_id] = pending
                    expired.append(pending)
        return expired

    # -- readers ------------------------------------------------------------

    def get(self, pending_id: str) -> PendingAction:
        with self._lock:
            pending = self._pendings.get(pending_id)
            if pending is None:
                raise UnknownPendingError(pending_id)
            return pending

    def open_pendings(self) -> List[PendingAction]:
        with self._lock:
            return [self._pendings[pid] for pid in self._order if self._pendings[pid].resolved is None]

    def all_pendings(self) -> List[PendingAction]:
        with self._lock:
            return [self._pendings[pid] for pid in self._order]


# ---------------------------------------------------------------------------
# Scripted approvers for headless runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptedApprover:
    """Deterministic stand-in for humans at the console.

    Policies: approve-all, deny-all, or pit-le-3 (approve anything up to
    tier 3, deny above). Dual approvals are produced with two distinct
    principals when the roster allows it.
    """

    policy: str = "approve-all"
    principals: Tuple[str, ...] = ()

    def act(self, broker: DeferBroker, now: int) -> List[Resolution]:
        results: List[Resolution] = []
        for pending in broker.open_pendings():
            if self.policy == "deny-all":
                results.append(broker.resolve(pending.pending_id, self.principals[0], "deny", now))
                continue
            if self.policy == "pit-le-3" and pending.runtime_pit > 3:
                results.append(broker.resolve(pending.pending_id, self.principals[0], "deny", now))
                continue
            needed = pending.required_approvals - len(pending.distinct_approvers())
            for human_id in self.principals:
                if needed <= 0:
                    break
                if human_id in pending.distinct_approvers():
                    continue
                try:
                    result = broker.resolve(pending.pending_id, human_id, "approve", now)
                except NotDualAuthorizerError:
                    continue
                results.append(result)
                needed -= 1
        return results


__all__ = [
    "UnknownPendingError",
    "NotAHumanError",
    "NotDualAuthorizerError",
    "AlreadyResolvedError",
    "ExpiredError",
    "Approval",
    "PendingAction",
    "Resolution",
    "DeferBroker",
    "ScriptedApprover",
]
