"""The policy decision point: runtime impact tiers, tier enforcement,
policy evaluation, and decision combination.

Every tool invocation is classified into an impact tier 0..4 before it
runs: the maximum of the tool's registered class, a parameter-derived tier,
and a context-derived tier from the live workspace. Enforcement escalates
with the tier: low tiers are permitted with audit, tier 2 is gated on the
subject's trust score, tier 3 is deferred to a human, and tier 4 is denied
unless dual authorisation was granted beforehand.

Decisions are pure functions of their inputs. No entity is trusted by
default: if no policy explicitly fires for a request, the decision is DENY.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping, Optional, Sequence, Tuple

from . import geometry
from .model import (
    EnforcementPoint,
    Invocation,
    MACPSDescriptor,
    Tool,
    Vec3,
    WorkspaceState,
)
from .predicate import (
    EvalContext,
    Node,
    PredicateTypeError,
    evaluate as eval_predicate,
)
from .primitives import PrimitiveId

# Context-tier thresholds (meters). The human-proximity trigger reproduces
# the intended behavior that motion near a person is high consequence while
# the same motion in an empty cell is not.
HUMAN_DISTANCE_TRIGGER = 1.0
FRAGILE_CLEARANCE = 0.3


class Effect(str, Enum):
    PERMIT = "PERMIT"
    DENY = "DENY"
    DEFER = "DEFER"


# Strictness order used when combining effects: deny beats defer beats permit.
_STRICTNESS = {Effect.PERMIT: 0, Effect.DEFER: 1, Effect.DENY: 2}


def stricter(a: Effect, b: Effect) -> Effect:
    return a if _STRICTNESS[a] >= _STRICTNESS[b] else b


class UnknownToolError(Exception):
    pass


@dataclass(frozen=True)
class ObligationSpec:
    """A mandatory side effect attached to a decision (audit, telemetry,
    trust update, operator notification)."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)


AUDIT_OBLIGATION = ObligationSpec(kind="audit")


@dataclass(frozen=True)
class Policy:
    """One enforcement rule: when `predicate` holds for a request matching
    the subject/object selectors at `ep`, contribute `effect`.

    `pit_bound` is the minimum runtime impact tier at which a PERMIT effect
    escalates (to DEFER, or DENY at tier 4); None means the policy has no
    physical-consequence dependency. `primitive` attributes the rule to a
    registry primitive so runs can toggle it.
    """

    id: str
    subject_selector: str  # "*" | agent/human id | "role:<Role>"
    object_selector: str   # "*" | object id | "kind:<digital|physical>" | "subkind:<Subkind>"
    predicate: Node
    ep: Optional[EnforcementPoint]  # None matches every enforcement point
    effect: Effect
    obligations: Tuple[ObligationSpec, ...] = ()
    pit_bound: Optional[int] = None
    primitive: Optional[PrimitiveId] = None
    route_to: str = "any"  # DEFER routing target: human id or "any"


@dataclass(frozen=True)
class EngineConfig:
    trust_threshold: float = 0.6
    defer_timeout_ticks: int = 50
    dual_auth_validity_ticks: int = 100

    def __post_init__(self) -> None:
        if not (0.0 < self.trust_threshold < 1.0):
            raise ValueError("trust_threshold must be strictly between 0 and 1")
        if self.defer_timeout_ticks <= 0 or self.dual_auth_validity_ticks <= 0:
            raise ValueError("timeouts must be positive")


@dataclass(frozen=True)
class Decision:
    outcome: Effect
    runtime_pit: int
    fired: Tuple[str, ...] = ()
    obligations: Tuple[ObligationSpec, ...] = (AUDIT_OBLIGATION,)
    rationale: str = ""
    pending_id: Optional[str] = None

    def with_pending(self, pending_id: str) -> "Decision":
        return replace(self, pending_id=pending_id)


# ---------------------------------------------------------------------------
# Runtime impact tier
# ---------------------------------------------------------------------------


def param_pit(tool: Tool, params: Mapping[str, Any]) -> int:
    """Tier contributed by invocation parameters.

    Only risk-scaled numeric parameters count. Each maps its position in
    the schema range to a tier: the bottom quarter is tier 1, up to 60% is
    tier 2, up to 90% is tier 3, above that tier 4. Digital tools are
    always tier 0.
    """
    if not tool.physical:
        return 0
    tier = 0
    for spec in tool.param_schema:
        if spec.kind != "numeric" or not spec.risk_scaled:
            continue
        if spec.name not in params:
            continue
        value = float(params[spec.name])
        lo, hi = float(spec.min), float(spec.max)
        if hi <= lo:
            continue
        r = (value - lo) / (hi - lo)
        if r <= 0.25:
            tier = max(tier, 1)
        elif r <= 0.6:
            tier = max(tier, 2)
        elif r <= 0.9:
            tier = max(tier, 3)
        else:
            tier = max(tier, 4)
    return tier


def planned_path(tool: Tool, params: Mapping[str, Any]) -> Tuple[Vec3, ...]:
    """The waypoints one physical invocation declares. A command is judged
    on its own declared motion; how it composes with earlier commands
    (including the approach from wherever the arm currently is) is the
    sequence-level check's responsibility."""
    if not tool.physical:
        return ()
    names = {s.name for s in tool.param_schema}
    if {"x", "y", "z"} <= names and all(k in params for k in ("x", "y", "z")):
        return ((float(params["x"]), float(params["y"]), float(params["z"])),)
    return ()


def context_pit(env: WorkspaceState, path: Sequence[Vec3], physical: bool) -> int:
    """Tier contributed by the live workspace.

    A nearby human makes any physical action high consequence (tier 3);
    passing close to a fragile object is tier 2; operating inside or moving
    into a forbidden zone is safety critical (tier 4). Digital operations
    have no physical consequence, so their context tier is 0.
    """
    if not physical:
        return 0
    tier = 0
    if env.human_present and env.human_distance_m < HUMAN_DISTANCE_TRIGGER:
        tier = max(tier, 3)
    if env.forbidden_zones and any(z.contains(env.arm_position) for z in env.forbidden_zones):
        tier = max(tier, 4)
    samples = geometry.polyline_samples(list(path) or [env.arm_position])
    if env.forbidden_zones and geometry.any_point_in_zones(samples, env.forbidden_zones):
        tier = max(tier, 4)
    if env.fragile_objects and geometry.fragile_clearance(samples, env.fragile_objects) <= FRAGILE_CLEARANCE:
        tier = max(tier, 2)
    return tier


def runtime_pit(inv: Invocation, tool: Tool, env: WorkspaceState) -> int:
    """Runtime impact tier of one invocation: max of the tool's base class,
    the parameter tier, and the workspace context tier."""
    if tool.id != inv.tool:
        raise UnknownToolError(f"invocation names tool {inv.tool!r}, got schema for {tool.id!r}")
    path = planned_path(tool, inv.params)
    return max(
        tool.pit_class,
        param_pit(tool, inv.params),
        context_pit(env, path, tool.physical),
    )


# ---------------------------------------------------------------------------
# Tier enforcement
# ---------------------------------------------------------------------------


def tier_enforce(pit: int, trust: float, cfg: EngineConfig, dual_auth: bool = False) -> Effect:
    """Baseline enforcement response for a runtime tier.

    Tiers 0 and 1 are permitted (with audit). Tier 2 is permitted only for
    subjects whose trust score meets the threshold, otherwise deferred.
    Tier 3 is always deferred to a human (the broker denies on timeout).
    Tier 4 is denied outright unless a valid dual authorisation was granted
    in advance, in which case it is permitted.
    """
    if not (0 <= pit <= 4):
        raise ValueError(f"pit {pit} outside 0..4")
    if pit <= 1:
        return Effect.PERMIT
    if pit == 2:
        return Effect.PERMIT if trust >= cfg.trust_threshold else Effect.DEFER
    if pit == 3:
        return Effect.DEFER
    return Effect.PERMIT if dual_auth else Effect.DENY


# ---------------------------------------------------------------------------
# Context assembly and selector matching
# ---------------------------------------------------------------------------


def build_context(
    inv: Invocation,
    tool: Tool,
    env: Optional[WorkspaceState],
    descriptor: MACPSDescriptor,
    *,
    trust: float,
    chain_depth: int = 0,
    chain_root: str = "",
    chain_min_max_pit: int = 4,
    dual_auth: bool = False,
    pit: Optional[int] = None,
) -> EvalContext:
    """Flatten a request into the dotted-path view predicates evaluate over.

    Paths that do not apply at the current boundary (workspace state before
    any sensor reading, chain data for chainless requests) are simply
    absent, and predicates over them collapse to false.
    """
    values: dict[str, Any] = {}
    agent = descriptor.agent(inv.subject)
    values["subject.id"] = inv.subject
    if agent is not None:
        values["subject.role"] = agent.role
        values["subject.revoked"] = agent.revoked
    values["tool.id"] = tool.id
    values["tool.pit_class"] = tool.pit_class
    values["tool.physical"] = tool.physical
    target = descriptor.object(tool.target_object)
    if target is not None:
        values["object.id"] = target.id
        values["object.kind"] = target.kind.value
        values["object.subkind"] = target.subkind
    for name, value in inv.params.items():
        if isinstance(value, (bool, int, float, str)):
            values[f"params.{name}"] = value
    values["ep"] = inv.ep.value
    values["session"] = inv.session
    values["tick"] = inv.timestamp
    if env is not None:
        values["env.human_present"] = env.human_present
        if env.human_present:
            values["env.human_distance_m"] = env.human_distance_m
        values["env.tick"] = env.tick
    if chain_depth > 0:
        values["chain.depth"] = chain_depth
        values["chain.root"] = chain_root
        values["chain.min_max_pit"] = chain_min_max_pit
    values["trust"] = trust
    values["dual_auth"] = dual_auth
    if pit is not None:
        values["pit"] = pit
    if inv.taint:
        values["tainted"] = True
    return EvalContext(values=values)


def subject_matches(selector: str, ctx: EvalContext) -> bool:
    if selector == "*":
        return True
    if selector.startswith("role:"):
        return ctx.values.get("subject.role") == selector[5:]
    return ctx.values.get("subject.id") == selector


def object_matches(selector: str, ctx: EvalContext) -> bool:
    if selector == "*":
        return True
    if selector.startswith("kind:"):
        return ctx.values.get("object.kind") == selector[5:]
    if selector.startswith("subkind:"):
        return ctx.values.get("object.subkind") == selector[8:]
    return ctx.values.get("object.id") == selector


def policy_applies(policy: Policy, inv: Invocation, ctx: EvalContext) -> bool:
    if policy.ep is not None and policy.ep != inv.ep:
        return False
    return subject_matches(policy.subject_selector, ctx) and object_matches(
        policy.object_selector, ctx
    )


# ---------------------------------------------------------------------------
# Decision
# ---------------------------------------------------------------------------


def _escalate(effect: Effect, pit: int, pit_bound: Optional[int]) -> Effect:
    """Escalate a PERMIT once the runtime tier reaches the policy's bound:
    deferred below the safety-critical tier, denied at it."""
    if pit_bound is None or effect is not Effect.PERMIT or pit < pit_bound:
        return effect
    return Effect.DENY if pit >= 4 else Effect.DEFER


def evaluate(
    inv: Invocation,
    ctx: EvalContext,
    active: Sequence[Policy],
    cfg: EngineConfig,
) -> Decision:
    """Evaluate the active policy set for one invocation.

    The context must carry `pit`, `trust`, and `dual_auth` (see
    build_context). Fired policies' effects are escalated by tier bound,
    combined with deny-over-defer-over-permit precedence, defaulted to DENY
    when nothing fires, and finally intersected with baseline tier
    enforcement so the stricter of the two wins. Predicate type errors fail
    closed to DENY.
    """
    pit = int(ctx.values["pit"])
    trust = float(ctx.values["trust"])
    dual_auth = bool(ctx.values.get("dual_auth", False))

    fired: list[Policy] = []
    for policy in active:
        if not policy_applies(policy, inv, ctx):
            continue
        try:
            if eval_predicate(policy.predicate, ctx):
                fired.append(policy)
        except PredicateTypeError:
            return Decision(
                outcome=Effect.DENY,
                runtime_pit=pit,
                fired=(policy.id,),
                obligations=(AUDIT_OBLIGATION,),
                rationale="predicate evaluation failure",
            )

    tier_outcome = tier_enforce(pit, trust, cfg, dual_auth)

    if not fired:
        return Decision(
            outcome=Effect.DENY,
            runtime_pit=pit,
            fired=(),
            obligations=(AUDIT_OBLIGATION,),
            rationale="default deny",
        )

    combined = Effect.PERMIT
    for policy in fired:
        combined = stricter(combined, _escalate(policy.effect, pit, policy.pit_bound))

    final = stricter(combined, tier_outcome)
    if final is combined and final is not tier_outcome:
        rationale = f"policy combination {combined.value}"
    elif final is tier_outcome and final is not combined:
        rationale = f"policy combination {combined.value} tightened to {final.value} by tier {pit} enforcement"
    else:
        rationale = f"policy combination and tier {pit} enforcement agree on {final.value}"

    obligations: list[ObligationSpec] = []
    for policy in fired:
        obligations.extend(policy.obligations)
    obligations.append(AUDIT_OBLIGATION)

    return Decision(
        outcome=final,
        runtime_pit=pit,
        fired=tuple(p.id for p in fired),
        obligations=tuple(obligations),
        rationale=rationale,
    )


__all__ = [
    "HUMAN_DISTANCE_TRIGGER",
    "FRAGILE_CLEARANCE",
    "Effect",
    "stricter",
    "UnknownToolError",
    "ObligationSpec",
    "AUDIT_OBLIGATION",
    "Policy",
    "EngineConfig",
    "Decision",
    "param_pit",
    "planned_path",
    "context_pit",
    "runtime_pit",
    "tier_enforce",
    "build_context",
    "subject_matches",
    "object_matches",
    "policy_applies",
    "evaluate",
]
