"""Admission control for everything that enters an agent's context.

Operator input, inter-agent messages, retrieved documents, sensor readings,
and tool responses all pass through `admit` before an agent may reason over
them. Rejection is a value, not an exception, and carries the primitive
that fired so runs can be judged per check. Admitted items may carry taint
labels recording soft warnings; taint is sticky and propagates to anything
derived from a tainted item.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, FrozenSet, Mapping, Optional, Tuple, Union

from .model import EnforcementPoint, MACPSDescriptor, ObjectKind, PolicyObject
from .primitives import (
    CATP_4,
    CII_1,
    CII_2,
    CII_3,
    CII_4,
    CII_5,
    CII_6,
    EnforcementFlags,
    PrimitiveId,
)

INJECTION_TAINT = "injection-suspect"


class Channel(str, Enum):
    OPERATOR = "Operator"
    INTER_AGENT = "InterAgent"
    RETRIEVAL = "Retrieval"
    SENSOR = "Sensor"
    TOOL_RESPONSE = "ToolResponse"


@dataclass(frozen=True)
class Provenance:
    source_id: str
    signed_off: bool = False
    audit_tag: Optional[str] = None
    freshness_tick: int = 0


@dataclass(frozen=True)
class ContextItem:
    id: str
    channel: Channel
    payload: Union[str, Mapping[str, Any]]
    provenance: Provenance
    taint: FrozenSet[str] = frozenset()

    def payload_text(self) -> str:
        if isinstance(self.payload, str):
            return self.payload
        return " ".join(str(v) for v in self.payload.values())


@dataclass(frozen=True)
class GateConfig:
    """Screening patterns and registries for admission control.

    `reject_patterns` are instruction-override phrases that block an item
    outright; `suspect_patterns` merely taint it. Matching is
    case-insensitive substring matching, which keeps admission
    deterministic and desk-checkable.
    """

    reject_patterns: Tuple[str, ...] = (
        "ignore previous instructions",
        "ignore all previous",
        "disregard safety",
        "override safety",
        "you must obey",
        "new system prompt",
    )
    suspect_patterns: Tuple[str, ...] = (
        "urgent override",
        "do not tell the operator",
        "bypass",
    )
    staleness_ticks: int = 10
    trusted_audit_tags: FrozenSet[str] = frozenset()
    message_required_keys: Tuple[str, ...] = ("task", "origin", "chain_id")


@dataclass(frozen=True)
class Admitted:
    item: ContextItem


@dataclass(frozen=True)
class Rejected:
    primitive: PrimitiveId
    reason: str


AdmitResult = Union[Admitted, Rejected]


def _match(text: str, patterns: Tuple[str, ...]) -> Optional[str]:
    lowered = text.lower()
    for pattern in patterns:
        if pattern.lower() in lowered:
            return pattern
    return None


def admit(
    item: ContextItem,
    ep: EnforcementPoint,
    descriptor: MACPSDescriptor,
    cfg: GateConfig,
    flags: EnforcementFlags = EnforcementFlags.all_on(),
    now: int = 0,
    target: Optional[PolicyObject] = None,
) -> AdmitResult:
    """Run the input-integrity checks that apply to an item's channel.

    Only valid at the ingress, inter-agent, and context-admission
    boundaries. Disabled checks are skipped entirely (that is what an
    attack scenario exploits). `target` is the object a write-style item
    is headed for, used to gate writes to persistent memory stores.
    """
    if ep not in (
        EnforcementPoint.E1_REASONING_INGRESS,
        EnforcementPoint.E2_INTER_AGENT,
        EnforcementPoint.E3_CONTEXT_ADMISSION,
    ):
        raise ValueError(f"admission runs at e1/e2/e3, not {ep.value}")

    text = item.payload_text()

    if item.channel is Channel.OPERATOR and flags.enabled(CII_1):
        hit = _match(text, cfg.reject_patterns)
        if hit:
            return Rejected(CII_1, f"operator input contains override pattern {hit!r}")

    if item.channel is Channel.INTER_AGENT:
        if flags.enabled(CII_2):
            origin = descriptor.agent(item.provenance.source_id)
            if origin is None or origin.revoked:
                return Rejected(CII_2, f"message origin {item.provenance.source_id!r} is not a valid agent")
            if not isinstance(item.payload, Mapping):
                return Rejected(CII_2, "inter-agent message payload is not structured")
            missing = [k for k in cfg.message_required_keys if k not in item.payload]
            if missing:
                return Rejected(CII_2, f"inter-agent message missing fields {missing}")
            hit = _match(text, cfg.reject_patterns)
            if hit:
                return Rejected(CII_2, f"delegated instruction contains override pattern {hit!r}")
        if flags.enabled(CATP_4) and not item.provenance.signed_off:
            return Rejected(CATP_4, "inter-agent instruction is not attested by its origin")

    if item.channel is Channel.RETRIEVAL and flags.enabled(CII_3):
        tag = item.provenance.audit_tag
        if tag is None or tag not in cfg.trusted_audit_tags:
            return Rejected(CII_3, "unaudited retrieval")

    if item.channel is Channel.SENSOR and flags.enabled(CII_4):
        source = descriptor.object(item.provenance.source_id)
        if source is None or source.kind is not ObjectKind.PHYSICAL or source.subkind != "Sensor":
            return Rejected(CII_4, f"unknown sensor {item.provenance.source_id!r}")
        age = now - item.provenance.freshness_tick
        if age > cfg.staleness_ticks:
            return Rejected(CII_4, f"sensor reading is stale ({age} ticks old)")

    if item.channel is Channel.TOOL_RESPONSE and flags.enabled(CII_6):
        hit = _match(text, cfg.reject_patterns)
        if hit:
            return Rejected(CII_6, f"tool response contains override pattern {hit!r}")

    if (
        target is not None
        and target.kind is ObjectKind.DIGITAL
        and target.subkind == "MemoryStore"
        and flags.enabled(CII_5)
        and not item.provenance.signed_off
    ):
        return Rejected(CII_5, "memory write requires signed-off provenance")

    taint = set(item.taint)
    hit = _match(text, cfg.suspect_patterns)
    if hit:
        taint.add(INJECTION_TAINT)
    return Admitted(replace(item, taint=frozenset(taint)))


def taint_propagate(parent: ContextItem, derived: ContextItem) -> ContextItem:
    """Anything derived from a tainted item inherits the taint."""
    if not parent.taint:
        return derived
    return replace(derived, taint=frozenset(derived.taint | parent.taint))


__all__ = [
    "INJECTION_TAINT",
    "Channel",
    "Provenance",
    "ContextItem",
    "GateConfig",
    "Admitted",
    "Rejected",
    "AdmitResult",
    "admit",
    "taint_propagate",
]
