"""The typed policy primitive registry and the attack coverage matrix.

Primitives are grouped into five enforcement domains:

* AID: agent identity and delegation (who is acting)
* CII: cognitive input integrity (what enters reasoning)
* TEA: tool execution authority (can it act)
* CATP: cross-agent trust propagation (how it was authorised)
* ABG: adaptive behavioural governance (is it still safe over time)

Each check in the enforcement pipeline is attributed to exactly one
primitive so scenarios can enable or disable them individually.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Tuple


class Domain(str, Enum):
    AID = "AID"
    CII = "CII"
    TEA = "TEA"
    CATP = "CATP"
    ABG = "ABG"


@dataclass(frozen=True, order=True)
class PrimitiveId:
    domain: Domain
    index: int

    def __str__(self) -> str:
        return f"{self.domain.value}-{self.index}"


def parse_primitive(text: str) -> PrimitiveId:
    try:
        domain, index = text.strip().split("-")
        return PrimitiveId(Domain(domain.upper()), int(index))
    except (ValueError, KeyError) as exc:
        raise ValueError(f"not a primitive id: {text!r}") from exc


def _p(domain: Domain, index: int) -> PrimitiveId:
    return PrimitiveId(domain, index)


AID_1 = _p(Domain.AID, 1)
AID_2 = _p(Domain.AID, 2)
AID_3 = _p(Domain.AID, 3)
AID_4 = _p(Domain.AID, 4)
AID_5 = _p(Domain.AID, 5)
CII_1 = _p(Domain.CII, 1)
CII_2 = _p(Domain.CII, 2)
CII_3 = _p(Domain.CII, 3)
CII_4 = _p(Domain.CII, 4)
CII_5 = _p(Domain.CII, 5)
CII_6 = _p(Domain.CII, 6)
TEA_1 = _p(Domain.TEA, 1)
TEA_2 = _p(Domain.TEA, 2)
TEA_3 = _p(Domain.TEA, 3)
TEA_4 = _p(Domain.TEA, 4)
TEA_5 = _p(Domain.TEA, 5)
TEA_6 = _p(Domain.TEA, 6)
CATP_1 = _p(Domain.CATP, 1)
CATP_2 = _p(Domain.CATP, 2)
CATP_3 = _p(Domain.CATP, 3)
CATP_4 = _p(Domain.CATP, 4)
ABG_1 = _p(Domain.ABG, 1)
ABG_2 = _p(Domain.ABG, 2)
ABG_3 = _p(Domain.ABG, 3)
ABG_4 = _p(Domain.ABG, 4)


# One-line functional description per primitive. AID-1/2/3/5, TEA-3/5 and
# ABG-3 are registry fill: their checks are plain reconstructions of what a
# complete identity/tooling/governance layer needs.
REGISTRY: Dict[PrimitiveId, str] = {
    AID_1: "agent identity attestation: the acting subject is a registered, known agent",
    AID_2: "delegation chains must be rooted in a registered human principal",
    AID_3: "revocation check: no revoked link or revoked agent anywhere in the chain",
    AID_4: "scope escalation detection: every delegation step may only narrow authority",
    AID_5: "delegation chain depth limit",
    CII_1: "operator input screening for instruction-override patterns",
    CII_2: "inter-agent message schema and origin validation",
    CII_3: "retrieval audit check: only documents carrying a trusted audit tag are admitted",
    CII_4: "sensor provenance and freshness check before perception data enters context",
    CII_5: "memory-write gating: persistent stores only accept signed-off provenance",
    CII_6: "tool-response screening for instruction-override patterns",
    TEA_1: "tool-in-scope check: the invoked tool must be in the delegated scope",
    TEA_2: "parameter and consequence limits: params within delegated bounds, tier within ceiling",
    TEA_3: "per-tool rate limiting within a sliding window",
    TEA_4: "actuation bound enforcement when a human is close to the robot",
    TEA_5: "configuration-change gating: config tools require human approval",
    TEA_6: "sequence-level trajectory coherence across recent commands",
    CATP_1: "boundary re-attestation: every link must be freshly attested at each crossing",
    CATP_2: "scope narrowing enforcement: authority is the intersection of all chain links",
    CATP_3: "chain freeze: a chain that fails integrity checks is frozen pending human review",
    CATP_4: "explicit message authorisation: inter-agent instructions must be attested by their origin",
    ABG_1: "behavioural drift detection against a calibrated per-agent baseline",
    ABG_2: "scope contraction to the minimum safe set on sustained drift",
    ABG_3: "baseline recalibration gate: baselines change only through a human-approved run",
    ABG_4: "session quarantine after a security violation inside the session",
}

ALL_PRIMITIVES: Tuple[PrimitiveId, ...] = tuple(sorted(REGISTRY))


class AttackClass(str, Enum):
    AC1_PERCEPTION_INJECTION = "AC-1"
    AC2_PROMPT_PROPAGATION = "AC-2"
    AC3_CONTEXT_POISONING = "AC-3"
    AC4_SCOPE_ESCALATION = "AC-4"
    AC5_SEQUENCE_ABUSE = "AC-5"


@dataclass(frozen=True)
class Coverage:
    detection: FrozenSet[PrimitiveId]
    prevention: FrozenSet[PrimitiveId]
    containment: FrozenSet[PrimitiveId]


def coverage_matrix() -> Dict[AttackClass, Coverage]:
    """Which primitives detect, prevent, and contain each attack class."""
    return {
        AttackClass.AC1_PERCEPTION_INJECTION: Coverage(
            detection=frozenset({CII_4}),
            prevention=frozenset({CII_4, TEA_4}),
            containment=frozenset({TEA_6, ABG_2}),
        ),
        AttackClass.AC2_PROMPT_PROPAGATION: Coverage(
            detection=frozenset({CII_2, CII_6}),
            prevention=frozenset({CII_1, CATP_4}),
            containment=frozenset({CATP_1, CATP_2}),
        ),
        AttackClass.AC3_CONTEXT_POISONING: Coverage(
            detection=frozenset({CII_2, CII_3}),
            prevention=frozenset({CII_3, CII_5}),
            containment=frozenset({ABG_1, ABG_4}),
        ),
        AttackClass.AC4_SCOPE_ESCALATION: Coverage(
            detection=frozenset({AID_4, TEA_1}),
            prevention=frozenset({AID_4, CATP_2}),
            containment=frozenset({CATP_3, ABG_4}),
        ),
        AttackClass.AC5_SEQUENCE_ABUSE: Coverage(
            detection=frozenset({TEA_6}),
            prevention=frozenset({TEA_6, TEA_4}),
            containment=frozenset({ABG_1, ABG_2}),
        ),
    }


@dataclass(frozen=True)
class EnforcementFlags:
    """Per-primitive enable switches for a run.

    `enabled_set` is meaningful only in "only" mode; "all" and "none"
    ignore it.
    """

    mode: str = "all"  # "all" | "none" | "only"
    enabled_set: FrozenSet[PrimitiveId] = frozenset()

    @classmethod
    def all_on(cls) -> "EnforcementFlags":
        return cls(mode="all")

    @classmethod
    def none(cls) -> "EnforcementFlags":
        return cls(mode="none")

    @classmethod
    def only(cls, primitives: Iterable[PrimitiveId]) -> "EnforcementFlags":
        return cls(mode="only", enabled_set=frozenset(primitives))

    @classmethod
    def parse(cls, text) -> "EnforcementFlags":
        if isinstance(text, EnforcementFlags):
            return text
        if isinstance(text, str):
            if text == "all":
                return cls.all_on()
            if text == "none":
                return cls.none()
            parts = [t for t in text.replace(",", " ").split() if t]
            return cls.only(parse_primitive(p) for p in parts)
        return cls.only(parse_primitive(p) if isinstance(p, str) else p for p in text)

    def enabled(self, primitive: PrimitiveId) -> bool:
        if self.mode == "all":
            return True
        if self.mode == "none":
            return False
        return primitive in self.enabled_set

    def describe(self) -> str:
        if self.mode in ("all", "none"):
            return self.mode
        return ",".join(str(p) for p in sorted(self.enabled_set))


__all__ = [
    "Domain",
    "PrimitiveId",
    "parse_primitive",
    "REGISTRY",
    "ALL_PRIMITIVES",
    "AttackClass",
    "Coverage",
    "coverage_matrix",
    "EnforcementFlags",
    # named primitive constants
    "AID_1", "AID_2", "AID_3", "AID_4", "AID_5",
    "CII_1", "CII_2", "CII_3", "CII_4", "CII_5", "CII_6",
    "TEA_1", "TEA_2", "TEA_3", "TEA_4", "TEA_5", "TEA_6",
    "CATP_1", "CATP_2", "CATP_3", "CATP_4",
    "ABG_1", "ABG_2", "ABG_3", "ABG_4",
]
