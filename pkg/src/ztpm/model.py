"""Core domain types shared by every enforcement layer.

Everything here is an immutable value type: simulation state advances by
constructing new values, never by mutating old ones, so snapshots can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping, Optional, Sequence, Tuple

Vec3 = Tuple[float, float, float]

PIT_MIN = 0
PIT_MAX = 4

# Canonical agent role names. Any other non-empty string is a legal
# free-form role; these are the ones selectors and planners know about.
ROLE_ORCHESTRATOR = "Orchestrator"
ROLE_ROBOTIC = "Robotic"
ROLE_VISION = "Vision"
ROLE_CONFIG = "Config"


class EnforcementPoint(str, Enum):
    """The five trust boundaries on the path from operator input to actuation."""

    E1_REASONING_INGRESS = "e1"
    E2_INTER_AGENT = "e2"
    E3_CONTEXT_ADMISSION = "e3"
    E4_TOOL_INVOCATION = "e4"
    E5_PRE_ACTUATION = "e5"


class ObjectKind(str, Enum):
    DIGITAL = "digital"
    PHYSICAL = "physical"


DIGITAL_SUBKINDS = frozenset(
    {"Prompt", "MemoryStore", "RagStore", "TaskPlan", "ToolSchema", "ControllerInterface"}
)
PHYSICAL_SUBKINDS = frozenset(
    {"Manipulator", "MobileBase", "EndEffector", "Sensor", "Workpiece",
     "HumanInWorkspace", "Environment"}
)


@dataclass(frozen=True)
class PolicyObject:
    """A governed resource: either digital (prompts, stores, plans, schemas,
    controller interfaces) or physical (hardware, workpieces, humans, the
    environment). The kind partition is exclusive and exhaustive."""

    id: str
    kind: ObjectKind
    subkind: str


@dataclass(frozen=True)
class HumanPrincipal:
    """A human who can root delegation chains and resolve deferred actions."""

    id: str
    can_dual_authorize: bool = False


@dataclass(frozen=True)
class ParamSpec:
    """Schema for one tool parameter.

    Numeric parameters carry inclusive [min, max] bounds. `risk_scaled`
    marks parameters whose magnitude tracks physical consequence (speed,
    force); only those contribute to parameter-derived impact tiers.
    Positional coordinates are numeric but not risk scaled.
    """

    name: str
    kind: str  # "numeric" | "enum"
    min: Optional[float] = None
    max: Optional[float] = None
    choices: Tuple[str, ...] = ()
    risk_scaled: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("numeric", "enum"):
            raise ValueError(f"param {self.name}: kind must be numeric or enum")
        if self.kind == "numeric" and (self.min is None or self.max is None):
            raise ValueError(f"param {self.name}: numeric params need min and max")


@dataclass(frozen=True)
class Tool:
    """A callable capability. Tools that can change physical objects are
    physical and carry a base impact tier 1..4; digital-only tools are tier 0."""

    id: str
    pit_class: int
    physical: bool
    param_schema: Tuple[ParamSpec, ...] = ()
    target_object: str = ""

    def param(self, name: str) -> Optional[ParamSpec]:
        for spec in self.param_schema:
            if spec.name == name:
                return spec
        return None


@dataclass(frozen=True)
class ScopeEntry:
    """Delegated authority over one tool: per-parameter limits plus the
    maximum runtime impact tier the holder may trigger through it.

    `bounds` maps numeric parameter names to inclusive (lo, hi) limits;
    `allowed` maps enum parameter names to the permitted values. Parameters
    absent from both are unconstrained up to the tool schema.
    """

    bounds: Mapping[str, Tuple[float, float]] = field(default_factory=dict)
    allowed: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    max_pit: int = PIT_MAX


@dataclass(frozen=True)
class ScopeSet:
    """The set of tools an agent may invoke, with per-tool limits."""

    entries: Mapping[str, ScopeEntry] = field(default_factory=dict)

    def tools(self) -> Sequence[str]:
        return sorted(self.entries)

    def entry(self, tool_id: str) -> Optional[ScopeEntry]:
        return self.entries.get(tool_id)

    def __contains__(self, tool_id: str) -> bool:
        return tool_id in self.entries

    def is_empty(self) -> bool:
        return not self.entries


@dataclass(frozen=True)
class AgentIdentity:
    id: str
    role: str
    granted_scope: ScopeSet = field(default_factory=ScopeSet)
    revoked: bool = False


@dataclass(frozen=True)
class Zone:
    """Axis-aligned box in meters."""

    min_corner: Vec3
    max_corner: Vec3

    def contains(self, p: Vec3) -> bool:
        return all(self.min_corner[i] <= p[i] <= self.max_corner[i] for i in range(3))

    def extent(self, axis: int) -> float:
        return self.max_corner[axis] - self.min_corner[axis]


@dataclass(frozen=True)
class FragileObject:
    position: Vec3
    radius: float = 0.0


@dataclass(frozen=True)
class WorkspaceState:
    """Live physical context: who and what is near the arm right now.

    `human_distance_m` is meaningful only while `human_present` is true.
    Time is a logical tick so runs replay bit-for-bit.
    """

    human_present: bool = False
    human_distance_m: float = 0.0
    fragile_objects: Tuple[FragileObject, ...] = ()
    forbidden_zones: Tuple[Zone, ...] = ()
    arm_position: Vec3 = (0.0, 0.0, 0.3)
    tick: int = 0


@dataclass(frozen=True)
class Invocation:
    """One tool call as seen by the decision point."""

    id: str
    subject: str               # acting agent id
    chain: str                 # delegation chain id
    tool: str
    params: Mapping[str, Any]
    ep: EnforcementPoint
    timestamp: int             # logical tick, strictly increasing per session
    session: str
    taint: Tuple[str, ...] = ()  # labels inherited from tainted context items


@dataclass(frozen=True)
class MACPSDescriptor:
    """Static description of one multi-agent cyber-physical deployment:
    agents, humans, governed objects, tools, and its enforcement points."""

    agents: Tuple[AgentIdentity, ...] = ()
    humans: Tuple[HumanPrincipal, ...] = ()
    objects: Tuple[PolicyObject, ...] = ()
    tools: Tuple[Tool, ...] = ()
    enforcement_points: Tuple[EnforcementPoint, ...] = tuple(EnforcementPoint)

    def agent(self, agent_id: str) -> Optional[AgentIdentity]:
        for a in self.agents:
            if a.id == agent_id:
                return a
        return None

    def human(self, human_id: str) -> Optional[HumanPrincipal]:
        for h in self.humans:
            if h.id == human_id:
                return h
        return None

    def object(self, object_id: str) -> Optional[PolicyObject]:
        for o in self.objects:
            if o.id == object_id:
                return o
        return None

    def tool(self, tool_id: str) -> Optional[Tool]:
        for t in self.tools:
            if t.id == tool_id:
                return t
        return None

    def digital_objects(self) -> Tuple[PolicyObject, ...]:
        return tuple(o for o in self.objects if o.kind is ObjectKind.DIGITAL)

    def physical_objects(self) -> Tuple[PolicyObject, ...]:
        return tuple(o for o in self.objects if o.kind is ObjectKind.PHYSICAL)


def _dupes(ids: Sequence[str]) -> Sequence[str]:
    seen: set = set()
    out = []
    for i in ids:
        if i in seen and i not in out:
            out.append(i)
        seen.add(i)
    return out


def validate_descriptor(d: MACPSDescriptor) -> list[str]:
    """Check every structural invariant of a descriptor.

    Returns an empty list when the descriptor is well formed; otherwise one
    message per violation, each naming the offending entity. Violations are
    data, not exceptions, so callers can report all of them at once.
    """
    violations: list[str] = []

    for label, ids in (
        ("agent", [a.id for a in d.agents]),
        ("tool", [t.id for t in d.tools]),
        ("object", [o.id for o in d.objects]),
        ("human", [h.id for h in d.humans]),
    ):
        for dup in _dupes(ids):
            violations.append(f"duplicate {label} id {dup!r}")

    agent_ids = {a.id for a in d.agents}
    for h in d.humans:
        if h.id in agent_ids:
            violations.append(f"human id {h.id!r} collides with an agent id")

    for o in d.objects:
        expected = DIGITAL_SUBKINDS if o.kind is ObjectKind.DIGITAL else PHYSICAL_SUBKINDS
        if o.subkind not in expected:
            violations.append(f"object {o.id!r}: subkind {o.subkind!r} invalid for {o.kind.value}")

    for t in d.tools:
        if not (PIT_MIN <= t.pit_class <= PIT_MAX):
            violations.append(f"tool {t.id!r}: pit_class {t.pit_class} outside 0..4")
        target = d.object(t.target_object)
        if target is None:
            violations.append(f"tool {t.id!r}: target object {t.target_object!r} not declared")
        else:
            target_physical = target.kind is ObjectKind.PHYSICAL
            if t.physical != target_physical:
                violations.append(
                    f"tool {t.id!r}: physical={t.physical} but target object is {target.kind.value}"
                )
        if t.pit_class >= 1 and not t.physical:
            violations.append(f"tool {t.id!r}: pit_class >= 1 requires a physical tool")
        if t.pit_class == 0 and t.physical:
            violations.append(f"tool {t.id!r}: physical tools must have pit_class >= 1")
        for spec in t.param_schema:
            if spec.kind == "numeric" and spec.min is not None and spec.max is not None:
                if spec.min > spec.max:
                    violations.append(f"tool {t.id!r}: param {spec.name!r} has min > max")

    for a in d.agents:
        if not a.revoked and a.granted_scope.is_empty():
            violations.append(f"agent {a.id!r}: non-revoked agents need a non-empty scope")
        violations.extend(validate_scope(a.granted_scope, d, owner=f"agent {a.id!r}"))

    return violations


def validate_workspace(w: WorkspaceState) -> list[str]:
    """Check a workspace snapshot's structural invariants."""
    violations: list[str] = []
    if w.human_distance_m < 0:
        violations.append(f"human_distance_m {w.human_distance_m} is negative")
    for i, zone in enumerate(w.forbidden_zones, start=1):
        for axis in range(3):
            if zone.min_corner[axis] > zone.max_corner[axis]:
                violations.append(f"forbidden zone {i}: min > max on axis {axis}")
    for i, obj in enumerate(w.fragile_objects, start=1):
        if obj.radius < 0:
            violations.append(f"fragile object {i}: negative radius")
    return violations


def validate_scope(scope: ScopeSet, d: MACPSDescriptor, owner: str = "scope") -> list[str]:
    """Check a scope against the tool schemas it references."""
    violations: list[str] = []
    for tool_id in scope.tools():
        entry = scope.entries[tool_id]
        tool = d.tool(tool_id)
        if tool is None:
            violations.append(f"{owner}: references unknown tool {tool_id!r}")
            continue
        if not (PIT_MIN <= entry.max_pit <= PIT_MAX):
            violations.append(f"{owner}: tool {tool_id!r} max_pit {entry.max_pit} outside 0..4")
        for pname, (lo, hi) in entry.bounds.items():
            spec = tool.param(pname)
            if spec is None or spec.kind != "numeric":
                violations.append(f"{owner}: tool {tool_id!r} bounds on unknown numeric param {pname!r}")
                continue
            if lo > hi:
                violations.append(f"{owner}: tool {tool_id!r} param {pname!r} bound has lo > hi")
            if spec.min is not None and (lo < spec.min or hi > spec.max):
                violations.append(
                    f"{owner}: tool {tool_id!r} param {pname!r} bound [{lo}, {hi}] exceeds schema"
                )
        for pname, values in entry.allowed.items():
            spec = tool.param(pname)
            if spec is None or spec.kind != "enum":
                violations.append(f"{owner}: tool {tool_id!r} allowed values on unknown enum param {pname!r}")
                continue
            for v in values:
                if v not in spec.choices:
                    violations.append(
                        f"{owner}: tool {tool_id!r} param {pname!r} value {v!r} not in schema choices"
                    )
    return violations


def conforms_to_schema(tool: Tool, params: Mapping[str, Any]) -> list[str]:
    """Check invocation parameters against a tool's schema. Unknown names,
    missing values, and out-of-kind values are violations."""
    violations: list[str] = []
    known = {s.name for s in tool.param_schema}
    for name in params:
        if name not in known:
            violations.append(f"tool {tool.id!r}: unknown param {name!r}")
    for spec in tool.param_schema:
        if spec.name not in params:
            violations.append(f"tool {tool.id!r}: missing param {spec.name!r}")
            continue
        value = params[spec.name]
        if spec.kind == "numeric":
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                violations.append(f"tool {tool.id!r}: param {spec.name!r} must be numeric")
        else:
            if value not in spec.choices:
                violations.append(f"tool {tool.id!r}: param {spec.name!r} value {value!r} not a choice")
    return violations


__all__ = [
    "Vec3",
    "PIT_MIN",
    "PIT_MAX",
    "ROLE_ORCHESTRATOR",
    "ROLE_ROBOTIC",
    "ROLE_VISION",
    "ROLE_CONFIG",
    "EnforcementPoint",
    "ObjectKind",
    "DIGITAL_SUBKINDS",
    "PHYSICAL_SUBKINDS",
    "PolicyObject",
    "HumanPrincipal",
    "ParamSpec",
    "Tool",
    "ScopeEntry",
    "ScopeSet",
    "AgentIdentity",
    "Zone",
    "FragileObject",
    "WorkspaceState",
    "Invocation",
    "MACPSDescriptor",
    "validate_descriptor",
    "validate_workspace",
    "validate_scope",
    "conforms_to_schema",
    "replace",
]
