"""The four-agent workcell deployment: descriptor, default policy set, and
delegation chain builders.

An orchestrator fans natural-language tasks out to a robotic executor, a
vision agent, and a configuration agent. Physical tools drive a small
industrial arm and its gripper inside a simulated workspace; digital tools
read the perception feed into a scene cache and adjust controller settings.
"""

from __future__ import annotations

from typing import List

from ..context_gate import GateConfig
from ..delegation import DelegationChain, DelegationLink
from ..engine import Effect, ObligationSpec, Policy
from ..model import (
    ROLE_CONFIG,
    ROLE_ORCHESTRATOR,
    ROLE_ROBOTIC,
    ROLE_VISION,
    AgentIdentity,
    EnforcementPoint,
    HumanPrincipal,
    MACPSDescriptor,
    ObjectKind,
    ParamSpec,
    PolicyObject,
    ScopeEntry,
    ScopeSet,
    Tool,
)
from ..predicate import parse as pred

OPERATOR = "operator"
SUPERVISOR = "supervisor"
ORCHESTRATOR = "orchestrator"
ROBOTIC = "robotic"
VISION = "vision"
CONFIG = "config"

ARM = "ur-arm"
CLAW = "claw-gripper"
VISION_SENSOR = "vision-sensor"
SAFETY_CURTAIN = "safety-curtain"
WORKPIECE = "workpiece-1"
WORKCELL = "workcell"
OPERATOR_HUMAN_OBJ = "workspace-human"
RAG_STORE = "rag-store"
MEMORY_STORE = "memory-store"
SCENE_CACHE = "scene-cache"
TASK_PLAN = "task-plan"
CONTROLLER = "controller-interface"
OPERATOR_PROMPT = "operator-prompt"

TRUSTED_AUDIT_TAG = "kb-audit-2025"


def _move_arm_tool() -> Tool:
    return Tool(
        id="move_arm",
        pit_class=2,
        physical=True,
        target_object=ARM,
        param_schema=(
            ParamSpec("speed", "numeric", 0.05, 1.0, risk_scaled=True),
            ParamSpec("x", "numeric", -0.8, 0.8, risk_scaled=False),
            ParamSpec("y", "numeric", -0.8, 0.8, risk_scaled=False),
            ParamSpec("z", "numeric", 0.0, 1.0, risk_scaled=False),
        ),
    )


def _gripper_tool() -> Tool:
    return Tool(
        id="gripper",
        pit_class=1,
        physical=True,
        target_object=CLAW,
        param_schema=(
            ParamSpec("action", "enum", choices=("open", "close")),
            ParamSpec("speed", "numeric", 0.0, 0.4, risk_scaled=True),
        ),
    )


def _configure_tool() -> Tool:
    return Tool(
        id="configure",
        pit_class=0,
        physical=False,
        target_object=CONTROLLER,
        param_schema=(
            ParamSpec("key", "enum", choices=("mode", "payload", "speed_limit")),
            ParamSpec("value", "numeric", 0.0, 1.0, risk_scaled=False),
        ),
    )


def _read_sensor_tool() -> Tool:
    # Reads the perception pipeline into the digital scene cache; the cache
    # is what the tool changes, so the tool itself is digital.
    return Tool(
        id="read_sensor",
        pit_class=0,
        physical=False,
        target_object=SCENE_CACHE,
        param_schema=(ParamSpec("channel", "enum", choices=("scene", "proximity")),),
    )


def _full_motion_entry(speed_hi: float, max_pit: int) -> ScopeEntry:
    return ScopeEntry(
        bounds={
            "speed": (0.05, speed_hi),
            "x": (-0.8, 0.8),
            "y": (-0.8, 0.8),
            "z": (0.0, 1.0),
        },
        max_pit=max_pit,
    )


def _gripper_entry(speed_hi: float, max_pit: int) -> ScopeEntry:
    return ScopeEntry(
        bounds={"speed": (0.0, speed_hi)},
        allowed={"action": ("open", "close")},
        max_pit=max_pit,
    )


def orchestrator_scope() -> ScopeSet:
    return ScopeSet(
        entries={
            "move_arm": _full_motion_entry(0.8, 3),
            "gripper": _gripper_entry(0.4, 2),
            "configure": ScopeEntry(
                bounds={"value": (0.0, 1.0)},
                allowed={"key": ("mode", "payload", "speed_limit")},
                max_pit=1,
            ),
            "read_sensor": ScopeEntry(allowed={"channel": ("scene", "proximity")}, max_pit=1),
        }
    )


def robotic_scope() -> ScopeSet:
    return ScopeSet(
        entries={
            "move_arm": _full_motion_entry(0.6, 3),
            "gripper": _gripper_entry(0.4, 2),
        }
    )


def vision_scope() -> ScopeSet:
    return ScopeSet(
        entries={"read_sensor": ScopeEntry(allowed={"channel": ("scene", "proximity")}, max_pit=1)}
    )


def config_scope() -> ScopeSet:
    return ScopeSet(
        entries={
            "configure": ScopeEntry(
                bounds={"value": (0.0, 1.0)},
                allowed={"key": ("mode", "payload")},
                max_pit=1,
            ),
            "read_sensor": ScopeEntry(allowed={"channel": ("scene",)}, max_pit=1),
        }
    )


def workcell_descriptor() -> MACPSDescriptor:
    """The bundled four-agent workcell: two humans, four agents, the five
    enforcement points, and the physical/digital object split."""
    return MACPSDescriptor(
        agents=(
            AgentIdentity(ORCHESTRATOR, ROLE_ORCHESTRATOR, orchestrator_scope()),
            AgentIdentity(ROBOTIC, ROLE_ROBOTIC, robotic_scope()),
            AgentIdentity(VISION, ROLE_VISION, vision_scope()),
            AgentIdentity(CONFIG, ROLE_CONFIG, config_scope()),
        ),
        humans=(
            HumanPrincipal(OPERATOR, can_dual_authorize=True),
            HumanPrincipal(SUPERVISOR, can_dual_authorize=True),
        ),
        objects=(
            PolicyObject(ARM, ObjectKind.PHYSICAL, "Manipulator"),
            PolicyObject(CLAW, ObjectKind.PHYSICAL, "EndEffector"),
            PolicyObject(VISION_SENSOR, ObjectKind.PHYSICAL, "Sensor"),
            PolicyObject(SAFETY_CURTAIN, ObjectKind.PHYSICAL, "Sensor"),
            PolicyObject(WORKPIECE, ObjectKind.PHYSICAL, "Workpiece"),
            PolicyObject(OPERATOR_HUMAN_OBJ, ObjectKind.PHYSICAL, "HumanInWorkspace"),
            PolicyObject(WORKCELL, ObjectKind.PHYSICAL, "Environment"),
            PolicyObject(RAG_STORE, ObjectKind.DIGITAL, "RagStore"),
            PolicyObject(MEMORY_STORE, ObjectKind.DIGITAL, "MemoryStore"),
            PolicyObject(SCENE_CACHE, ObjectKind.DIGITAL, "MemoryStore"),
            PolicyObject(TASK_PLAN, ObjectKind.DIGITAL, "TaskPlan"),
            PolicyObject(CONTROLLER, ObjectKind.DIGITAL, "ControllerInterface"),
            PolicyObject(OPERATOR_PROMPT, ObjectKind.DIGITAL, "Prompt"),
        ),
        tools=(_move_arm_tool(), _gripper_tool(), _configure_tool(), _read_sensor_tool()),
    )


def default_gate_config() -> GateConfig:
    return GateConfig(trusted_audit_tags=frozenset({TRUSTED_AUDIT_TAG}))


def default_policies() -> List[Policy]:
    """Baseline rules for the workcell.

    Permissions are explicit per role and object class; anything not
    covered falls to the engine's default deny. Physical permissions carry
    a tier bound so they escalate on their own once runtime consequence
    reaches the high-consequence tier.
    """
    telemetry = (ObligationSpec(kind="telemetry"),)
    trust_update = (ObligationSpec(kind="trust_update"),)
    return [
        Policy(
            id="permit-robotic-motion-e4",
            subject_selector=f"role:{ROLE_ROBOTIC}",
            object_selector="kind:physical",
            predicate=pred("tool.physical and params.speed <= 1.0"),
            ep=EnforcementPoint.E4_TOOL_INVOCATION,
            effect=Effect.PERMIT,
            obligations=telemetry + trust_update,
            pit_bound=3,
        ),
        Policy(
            id="permit-robotic-actuation-e5",
            subject_selector=f"role:{ROLE_ROBOTIC}",
            object_selector="kind:physical",
            predicate=pred("tool.physical"),
            ep=EnforcementPoint.E5_PRE_ACTUATION,
            effect=Effect.PERMIT,
            obligations=telemetry,
            pit_bound=3,
        ),
        Policy(
            id="permit-orchestrator-motion-e4",
            subject_selector=f"role:{ROLE_ORCHESTRATOR}",
            object_selector="kind:physical",
            predicate=pred("tool.physical and params.speed <= 0.8"),
            ep=EnforcementPoint.E4_TOOL_INVOCATION,
            effect=Effect.PERMIT,
            obligations=telemetry + trust_update,
            pit_bound=3,
        ),
        Policy(
            id="permit-orchestrator-actuation-e5",
            subject_selector=f"role:{ROLE_ORCHESTRATOR}",
            object_selector="kind:physical",
            predicate=pred("tool.physical"),
            ep=EnforcementPoint.E5_PRE_ACTUATION,
            effect=Effect.PERMIT,
            obligations=telemetry,
            pit_bound=3,
        ),
        Policy(
            id="permit-vision-read",
            subject_selector=f"role:{ROLE_VISION}",
            object_selector="kind:digital",
            predicate=pred('tool.id = "read_sensor"'),
            ep=EnforcementPoint.E4_TOOL_INVOCATION,
            effect=Effect.PERMIT,
            obligations=telemetry,
        ),
        Policy(
            id="permit-config-benign-keys",
            subject_selector=f"role:{ROLE_CONFIG}",
            object_selector=CONTROLLER,
            predicate=pred('params.key in ["mode", "payload"]'),
            ep=EnforcementPoint.E4_TOOL_INVOCATION,
            effect=Effect.PERMIT,
            obligations=telemetry,
        ),
        Policy(
            id="permit-orchestrator-read",
            subject_selector=f"role:{ROLE_ORCHESTRATOR}",
            object_selector="kind:digital",
            predicate=pred('tool.id = "read_sensor"'),
            ep=EnforcementPoint.E4_TOOL_INVOCATION,
            effect=Effect.PERMIT,
            obligations=telemetry,
        ),
    ]


def chain_for(specialist: str, issued_tick: int = 0) -> DelegationChain:
    """Operator -> orchestrator -> specialist, with scopes narrowing at
    every step."""
    orch_scope = orchestrator_scope()
    spec_scope = {
        ROBOTIC: robotic_scope(),
        VISION: vision_scope(),
        CONFIG: config_scope(),
    }[specialist]
    return DelegationChain(
        id=f"chain-{OPERATOR}-{specialist}",
        root=OPERATOR,
        links=(
            DelegationLink(OPERATOR, ORCHESTRATOR, orch_scope, issued_tick=issued_tick),
            DelegationLink(ORCHESTRATOR, specialist, spec_scope, issued_tick=issued_tick),
        ),
    )


def orchestrator_chain(issued_tick: int = 0) -> DelegationChain:
    return DelegationChain(
        id=f"chain-{OPERATOR}-{ORCHESTRATOR}",
        root=OPERATOR,
        links=(DelegationLink(OPERATOR, ORCHESTRATOR, orchestrator_scope(), issued_tick=issued_tick),),
    )


__all__ = [
    "OPERATOR", "SUPERVISOR", "ORCHESTRATOR", "ROBOTIC", "VISION", "CONFIG",
    "ARM", "CLAW", "VISION_SENSOR", "SAFETY_CURTAIN", "WORKPIECE", "WORKCELL",
    "RAG_STORE", "MEMORY_STORE", "SCENE_CACHE", "TASK_PLAN", "CONTROLLER",
    "TRUSTED_AUDIT_TAG",
    "workcell_descriptor", "default_gate_config", "default_policies",
    "orchestrator_scope", "robotic_scope", "vision_scope", "config_scope",
    "chain_for", "orchestrator_chain",
]
