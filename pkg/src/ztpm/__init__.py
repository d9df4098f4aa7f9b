"""ZTPM: Zero Trust policy enforcement for multi-agent robotic control.

A policy decision point with runtime physical impact tiers, delegation
chain validation, cognitive input admission, actuation gating, behavioural
governance, and a human deferral broker, together with a deterministic
simulation of a four-agent robotic control pipeline and red-team scenarios
for five attack classes.
"""

from .engine import Decision, Effect, EngineConfig, Policy, runtime_pit, tier_enforce
from .model import (
    AgentIdentity,
    EnforcementPoint,
    HumanPrincipal,
    Invocation,
    MACPSDescriptor,
    Tool,
    WorkspaceState,
    validate_descriptor,
)
from .primitives import AttackClass, EnforcementFlags, coverage_matrix

__version__ = "0.1.0"

__all__ = [
    "Decision",
    "Effect",
    "EngineConfig",
    "Policy",
    "runtime_pit",
    "tier_enforce",
    "AgentIdentity",
    "EnforcementPoint",
    "HumanPrincipal",
    "Invocation",
    "MACPSDescriptor",
    "Tool",
    "WorkspaceState",
    "validate_descriptor",
    "AttackClass",
    "EnforcementFlags",
    "coverage_matrix",
    "__version__",
]
