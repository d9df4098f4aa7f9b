"""Scenario definitions: what a run looks like before it runs.

A scenario pins everything that matters for reproducibility: the
deployment, the policy set, the ground-truth workspace timeline, the
operator script, the backend stub and its seed, attack injections, the
per-primitive enforcement flags, and the scripted approver. A scenario
plus its seed fully determines a run.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .. import documents
from ..actuation import ActuationConfig
from ..context_gate import GateConfig
from ..delegation import DelegationChain, TrustConfig, validate_chain
from ..engine import EngineConfig, Policy
from ..governor import GovernorConfig
from ..model import MACPSDescriptor, WorkspaceState
from ..primitives import AttackClass, EnforcementFlags
from . import topology
from .backends import CONTEXT_BLIND, CONTEXT_SENSITIVE_NOISY


def plainify(value: Any) -> Any:
    """Recursively convert payload values to YAML-safe plain types."""
    if isinstance(value, Mapping):
        return {str(k): plainify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plainify(v) for v in value]
    return value


@dataclass(frozen=True)
class AttackSpec:
    attack_class: AttackClass
    trigger_tick: int
    payload: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload", plainify(self.payload))


@dataclass(frozen=True)
class Scenario:
    name: str
    descriptor: MACPSDescriptor
    policies: Tuple[Policy, ...]
    workspace: WorkspaceState
    operator_script: Tuple[str, ...]
    calibration_script: Tuple[str, ...] = ()
    backend_kind: str = CONTEXT_BLIND
    seed: int = 1
    attacks: Tuple[AttackSpec, ...] = ()
    enforcement: EnforcementFlags = EnforcementFlags.all_on()
    core_enforcement: bool = True
    approver: str = "approve-all"  # approve-all | deny-all | pit-le-3 | none
    engine: EngineConfig = EngineConfig()
    gate: GateConfig = field(default_factory=topology.default_gate_config)
    actuation: ActuationConfig = ActuationConfig()
    governor: GovernorConfig = GovernorConfig()
    trust: TrustConfig = TrustConfig()
    chains: Tuple[DelegationChain, ...] = ()  # overrides for the built-in routes
    human_enters_tick: Optional[int] = None  # ground-truth human appears here
    max_ticks: int = 500

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)

    def with_flags(self, flags: EnforcementFlags, core: bool) -> "Scenario":
        return replace(self, enforcement=flags, core_enforcement=core)


def validate_scenario(s: Scenario) -> List[str]:
    from ..model import validate_descriptor, validate_workspace

    problems = validate_descriptor(s.descriptor)
    problems.extend(validate_workspace(s.workspace))
    if s.backend_kind not in (CONTEXT_BLIND, CONTEXT_SENSITIVE_NOISY):
        problems.append(f"unknown backend {s.backend_kind!r}")
    if s.approver not in ("approve-all", "deny-all", "pit-le-3", "none"):
        problems.append(f"unknown approver policy {s.approver!r}")
    if not s.operator_script and not s.attacks:
        problems.append("scenario has neither operator tasks nor attacks")
    for attack in s.attacks:
        if attack.trigger_tick < 0:
            problems.append(f"attack {attack.attack_class.value} trigger tick is negative")
    for chain in s.chains:
        problems.extend(v.message for v in validate_chain(chain, s.descriptor))
    return problems


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def scenario_to_plain(s: Scenario) -> Dict[str, Any]:
    return {
        "name": s.name,
        "seed": s.seed,
        "backend": s.backend_kind,
        "descriptor": documents.descriptor_to_plain(s.descriptor),
        "policies": [documents.policy_to_plain(p) for p in s.policies],
        "workspace": documents.workspace_to_plain(s.workspace),
        "operator_script": list(s.operator_script),
        "calibration_script": list(s.calibration_script),
        "attacks": [
            {
                "class": a.attack_class.value,
                "trigger_tick": a.trigger_tick,
                "payload": plainify(a.payload),
            }
            for a in s.attacks
        ],
        "enforcement": s.enforcement.describe(),
        "core_enforcement": s.core_enforcement,
        "approver": s.approver,
        "engine": documents.engine_config_to_plain(s.engine),
        "gate": documents.gate_config_to_plain(s.gate),
        "actuation": documents.actuation_config_to_plain(s.actuation),
        "governor": documents.governor_config_to_plain(s.governor),
        "trust": documents.trust_config_to_plain(s.trust),
        "chains": [documents.chain_to_plain(c) for c in s.chains],
        "human_enters_tick": s.human_enters_tick,
        "max_ticks": s.max_ticks,
    }


def scenario_from_plain(data: Mapping[str, Any], base_dir: str = ".") -> Scenario:
    descriptor_raw = data.get("descriptor")
    descriptor_gate = None
    if isinstance(descriptor_raw, str):
        descriptor_doc = documents.load_yaml(os.path.join(base_dir, descriptor_raw))
        descriptor = documents.descriptor_from_plain(descriptor_doc)
        # pattern lists and registries may ride along in the descriptor doc
        if isinstance(descriptor_doc, dict) and descriptor_doc.get("gate"):
            descriptor_gate = documents.gate_config_from_plain(descriptor_doc["gate"])
    elif descriptor_raw is None:
        descriptor = topology.workcell_descriptor()
    else:
        descriptor = documents.descriptor_from_plain(descriptor_raw)
        if isinstance(descriptor_raw, Mapping) and descriptor_raw.get("gate"):
            descriptor_gate = documents.gate_config_from_plain(descriptor_raw["gate"])

    policies_raw = data.get("policies")
    if isinstance(policies_raw, str):
        policies = tuple(
            documents.policies_from_plain(documents.load_yaml(os.path.join(base_dir, policies_raw)))
        )
    elif policies_raw is None:
        policies = tuple(topology.default_policies())
    else:
        policies = tuple(documents.policy_from_plain(p) for p in policies_raw)

    attacks = tuple(
        AttackSpec(
            attack_class=AttackClass(a["class"]),
            trigger_tick=int(a.get("trigger_tick", 0)),
            payload=a.get("payload", {}),
        )
        for a in data.get("attacks", [])
    )

    return Scenario(
        name=data.get("name", "unnamed"),
        descriptor=descriptor,
        policies=policies,
        workspace=documents.workspace_from_plain(data.get("workspace")),
        operator_script=tuple(data.get("operator_script", ())),
        calibration_script=tuple(data.get("calibration_script", ())),
        backend_kind=data.get("backend", CONTEXT_BLIND),
        seed=int(data.get("seed", 1)),
        attacks=attacks,
        enforcement=EnforcementFlags.parse(data.get("enforcement", "all")),
        core_enforcement=bool(data.get("core_enforcement", True)),
        approver=data.get("approver", "approve-all"),
        engine=documents.engine_config_from_plain(data.get("engine")),
        gate=(
            documents.gate_config_from_plain(data.get("gate"))
            if data.get("gate")
            else (descriptor_gate or topology.default_gate_config())
        ),
        actuation=documents.actuation_config_from_plain(data.get("actuation")),
        governor=documents.governor_config_from_plain(data.get("governor")),
        trust=documents.trust_config_from_plain(data.get("trust")),
        chains=tuple(documents.chain_from_plain(c) for c in data.get("chains", [])),
        human_enters_tick=data.get("human_enters_tick"),
        max_ticks=int(data.get("max_ticks", 500)),
    )


def load_scenario(path: str) -> Scenario:
    return scenario_from_plain(documents.load_yaml(path), base_dir=os.path.dirname(path) or ".")


def save_scenario(path: str, s: Scenario) -> None:
    documents.save_yaml(path, scenario_to_plain(s))


__all__ = [
    "AttackSpec",
    "Scenario",
    "validate_scenario",
    "scenario_to_plain",
    "scenario_from_plain",
    "load_scenario",
    "save_scenario",
]
