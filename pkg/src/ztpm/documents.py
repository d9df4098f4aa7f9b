"""On-disk document format for descriptors, policies, workspaces, and
configs: plain key/value trees serialized as YAML.

Field names in documents match the dataclass fields one-to-one; every
converter here round-trips (``from_plain(to_plain(x)) == x``). The schema
is documented in docs/formats.md.
"""

from __future__ import annotations

from typing import Any, Dict, List, Mapping, Optional

import yaml

from .actuation import ActuationConfig
from .context_gate import GateConfig
from .delegation import DelegationChain, DelegationLink, TrustConfig
from .engine import Effect, EngineConfig, ObligationSpec, Policy
from .governor import GovernorConfig
from .model import (
    AgentIdentity,
    EnforcementPoint,
    FragileObject,
    HumanPrincipal,
    MACPSDescriptor,
    ObjectKind,
    ParamSpec,
    PolicyObject,
    ScopeEntry,
    ScopeSet,
    Tool,
    WorkspaceState,
    Zone,
)
from .predicate import parse as parse_predicate, to_source
from .primitives import parse_primitive


def load_yaml(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return yaml.safe_load(fh)


def save_yaml(path: str, data: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)


# ---------------------------------------------------------------------------
# Scopes
# ---------------------------------------------------------------------------


def scope_to_plain(scope: ScopeSet) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for tool_id in scope.tools():
        entry = scope.entries[tool_id]
        out[tool_id] = {
            "bounds": {p: [lo, hi] for p, (lo, hi) in sorted(entry.bounds.items())},
            "allowed": {p: list(v) for p, v in sorted(entry.allowed.items())},
            "max_pit": entry.max_pit,
        }
    return out


def scope_from_plain(data: Optional[Mapping[str, Any]]) -> ScopeSet:
    entries: Dict[str, ScopeEntry] = {}
    for tool_id, raw in (data or {}).items():
        raw = raw or {}
        entries[tool_id] = ScopeEntry(
            bounds={p: (float(v[0]), float(v[1])) for p, v in (raw.get("bounds") or {}).items()},
            allowed={p: tuple(v) for p, v in (raw.get("allowed") or {}).items()},
            max_pit=int(raw.get("max_pit", 4)),
        )
    return ScopeSet(entries=entries)


# ---------------------------------------------------------------------------
# Descriptor
# ---------------------------------------------------------------------------


def descriptor_to_plain(d: MACPSDescriptor) -> Dict[str, Any]:
    return {
        "agents": [
            {
                "id": a.id,
                "role": a.role,
                "revoked": a.revoked,
                "scope": scope_to_plain(a.granted_scope),
            }
            for a in d.agents
        ],
        "humans": [
            {"id": h.id, "can_dual_authorize": h.can_dual_authorize} for h in d.humans
        ],
        "objects": [
            {"id": o.id, "kind": o.kind.value, "subkind": o.subkind} for o in d.objects
        ],
        "tools": [
            {
                "id": t.id,
                "pit_class": t.pit_class,
                "physical": t.physical,
                "target_object": t.target_object,
                "params": [
                    {
                        "name": s.name,
                        "kind": s.kind,
                        **({"min": s.min, "max": s.max} if s.kind == "numeric" else {}),
                        **({"choices": list(s.choices)} if s.kind == "enum" else {}),
                        "risk_scaled": s.risk_scaled,
                    }
                    for s in t.param_schema
                ],
            }
            for t in d.tools
        ],
        "enforcement_points": [e.value for e in d.enforcement_points],
    }


def descriptor_from_plain(data: Mapping[str, Any]) -> MACPSDescriptor:
    agents = tuple(
        AgentIdentity(
            id=a["id"],
            role=a["role"],
            granted_scope=scope_from_plain(a.get("scope")),
            revoked=bool(a.get("revoked", False)),
        )
        for a in data.get("agents", [])
    )
    humans = tuple(
        HumanPrincipal(id=h["id"], can_dual_authorize=bool(h.get("can_dual_authorize", False)))
        for h in data.get("humans", [])
    )
    objects = tuple(
        PolicyObject(id=o["id"], kind=ObjectKind(o["kind"]), subkind=o["subkind"])
        for o in data.get("objects", [])
    )
    tools = tuple(
        Tool(
            id=t["id"],
            pit_class=int(t["pit_class"]),
            physical=bool(t["physical"]),
            target_object=t.get("target_object", ""),
            param_schema=tuple(
                ParamSpec(
                    name=p["name"],
                    kind=p["kind"],
                    min=p.get("min"),
                    max=p.get("max"),
                    choices=tuple(p.get("choices", ())),
                    risk_scaled=bool(p.get("risk_scaled", True)),
                )
                for p in t.get("params", [])
            ),
        )
        for t in data.get("tools", [])
    )
    eps = tuple(
        EnforcementPoint(e) for e in data.get("enforcement_points", [e.value for e in EnforcementPoint])
    )
    return MACPSDescriptor(agents=agents, humans=humans, objects=objects, tools=tools, enforcement_points=eps)


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


def policy_to_plain(p: Policy) -> Dict[str, Any]:
    return {
        "id": p.id,
        "subject": p.subject_selector,
        "object": p.object_selector,
        "predicate": to_source(p.predicate),
        "ep": p.ep.value if p.ep is not None else "*",
        "effect": p.effect.value,
        "obligations": [
            {"kind": o.kind, **({"params": dict(o.params)} if o.params else {})}
            for o in p.obligations
        ],
        "pit_bound": p.pit_bound,
        "primitive": str(p.primitive) if p.primitive is not None else None,
        "route_to": p.route_to,
    }


def policy_from_plain(data: Mapping[str, Any]) -> Policy:
    ep_raw = data.get("ep", "*")
    return Policy(
        id=data["id"],
        subject_selector=data.get("subject", "*"),
        object_selector=data.get("object", "*"),
        predicate=parse_predicate(data.get("predicate", "true")),
        ep=None if ep_raw in ("*", None) else EnforcementPoint(ep_raw),
        effect=Effect(data.get("effect", "DENY")),
        obligations=tuple(
            ObligationSpec(kind=o["kind"], params=o.get("params", {}))
            for o in data.get("obligations", [])
        ),
        pit_bound=data.get("pit_bound"),
        primitive=parse_primitive(data["primitive"]) if data.get("primitive") else None,
        route_to=data.get("route_to", "any"),
    )


def policies_to_plain(policies: List[Policy]) -> Dict[str, Any]:
    return {"policies": [policy_to_plain(p) for p in policies]}


def policies_from_plain(data: Mapping[str, Any]) -> List[Policy]:
    return [policy_from_plain(p) for p in data.get("policies", [])]


# ---------------------------------------------------------------------------
# Workspace
# ---------------------------------------------------------------------------


def workspace_to_plain(w: WorkspaceState) -> Dict[str, Any]:
    return {
        "human_present": w.human_present,
        "human_distance_m": w.human_distance_m,
        "fragile_objects": [
            {"position": list(f.position), "radius": f.radius} for f in w.fragile_objects
        ],
        "forbidden_zones": [
            {"min": list(z.min_corner), "max": list(z.max_corner)} for z in w.forbidden_zones
        ],
        "arm_position": list(w.arm_position),
        "tick": w.tick,
    }


def workspace_from_plain(data: Optional[Mapping[str, Any]]) -> WorkspaceState:
    data = data or {}
    return WorkspaceState(
        human_present=bool(data.get("human_present", False)),
        human_distance_m=float(data.get("human_distance_m", 0.0)),
        fragile_objects=tuple(
            FragileObject(position=tuple(f["position"]), radius=float(f.get("radius", 0.0)))
            for f in data.get("fragile_objects", [])
        ),
        forbidden_zones=tuple(
            Zone(min_corner=tuple(z["min"]), max_corner=tuple(z["max"]))
            for z in data.get("forbidden_zones", [])
        ),
        arm_position=tuple(data.get("arm_position", (0.0, 0.0, 0.3))),
        tick=int(data.get("tick", 0)),
    )


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


def chain_to_plain(c: DelegationChain) -> Dict[str, Any]:
    return {
        "id": c.id,
        "root": c.root,
        "links": [
            {
                "from": link.from_id,
                "to": link.to_id,
                "scope": scope_to_plain(link.scope),
                "issued_tick": link.issued_tick,
                "revoked": link.revoked,
                "attested": link.attested,
            }
            for link in c.links
        ],
    }


def chain_from_plain(data: Mapping[str, Any]) -> DelegationChain:
    return DelegationChain(
        id=data["id"],
        root=data["root"],
        links=tuple(
            DelegationLink(
                from_id=l["from"],
                to_id=l["to"],
                scope=scope_from_plain(l.get("scope")),
                issued_tick=int(l.get("issued_tick", 0)),
                revoked=bool(l.get("revoked", False)),
                attested=bool(l.get("attested", True)),
            )
            for l in data.get("links", [])
        ),
    )


# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------


def engine_config_from_plain(data: Optional[Mapping[str, Any]]) -> EngineConfig:
    data = data or {}
    return EngineConfig(
        trust_threshold=float(data.get("trust_threshold", 0.6)),
        defer_timeout_ticks=int(data.get("defer_timeout_ticks", 50)),
        dual_auth_validity_ticks=int(data.get("dual_auth_validity_ticks", 100)),
    )


def engine_config_to_plain(cfg: EngineConfig) -> Dict[str, Any]:
    return {
        "trust_threshold": cfg.trust_threshold,
        "defer_timeout_ticks": cfg.defer_timeout_ticks,
        "dual_auth_validity_ticks": cfg.dual_auth_validity_ticks,
    }


def gate_config_from_plain(data: Optional[Mapping[str, Any]]) -> GateConfig:
    data = data or {}
    defaults = GateConfig()
    return GateConfig(
        reject_patterns=tuple(data.get("reject_patterns", defaults.reject_patterns)),
        suspect_patterns=tuple(data.get("suspect_patterns", defaults.suspect_patterns)),
        staleness_ticks=int(data.get("staleness_ticks", defaults.staleness_ticks)),
        trusted_audit_tags=frozenset(data.get("trusted_audit_tags", ())),
        message_required_keys=tuple(
            data.get("message_required_keys", defaults.message_required_keys)
        ),
    )


def gate_config_to_plain(cfg: GateConfig) -> Dict[str, Any]:
    return {
        "reject_patterns": list(cfg.reject_patterns),
        "suspect_patterns": list(cfg.suspect_patterns),
        "staleness_ticks": cfg.staleness_ticks,
        "trusted_audit_tags": sorted(cfg.trusted_audit_tags),
        "message_required_keys": list(cfg.message_required_keys),
    }


def actuation_config_to_plain(cfg: ActuationConfig) -> Dict[str, Any]:
    return {
        "human_speed_bound": cfg.human_speed_bound,
        "mode": cfg.mode,
        "resolution": cfg.resolution,
        "fragile_clearance": cfg.fragile_clearance,
        "fragile_speed_limit": cfg.fragile_speed_limit,
        "window_capacity": cfg.window_capacity,
        "workspace_box": {
            "min": list(cfg.workspace_box.min_corner),
            "max": list(cfg.workspace_box.max_corner),
        },
        "rate_limit": cfg.rate_limit,
        "rate_window_ticks": cfg.rate_window_ticks,
    }


def actuation_config_from_plain(data: Optional[Mapping[str, Any]]) -> ActuationConfig:
    data = data or {}
    defaults = ActuationConfig()
    box = data.get("workspace_box")
    return ActuationConfig(
        human_speed_bound=float(data.get("human_speed_bound", defaults.human_speed_bound)),
        mode=data.get("mode", defaults.mode),
        resolution=float(data.get("resolution", defaults.resolution)),
        fragile_clearance=float(data.get("fragile_clearance", defaults.fragile_clearance)),
        fragile_speed_limit=float(data.get("fragile_speed_limit", defaults.fragile_speed_limit)),
        window_capacity=int(data.get("window_capacity", defaults.window_capacity)),
        workspace_box=(
            Zone(min_corner=tuple(box["min"]), max_corner=tuple(box["max"]))
            if box
            else defaults.workspace_box
        ),
        rate_limit=int(data.get("rate_limit", defaults.rate_limit)),
        rate_window_ticks=int(data.get("rate_window_ticks", defaults.rate_window_ticks)),
    )


def governor_config_to_plain(cfg: GovernorConfig) -> Dict[str, Any]:
    return {"window": cfg.window, "z_threshold": cfg.z_threshold}


def trust_config_to_plain(cfg: TrustConfig) -> Dict[str, Any]:
    return {
        "baseline": cfg.baseline,
        "initial": cfg.initial,
        "half_life_ticks": cfg.half_life_ticks,
        "success_gain": cfg.success_gain,
        "history_cap": cfg.history_cap,
    }


def governor_config_from_plain(data: Optional[Mapping[str, Any]]) -> GovernorConfig:
    data = data or {}
    defaults = GovernorConfig()
    return GovernorConfig(
        window=int(data.get("window", defaults.window)),
        z_threshold=float(data.get("z_threshold", defaults.z_threshold)),
    )


def trust_config_from_plain(data: Optional[Mapping[str, Any]]) -> TrustConfig:
    data = data or {}
    defaults = TrustConfig()
    return TrustConfig(
        baseline=float(data.get("baseline", defaults.baseline)),
        initial=float(data.get("initial", defaults.initial)),
        half_life_ticks=int(data.get("half_life_ticks", defaults.half_life_ticks)),
        success_gain=float(data.get("success_gain", defaults.success_gain)),
        history_cap=int(data.get("history_cap", defaults.history_cap)),
    )


__all__ = [
    "load_yaml",
    "save_yaml",
    "scope_to_plain",
    "scope_from_plain",
    "descriptor_to_plain",
    "descriptor_from_plain",
    "policy_to_plain",
    "policy_from_plain",
    "policies_to_plain",
    "policies_from_plain",
    "workspace_to_plain",
    "workspace_from_plain",
    "chain_to_plain",
    "chain_from_plain",
    "engine_config_from_plain",
    "engine_config_to_plain",
    "gate_config_from_plain",
    "gate_config_to_plain",
    "actuation_config_to_plain",
    "actuation_config_from_plain",
    "governor_config_to_plain",
    "governor_config_from_plain",
    "trust_config_to_plain",
    "trust_config_from_plain",
]
