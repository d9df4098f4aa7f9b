"""Adaptive behavioural governance: drift detection over sliding windows
and scope contraction to a minimum safe set.

Per-agent baselines are learned once from a calibration run (mean and
standard deviation of four window features) and frozen. At run time each
window is z-scored against the baseline: a single out-of-band feature asks
for re-verification, multiple breaches or a collapsing distance to
workspace boundaries contract the agent's scope until a human restores it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence

from .model import MACPSDescriptor, ScopeEntry, ScopeSet, Tool

FEATURES = ("commands", "mean_speed", "boundary_distance", "deny_rate")

# Features where only one direction is suspicious: more commands, higher
# speeds, more denials, and *less* boundary clearance.
_STD_FLOOR = 1e-6


class DriftAction(str, Enum):
    NONE = "none"
    REVERIFY = "reverify"
    CONTRACT_SCOPE = "contract-scope"


class BaselineMissingError(Exception):
    pass


@dataclass(frozen=True)
class BehaviorSample:
    """One observed invocation outcome, as the governor sees it."""

    tick: int
    executed: bool
    denied: bool
    speed: Optional[float] = None
    boundary_distance: Optional[float] = None


@dataclass(frozen=True)
class BehaviorBaseline:
    means: Mapping[str, float]
    stds: Mapping[str, float]


@dataclass(frozen=True)
class GovernorConfig:
    window: int = 25
    z_threshold: float = 3.0


@dataclass(frozen=True)
class DriftVerdict:
    agent: str
    z_scores: Mapping[str, float]
    triggered: bool
    action: DriftAction


def window_features(samples: Sequence[BehaviorSample]) -> Dict[str, Optional[float]]:
    """The four features of one window. Features undefined for the window
    (no motion commands at all) come back as None and score zero drift."""
    commands = [s for s in samples if s.executed and s.speed is not None]
    features: Dict[str, Optional[float]] = {
        "commands": float(len(commands)),
        "mean_speed": (sum(s.speed for s in commands) / len(commands)) if commands else None,
        "deny_rate": (sum(1 for s in samples if s.denied) / len(samples)) if samples else None,
    }
    distances = [s.boundary_distance for s in commands if s.boundary_distance is not None]
    features["boundary_distance"] = (sum(distances) / len(distances)) if distances else None
    return features


def calibrate(windows: Sequence[Sequence[BehaviorSample]]) -> BehaviorBaseline:
    """Freeze a baseline from the windows of a policy-conformant run."""
    if not windows:
        raise ValueError("calibration needs at least one window")
    per_feature: Dict[str, List[float]] = {f: [] for f in FEATURES}
    for window in windows:
        feats = window_features(window)
        for name in FEATURES:
            value = feats[name]
            if value is not None:
                per_feature[name].append(value)
    means: Dict[str, float] = {}
    stds: Dict[str, float] = {}
    for name in FEATURES:
        values = per_feature[name]
        if not values:
            means[name], stds[name] = 0.0, 0.0
            continue
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        means[name] = mean
        stds[name] = math.sqrt(var)
    return BehaviorBaseline(means=means, stds=stds)


def observe(
    agent: str,
    samples: Sequence[BehaviorSample],
    baseline: Optional[BehaviorBaseline],
    cfg: GovernorConfig = GovernorConfig(),
) -> DriftVerdict:
    """Score one window against the agent's baseline.

    Any |z| above the threshold triggers; two or more breaching features,
    or boundary clearance collapsing below baseline (z < -threshold),
    contract the scope rather than merely re-verifying.
    """
    if baseline is None:
        raise BaselineMissingError(f"no calibrated baseline for agent {agent!r}")
    feats = window_features(samples)
    z_scores: Dict[str, float] = {}
    for name in FEATURES:
        value = feats[name]
        if value is None:
            z_scores[name] = 0.0
            continue
        std = max(baseline.stds.get(name, 0.0), _STD_FLOOR)
        z_scores[name] = (value - baseline.means.get(name, 0.0)) / std
    breaches = [name for name in FEATURES if abs(z_scores[name]) > cfg.z_threshold]
    triggered = bool(breaches)
    if not triggered:
        action = DriftAction.NONE
    elif len(breaches) >= 2 or z_scores["boundary_distance"] < -cfg.z_threshold:
        action = DriftAction.CONTRACT_SCOPE
    else:
        action = DriftAction.REVERIFY
    return DriftVerdict(agent=agent, z_scores=z_scores, triggered=triggered, action=action)


def contract_scope(current: ScopeSet, tools: Mapping[str, Tool]) -> ScopeSet:
    """Reduce a scope to the minimum safe set: only tools whose base class
    is reversible (tier <= 1), risk-scaled parameter ceilings halved
    relative to the tool schema, tier ceiling 1. Idempotent, and never
    widens anything the agent already lost."""
    entries: Dict[str, ScopeEntry] = {}
    for tool_id, entry in current.entries.items():
        tool = tools.get(tool_id)
        if tool is None or tool.pit_class > 1:
            continue
        bounds = dict(entry.bounds)
        for spec in tool.param_schema:
            if spec.kind != "numeric" or not spec.risk_scaled:
                continue
            slo, shi = float(spec.min), float(spec.max)
            half_hi = slo + (shi - slo) / 2.0
            lo, hi = bounds.get(spec.name, (slo, shi))
            bounds[spec.name] = (lo, min(hi, half_hi))
        entries[tool_id] = ScopeEntry(
            bounds=bounds,
            allowed=dict(entry.allowed),
            max_pit=min(entry.max_pit, 1),
        )
    return ScopeSet(entries=entries)


class GovernorState:
    """Mutable per-run governance state: baselines, rolling samples, and
    which agents are currently contracted. Restoration requires an explicit
    action by a registered human principal."""

    def __init__(self, cfg: GovernorConfig = GovernorConfig()):
        self.cfg = cfg
        self.baselines: Dict[str, BehaviorBaseline] = {}
        self.samples: Dict[str, List[BehaviorSample]] = {}
        self.contracted: Dict[str, ScopeSet] = {}

    def record(self, agent: str, sample: BehaviorSample) -> None:
        self.samples.setdefault(agent, []).append(sample)

    def current_window(self, agent: str) -> Sequence[BehaviorSample]:
        return tuple(self.samples.get(agent, ())[-self.cfg.window:])

    def is_contracted(self, agent: str) -> bool:
        return agent in self.contracted

    def contract(self, agent: str, scope: ScopeSet) -> None:
        self.contracted[agent] = scope

    def restore(self, agent: str, actor_id: str, descriptor: MACPSDescriptor) -> bool:
        """Lift a contraction. Only a registered human principal may do it;
        anything else is refused and the contraction stays."""
        if descriptor.human(actor_id) is None:
            return False
        self.contracted.pop(agent, None)
        return True


__all__ = [
    "FEATURES",
    "DriftAction",
    "BaselineMissingError",
    "BehaviorSample",
    "BehaviorBaseline",
    "GovernorConfig",
    "DriftVerdict",
    "window_features",
    "calibrate",
    "observe",
    "contract_scope",
    "GovernorState",
]
