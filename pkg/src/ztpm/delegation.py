"""Delegation chains, scope attenuation, and dynamic trust scores.

Authority flows from a human principal through an explicit chain of links;
every link may only narrow what the previous one granted, and the acting
agent's effective authority is the intersection of every link's scope, so
a downstream agent can never hold more than the narrowest grant above it.
Trust is per agent, explicit, and non-transitive: it decays toward a
neutral baseline over time, rises slowly on successful interactions, and
drops sharply on anomalies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .model import MACPSDescriptor, ScopeEntry, ScopeSet
from .primitives import AID_1, AID_2, AID_3, AID_4, AID_5, CATP_1, PrimitiveId

DEFAULT_MAX_DEPTH = 6


class ClockRegressionError(Exception):
    pass


class InvalidChainError(Exception):
    pass


# ---------------------------------------------------------------------------
# Scope algebra
# ---------------------------------------------------------------------------


def entry_contains(outer: ScopeEntry, inner: ScopeEntry) -> bool:
    """True when `inner` grants no more than `outer` for one tool."""
    if inner.max_pit > outer.max_pit:
        return False
    for pname, (olo, ohi) in outer.bounds.items():
        if pname not in inner.bounds:
            return False  # inner leaves the param unbounded: wider
        ilo, ihi = inner.bounds[pname]
        if ilo < olo or ihi > ohi:
            return False
    for pname, ovals in outer.allowed.items():
        if pname not in inner.allowed:
            return False
        if not set(inner.allowed[pname]) <= set(ovals):
            return False
    return True


def scope_contains(outer: ScopeSet, inner: ScopeSet) -> bool:
    """True when every grant in `inner` is covered by `outer`."""
    for tool_id, inner_entry in inner.entries.items():
        outer_entry = outer.entry(tool_id)
        if outer_entry is None or not entry_contains(outer_entry, inner_entry):
            return False
    return True


def entry_intersection(a: ScopeEntry, b: ScopeEntry) -> ScopeEntry:
    # Sorted iteration keeps dict insertion order (and anything formatted
    # from it) independent of per-process hash randomization.
    bounds: Dict[str, Tuple[float, float]] = {}
    for pname in sorted(set(a.bounds) | set(b.bounds)):
        if pname in a.bounds and pname in b.bounds:
            alo, ahi = a.bounds[pname]
            blo, bhi = b.bounds[pname]
            bounds[pname] = (max(alo, blo), min(ahi, bhi))
        else:
            bounds[pname] = a.bounds.get(pname, b.bounds.get(pname))
    allowed: Dict[str, Tuple[str, ...]] = {}
    for pname in sorted(set(a.allowed) | set(b.allowed)):
        if pname in a.allowed and pname in b.allowed:
            keep = [v for v in a.allowed[pname] if v in b.allowed[pname]]
            allowed[pname] = tuple(keep)
        else:
            allowed[pname] = tuple(a.allowed.get(pname, b.allowed.get(pname)))
    return ScopeEntry(bounds=bounds, allowed=allowed, max_pit=min(a.max_pit, b.max_pit))


def scope_intersection(a: ScopeSet, b: ScopeSet) -> ScopeSet:
    entries = {
        tool_id: entry_intersection(a.entries[tool_id], b.entries[tool_id])
        for tool_id in sorted(set(a.entries) & set(b.entries))
    }
    return ScopeSet(entries=entries)


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DelegationLink:
    from_id: str
    to_id: str
    scope: ScopeSet
    issued_tick: int = 0
    revoked: bool = False
    attested: bool = True


@dataclass(frozen=True)
class DelegationChain:
    id: str
    root: str  # human principal sponsoring the chain
    links: Tuple[DelegationLink, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.links)

    def acting_agent(self) -> Optional[str]:
        return self.links[-1].to_id if self.links else None

    def min_max_pit(self) -> int:
        pits = [
            entry.max_pit
            for link in self.links
            for entry in link.scope.entries.values()
        ]
        return min(pits) if pits else 4


@dataclass(frozen=True)
class ChainViolation:
    primitive: PrimitiveId
    message: str


def validate_chain(
    chain: DelegationChain,
    registry: MACPSDescriptor,
    now: int = 0,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> List[ChainViolation]:
    """Validate a chain against the deployment registry.

    Returns every violation found, each attributed to the primitive whose
    check it breaks, so enforcement can apply exactly the enabled subset.
    An empty list means the chain is valid.
    """
    violations: List[ChainViolation] = []

    if not chain.links:
        violations.append(ChainViolation(AID_2, f"chain {chain.id!r} has no links"))
        return violations

    first = chain.links[0]
    if registry.human(chain.root) is None:
        violations.append(ChainViolation(AID_2, f"chain {chain.id!r}: root {chain.root!r} not in H"))
    if first.from_id != chain.root:
        violations.append(
            ChainViolation(AID_2, f"chain {chain.id!r}: first link issued by {first.from_id!r}, not the root")
        )

    if chain.depth > max_depth:
        violations.append(
            ChainViolation(AID_5, f"chain {chain.id!r}: depth {chain.depth} exceeds limit {max_depth}")
        )

    for i, link in enumerate(chain.links, start=1):
        agent = registry.agent(link.to_id)
        if agent is None:
            violations.append(
                ChainViolation(AID_1, f"chain {chain.id!r}: link {i} delegates to unknown agent {link.to_id!r}")
            )
        elif agent.revoked:
            violations.append(
                ChainViolation(AID_3, f"chain {chain.id!r}: link {i} delegates to revoked agent {link.to_id!r}")
            )
        if link.revoked:
            violations.append(ChainViolation(AID_3, f"chain {chain.id!r}: link {i} is revoked"))
        if not link.attested:
            violations.append(ChainViolation(CATP_1, f"chain {chain.id!r}: link {i} is not attested"))
        if i > 1:
            prev = chain.links[i - 2]
            if link.from_id != prev.to_id:
                violations.append(
                    ChainViolation(
                        AID_1,
                        f"chain {chain.id!r}: link {i} issued by {link.from_id!r}, expected {prev.to_id!r}",
                    )
                )
            if not scope_contains(prev.scope, link.scope):
                violations.append(
                    ChainViolation(AID_4, f"chain {chain.id!r}: scope escalation at link {i}")
                )

    return violations


def effective_scope(chain: DelegationChain, validated: bool = True) -> ScopeSet:
    """The authority actually held at the end of a chain: the intersection
    of every link's scope. Equals the last link's scope whenever narrowing
    held link by link."""
    if not validated:
        raise InvalidChainError(f"chain {chain.id!r} was not validated")
    if not chain.links:
        return ScopeSet()
    scope = chain.links[0].scope
    for link in chain.links[1:]:
        scope = scope_intersection(scope, link.scope)
    return scope


# ---------------------------------------------------------------------------
# Trust
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrustConfig:
    baseline: float = 0.5
    initial: float = 0.75
    half_life_ticks: int = 200
    success_gain: float = 0.05
    history_cap: int = 32


@dataclass(frozen=True)
class TrustEvent:
    kind: str  # "success" | "anomaly"
    weight: float = 0.0


SUCCESS = TrustEvent("success")


def anomaly(weight: float) -> TrustEvent:
    if not (0.0 <= weight <= 1.0):
        raise ValueError("anomaly weight must be in [0, 1]")
    return TrustEvent("anomaly", weight)


@dataclass(frozen=True)
class TrustState:
    score: float
    last_update_tick: int = 0
    history: Tuple[Tuple[int, str, float], ...] = ()

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"trust score {self.score} outside [0, 1]")


def initial_trust(cfg: TrustConfig = TrustConfig(), tick: int = 0) -> TrustState:
    return TrustState(score=cfg.initial, last_update_tick=tick)


def update_trust(
    state: TrustState,
    event: Optional[TrustEvent],
    now: int,
    cfg: TrustConfig = TrustConfig(),
) -> TrustState:
    """Advance a trust state to `now` and apply one event.

    Decay first pulls the score toward the neutral baseline with the
    configured half life; a success then nudges it up proportionally to the
    remaining headroom, while an anomaly scales it down by its weight. The
    score never leaves [0, 1].
    """
    if now < state.last_update_tick:
        raise ClockRegressionError(
            f"update at tick {now} before last update {state.last_update_tick}"
        )
    dt = now - state.last_update_tick
    score = cfg.baseline + (state.score - cfg.baseline) * 2.0 ** (-dt / cfg.half_life_ticks)
    if event is not None:
        if event.kind == "success":
            score = score + cfg.success_gain * (1.0 - score)
        elif event.kind == "anomaly":
            score = score * (1.0 - event.weight)
        else:
            raise ValueError(f"unknown trust event kind {event.kind!r}")
    score = min(1.0, max(0.0, score))
    history = state.history
    if event is not None:
        history = (history + ((now, event.kind, event.weight),))[-cfg.history_cap:]
    return TrustState(score=score, last_update_tick=now, history=history)


__all__ = [
    "DEFAULT_MAX_DEPTH",
    "ClockRegressionError",
    "InvalidChainError",
    "entry_contains",
    "scope_contains",
    "entry_intersection",
    "scope_intersection",
    "DelegationLink",
    "DelegationChain",
    "ChainViolation",
    "validate_chain",
    "effective_scope",
    "TrustConfig",
    "TrustEvent",
    "SUCCESS",
    "anomaly",
    "TrustState",
    "initial_trust",
    "update_trust",
]
