"""Tool execution authority gates at the invocation and pre-actuation
boundaries: scope checks, actuation bounds near humans, rate limiting, and
sequence-level trajectory coherence.

The coherence check is the one place where individually compliant commands
can still be stopped: it composes the recent command history with the next
command into one piecewise-linear path (including the approach segments
between commands) and verifies the composition, not the pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, List, Mapping, Optional, Sequence, Tuple

from . import geometry
from .engine import HUMAN_DISTANCE_TRIGGER
from .model import Invocation, ScopeSet, Vec3, WorkspaceState, Zone
from .primitives import TEA_1, TEA_2, TEA_3, TEA_4, TEA_6, PrimitiveId


@dataclass(frozen=True)
class MotionCommand:
    """One actuation: waypoints in meters, one speed for the whole command
    (rad/s, matching how actuation speed is reported), optional gripper
    action."""

    waypoints: Tuple[Vec3, ...]
    speed: float
    gripper: Optional[str] = None  # "open" | "close"

    def __post_init__(self) -> None:
        if self.speed <= 0:
            raise ValueError("command speed must be positive")
        if not self.waypoints and self.gripper is None:
            raise ValueError("command needs waypoints or a gripper action")


@dataclass(frozen=True)
class WindowEntry:
    command: MotionCommand
    tick: int
    start: Vec3  # arm position when the command executed


@dataclass(frozen=True)
class SequenceWindow:
    """Ring buffer of recently executed commands for one session."""

    entries: Tuple[WindowEntry, ...] = ()
    capacity: int = 20

    def push(self, entry: WindowEntry) -> "SequenceWindow":
        entries = (self.entries + (entry,))[-self.capacity:]
        return replace(self, entries=entries)


@dataclass(frozen=True)
class ActuationConfig:
    # Speed cap while a human is within the proximity trigger. Chosen so a
    # noisy planner straddles it: some draws pass, some violate.
    human_speed_bound: float = 0.25
    mode: str = "deny"  # "deny" | "clamp"
    resolution: float = 0.01
    fragile_clearance: float = 0.3
    fragile_speed_limit: float = 0.2
    window_capacity: int = 20
    workspace_box: Zone = Zone((-1.0, -1.0, -0.1), (1.0, 1.0, 1.1))
    rate_limit: int = 100          # invocations per tool within rate_window
    rate_window_ticks: int = 10


@dataclass(frozen=True)
class GateViolation:
    primitive: PrimitiveId
    reason: str


CLAMPED_TAINT = "clamped"


# ---------------------------------------------------------------------------
# Scope and rate checks (invocation boundary)
# ---------------------------------------------------------------------------


def check_scope(inv: Invocation, eff: ScopeSet, pit: int) -> List[GateViolation]:
    """Verify an invocation against the effective delegated scope: the tool
    must be granted, every bounded parameter must be inside its bounds, and
    the runtime tier must not exceed the scope's ceiling."""
    entry = eff.entry(inv.tool)
    if entry is None:
        return [GateViolation(TEA_1, f"tool {inv.tool!r} is not in the delegated scope")]
    violations: List[GateViolation] = []
    # Sorted so multi-violation rationales are reproducible across processes.
    for pname in sorted(entry.bounds):
        lo, hi = entry.bounds[pname]
        if pname not in inv.params:
            continue
        value = float(inv.params[pname])
        if value < lo or value > hi:
            violations.append(
                GateViolation(TEA_2, f"param {pname}={value} outside delegated bound [{lo}, {hi}]")
            )
    for pname in sorted(entry.allowed):
        allowed = entry.allowed[pname]
        if pname in inv.params and inv.params[pname] not in allowed:
            violations.append(
                GateViolation(TEA_2, f"param {pname}={inv.params[pname]!r} not among delegated values")
            )
    if pit > entry.max_pit:
        violations.append(
            GateViolation(TEA_2, f"runtime tier {pit} exceeds delegated ceiling {entry.max_pit}")
        )
    return violations


def check_rate(
    recent_ticks: Sequence[int], now: int, cfg: ActuationConfig
) -> Optional[GateViolation]:
    """Per-tool rate limit over a sliding tick window."""
    window_start = now - cfg.rate_window_ticks
    count = sum(1 for t in recent_ticks if t > window_start)
    if count >= cfg.rate_limit:
        return GateViolation(
            TEA_3, f"rate limit: {count} invocations within {cfg.rate_window_ticks} ticks"
        )
    return None


# ---------------------------------------------------------------------------
# Actuation bound near humans (pre-actuation boundary)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClampOutcome:
    action: str  # "pass" | "clamp" | "deny"
    params: Mapping[str, Any]
    violation: Optional[GateViolation] = None
    tainted: bool = False


def clamp_or_deny(inv: Invocation, env: WorkspaceState, cfg: ActuationConfig) -> ClampOutcome:
    """Enforce the human-proximity speed bound on a physical invocation.

    When a human is within the proximity trigger and the requested speed
    exceeds the bound, deny mode refuses the invocation outright while
    clamp mode rewrites the speed down to the bound and taints the
    invocation so the audit trail shows the rewrite.
    """
    speed = inv.params.get("speed")
    human_near = env.human_present and env.human_distance_m < HUMAN_DISTANCE_TRIGGER
    if speed is None or not human_near or float(speed) <= cfg.human_speed_bound:
        return ClampOutcome(action="pass", params=inv.params)
    if cfg.mode == "clamp":
        params = dict(inv.params)
        params["speed"] = cfg.human_speed_bound
        return ClampOutcome(action="clamp", params=params, tainted=True)
    return ClampOutcome(
        action="deny",
        params=inv.params,
        violation=GateViolation(
            TEA_4,
            f"speed {float(speed):.3f} above human-present bound {cfg.human_speed_bound} "
            f"(human at {env.human_distance_m:.2f} m)",
        ),
    )


# ---------------------------------------------------------------------------
# Sequence coherence (pre-actuation boundary)
# ---------------------------------------------------------------------------


def composed_segments(
    window: SequenceWindow, next_command: MotionCommand, arm_position: Vec3
) -> List[Tuple[Vec3, Vec3, float]]:
    """The piecewise-linear path of the window plus the next command, as
    (start, end, speed) segments. Approach segments between commands are
    included and belong to the command being approached."""
    segments: List[Tuple[Vec3, Vec3, float]] = []
    cursor: Optional[Vec3] = None
    for entry in window.entries:
        cursor = entry.start
        for wp in entry.command.waypoints:
            segments.append((cursor, wp, entry.command.speed))
            cursor = wp
    if cursor is None:
        cursor = arm_position
    for wp in next_command.waypoints:
        segments.append((cursor, wp, next_command.speed))
        cursor = wp
    return segments


def sequence_coherence(
    window: SequenceWindow,
    next_command: MotionCommand,
    env: WorkspaceState,
    cfg: ActuationConfig,
) -> Optional[GateViolation]:
    """Check the combined trajectory of recent commands plus the next one.

    Violations: any sample of the composed path inside a forbidden zone;
    any sample within the fragile clearance while its segment moves faster
    than the fragile speed limit; or a net end-to-end displacement larger
    than the workspace box along any axis. Each command alone may be
    compliant while the composition fails; that is the point of the check.
    """
    segments = composed_segments(window, next_command, env.arm_position)
    if not segments:
        return None

    for a, b, speed in segments:
        samples = geometry.segment_samples(a, b, cfg.resolution)
        if env.forbidden_zones and geometry.any_point_in_zones(samples, env.forbidden_zones):
            return GateViolation(TEA_6, "composed trajectory enters a forbidden zone")
        if (
            env.fragile_objects
            and speed > cfg.fragile_speed_limit
            and geometry.fragile_clearance(samples, env.fragile_objects) <= cfg.fragile_clearance
        ):
            return GateViolation(
                TEA_6, "composed trajectory passes a fragile object above the speed limit"
            )

    start = segments[0][0]
    end = segments[-1][1]
    for axis in range(3):
        if abs(end[axis] - start[axis]) > cfg.workspace_box.extent(axis):
            return GateViolation(
                TEA_6, "composed trajectory displacement exceeds the workspace box"
            )
    return None


__all__ = [
    "MotionCommand",
    "WindowEntry",
    "SequenceWindow",
    "ActuationConfig",
    "GateViolation",
    "CLAMPED_TAINT",
    "check_scope",
    "check_rate",
    "ClampOutcome",
    "clamp_or_deny",
    "composed_segments",
    "sequence_coherence",
]
