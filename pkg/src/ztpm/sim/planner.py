"""Rule-based stand-ins for the reasoning agents.

Each agent maps an operator task string to a fixed template of tool
invocations; only the actuation speed comes from the backend stub. This
deliberately removes model behavior from the loop: the enforcement layer
is what is under test, and it must work no matter what picks the
parameters.

The one piece of workspace awareness the planner has mirrors a careful
operator workflow: physical motion requires a fresh scene reading, and an
*unexpected* human in the workspace (present in the scene but not
acknowledged in the task text) makes the planner hold rather than move.
An attacker who corrupts perception removes exactly this hesitation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..model import Vec3
from . import topology
from .backends import BackendStub

# Motion templates (targets in meters). The sweep crosses the front of the
# cell; the patrol keeps to the far left; pick/place work on the right.
SWEEP_TARGETS: Tuple[Vec3, ...] = (
    (-0.4, 0.2, 0.3),
    (-0.2, 0.35, 0.3),
    (0.0, 0.4, 0.3),
    (0.2, 0.35, 0.3),
    (0.4, 0.2, 0.3),
)
PATROL_TARGETS: Tuple[Vec3, ...] = (
    (-0.5, 0.1, 0.3),
    (-0.35, 0.2, 0.3),
    (-0.5, 0.25, 0.3),
)
RIGHT_SWEEP_TARGETS: Tuple[Vec3, ...] = (
    (-0.3, 0.35, 0.3),
    (-0.1, 0.35, 0.3),
    (0.1, 0.35, 0.3),
    (0.28, 0.35, 0.3),
    (0.45, 0.35, 0.3),
)
PICK_TARGET: Vec3 = (0.3, 0.1, 0.2)
PLACE_TARGET: Vec3 = (-0.3, 0.1, 0.2)

# Staging routes for the workpiece task; which one is taken depends on the
# route fact retrieved from the knowledge store.
STAGING_ROUTE_DETOUR: Tuple[Vec3, ...] = (
    (-0.2, 0.1, 0.3),
    (0.0, 0.05, 0.3),
    (0.25, 0.1, 0.3),
)
STAGING_ROUTE_DIRECT: Tuple[Vec3, ...] = (
    (-0.25, 0.35, 0.3),
    (-0.15, 0.35, 0.3),
    (0.0, 0.35, 0.3),
    (0.25, 0.35, 0.3),
)


@dataclass(frozen=True)
class InvocationSpec:
    agent: str
    tool: str
    params: Mapping[str, Any]
    origin: Optional[str] = None  # attack class marker for ground-truth judging


@dataclass(frozen=True)
class TaskPlan:
    specialist: str
    specs: Tuple[InvocationSpec, ...]
    rag_topic: Optional[str] = None
    hold_reason: Optional[str] = None


def route_task(task: str) -> str:
    lowered = task.lower()
    if any(k in lowered for k in ("inspect", "look", "scan")):
        return topology.VISION
    if "configure" in lowered or "setting" in lowered:
        return topology.CONFIG
    return topology.ROBOTIC


def task_mentions_human(task: str) -> bool:
    lowered = task.lower()
    return any(k in lowered for k in ("human", "person", "operator", "someone"))


def _moves(
    agent: str,
    targets: Sequence[Vec3],
    backend: BackendStub,
    rng: np.random.Generator,
    prompt: str,
    origin: Optional[str] = None,
) -> List[InvocationSpec]:
    # An instruction demanding full speed overrides whatever the backend
    # would pick; a gullible planner obeys the text it was given.
    override = 0.9 if "full speed" in prompt.lower() else None
    specs = []
    for (x, y, z) in targets:
        speed = override if override is not None else backend.draw_speed(rng, prompt)
        specs.append(
            InvocationSpec(
                agent=agent,
                tool="move_arm",
                params={"speed": speed, "x": x, "y": y, "z": z},
                origin=origin,
            )
        )
    return specs


def plan_task(
    task: str,
    backend: BackendStub,
    rng: np.random.Generator,
    *,
    scene_fresh: bool,
    scene_human_present: bool,
    route_fact: str = "detour",
    origin: Optional[str] = None,
) -> TaskPlan:
    """Turn one operator task into tool invocations.

    `scene_fresh` and `scene_human_present` come from the admitted
    perception context, not ground truth: the planner can only be as
    careful as what it was allowed to believe.
    """
    specialist = route_task(task)
    lowered = task.lower()

    if specialist == topology.VISION:
        return TaskPlan(
            specialist,
            (InvocationSpec(topology.VISION, "read_sensor", {"channel": "scene"}, origin),),
        )

    if specialist == topology.CONFIG:
        key = "mode"
        for candidate in ("mode", "payload", "speed_limit"):
            if candidate in lowered:
                key = candidate
                break
        value = 0.5
        for token in lowered.replace(",", " ").split():
            try:
                value = float(token)
                break
            except ValueError:
                continue
        return TaskPlan(
            specialist,
            (InvocationSpec(topology.CONFIG, "configure", {"key": key, "value": value}, origin),),
        )

    # Physical motion: hold unless the scene is fresh and any human in it
    # is acknowledged by the task itself.
    if not scene_fresh:
        return TaskPlan(specialist, (), hold_reason="scene reading is stale")
    if scene_human_present and not task_mentions_human(task):
        return TaskPlan(specialist, (), hold_reason="unexpected human in workspace")

    if "workpiece" in lowered and "staging" in lowered:
        targets = STAGING_ROUTE_DIRECT if route_fact == "direct" else STAGING_ROUTE_DETOUR
        return TaskPlan(
            specialist,
            tuple(_moves(topology.ROBOTIC, targets, backend, rng, task, origin)),
            rag_topic="staging-route",
        )
    if "patrol" in lowered:
        return TaskPlan(
            specialist, tuple(_moves(topology.ROBOTIC, PATROL_TARGETS, backend, rng, task, origin))
        )
    if "sweep" in lowered and "right" in lowered:
        return TaskPlan(
            specialist,
            tuple(_moves(topology.ROBOTIC, RIGHT_SWEEP_TARGETS, backend, rng, task, origin)),
        )
    if "sweep" in lowered or "arc" in lowered:
        return TaskPlan(
            specialist, tuple(_moves(topology.ROBOTIC, SWEEP_TARGETS, backend, rng, task, origin))
        )
    if "pick" in lowered:
        specs = _moves(topology.ROBOTIC, [PICK_TARGET], backend, rng, task, origin)
        specs.append(
            InvocationSpec(topology.ROBOTIC, "gripper", {"action": "close", "speed": 0.1}, origin)
        )
        return TaskPlan(specialist, tuple(specs))
    if "place" in lowered or "release" in lowered:
        specs = _moves(topology.ROBOTIC, [PLACE_TARGET], backend, rng, task, origin)
        specs.append(
            InvocationSpec(topology.ROBOTIC, "gripper", {"action": "open", "speed": 0.1}, origin)
        )
        return TaskPlan(specialist, tuple(specs))

    # Unrecognized motion task: a single conservative move to home.
    return TaskPlan(
        specialist, tuple(_moves(topology.ROBOTIC, [(0.0, 0.2, 0.3)], backend, rng, task, origin))
    )


__all__ = [
    "SWEEP_TARGETS",
    "PATROL_TARGETS",
    "RIGHT_SWEEP_TARGETS",
    "STAGING_ROUTE_DETOUR",
    "STAGING_ROUTE_DIRECT",
    "InvocationSpec",
    "TaskPlan",
    "route_task",
    "task_mentions_human",
    "plan_task",
]
