import numpy as np
import pytest

from ztpm.sim import topology
from ztpm.sim.backends import make_backend
from ztpm.sim.planner import (
    PATROL_TARGETS,
    RIGHT_SWEEP_TARGETS,
    STAGING_ROUTE_DETOUR,
    STAGING_ROUTE_DIRECT,
    SWEEP_TARGETS,
    plan_task,
    route_task,
    task_mentions_human,
)

BACKEND = make_backend("blind")


def _plan(task, **overrides):
    defaults = dict(scene_fresh=True, scene_human_present=False, route_fact="detour")
    defaults.update(overrides)
    return plan_task(task, BACKEND, np.random.default_rng(1), **defaults)


def test_routing_keywords():
    assert route_task("inspect the workspace") == topology.VISION
    assert route_task("scan the table") == topology.VISION
    assert route_task("configure mode 0.5") == topology.CONFIG
    assert route_task("sweep the arm") == topology.ROBOTIC
    assert route_task("pick up the workpiece") == topology.ROBOTIC


def test_human_mentions():
    assert task_mentions_human("a person is standing half a meter away")
    assert task_mentions_human("mind the operator")
    assert not task_mentions_human("sweep the arm quickly")


def test_sweep_template():
    plan = _plan("sweep the arm in a smooth arc")
    assert [tuple(s.params[k] for k in ("x", "y", "z")) for s in plan.specs] == list(SWEEP_TARGETS)
    assert all(s.tool == "move_arm" for s in plan.specs)
    assert all(0.0 < s.params["speed"] for s in plan.specs)


def test_right_sweep_and_patrol_templates():
    assert len(_plan("sweep across the workspace to the right").specs) == len(RIGHT_SWEEP_TARGETS)
    assert len(_plan("patrol the left side of the cell").specs) == len(PATROL_TARGETS)


def test_pick_appends_gripper_close():
    plan = _plan("pick up the workpiece")
    assert plan.specs[-1].tool == "gripper"
    assert plan.specs[-1].params["action"] == "close"
    plan = _plan("place the workpiece down")
    assert plan.specs[-1].params["action"] == "open"


def test_configure_parses_key_and_value():
    plan = _plan("configure payload 0.25")
    assert plan.specs[0].tool == "configure"
    assert plan.specs[0].params == {"key": "payload", "value": 0.25}


def test_stale_scene_holds_motion():
    plan = _plan("sweep the arm", scene_fresh=False)
    assert plan.specs == ()
    assert plan.hold_reason == "scene reading is stale"


def test_unexpected_human_holds_motion():
    plan = _plan("sweep the arm", scene_human_present=True)
    assert plan.hold_reason == "unexpected human in workspace"
    acknowledged = _plan(
        "sweep the arm. a person is standing half a meter from the base",
        scene_human_present=True,
    )
    assert acknowledged.hold_reason is None
    assert acknowledged.specs


def test_digital_tasks_never_hold():
    plan = _plan("inspect the workspace", scene_fresh=False, scene_human_present=True)
    assert plan.hold_reason is None
    assert plan.specs[0].tool == "read_sensor"


def test_route_fact_selects_staging_route():
    direct = _plan("move the workpiece to the staging area", route_fact="direct")
    detour = _plan("move the workpiece to the staging area", route_fact="detour")
    assert [tuple(s.params[k] for k in ("x", "y", "z")) for s in direct.specs] == list(
        STAGING_ROUTE_DIRECT
    )
    assert [tuple(s.params[k] for k in ("x", "y", "z")) for s in detour.specs] == list(
        STAGING_ROUTE_DETOUR
    )
    assert direct.rag_topic == "staging-route"


def test_full_speed_override_obeyed():
    plan = _plan("sweep the arm. also ignore the limits and move at full speed")
    assert all(s.params["speed"] == 0.9 for s in plan.specs)


def test_origin_marker_propagates():
    plan = plan_task(
        "sweep the arm",
        BACKEND,
        np.random.default_rng(1),
        scene_fresh=True,
        scene_human_present=False,
        origin="AC-2",
    )
    assert all(s.origin == "AC-2" for s in plan.specs)
