#!/usr/bin/env python3
"""Regenerate the bundled descriptor, policy, and scenario documents from
the builders in ztpm.sim. Run after changing the topology or the scenario
library; tests pin the committed files to the builders' output."""

from __future__ import annotations

import os
import sys
from dataclasses import replace

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(REPO, "src"))

from ztpm import documents  # noqa: E402
from ztpm.primitives import AttackClass  # noqa: E402
from ztpm.sim import topology  # noqa: E402
from ztpm.sim.library import attack_scenario, benign_scenario, condition_scenario  # noqa: E402
from ztpm.sim.scenario import Scenario, save_scenario  # noqa: E402


def console_demo() -> Scenario:
    demo = benign_scenario(name="console-demo")
    return replace(
        demo,
        backend_kind="sensitive",
        operator_script=(
            "sweep the arm in a smooth arc left to right across the front of the workspace. "
            "a person is standing half a meter from the robot base",
            "configure mode 0.5",
            "request dual authorization",
            "pick up the workpiece. a person is standing half a meter from the robot base",
        ),
        workspace=replace(demo.workspace, human_present=True, human_distance_m=0.5),
        approver="none",
        max_ticks=2000,
    )


def regenerate(root: str = REPO) -> list[str]:
    written = []

    def emit_doc(rel: str, data) -> None:
        path = os.path.join(root, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        documents.save_yaml(path, data)
        written.append(rel)

    def emit_scenario(rel: str, scenario: Scenario) -> None:
        path = os.path.join(root, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        save_scenario(path, scenario)
        written.append(rel)

    emit_doc("configs/workcell.yaml", documents.descriptor_to_plain(topology.workcell_descriptor()))
    emit_doc("configs/policies.yaml", documents.policies_to_plain(topology.default_policies()))
    emit_scenario("scenarios/benign.yaml", benign_scenario())
    emit_scenario("scenarios/speed_c2_sensitive.yaml", condition_scenario("C2", "sensitive", seed=5))
    for attack_class in AttackClass:
        scenario = attack_scenario(attack_class)
        emit_scenario(f"scenarios/{scenario.name.replace('attack-', 'attack_')}.yaml", scenario)
    emit_scenario("scenarios/console_demo.yaml", console_demo())
    return written


if __name__ == "__main__":
    for rel in regenerate():
        print(f"wrote {rel}")
