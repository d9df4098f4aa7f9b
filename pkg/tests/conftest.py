import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ztpm.model import WorkspaceState
from ztpm.sim import topology


@pytest.fixture
def descriptor():
    return topology.workcell_descriptor()


@pytest.fixture
def move_arm(descriptor):
    return descriptor.tool("move_arm")


@pytest.fixture
def gripper(descriptor):
    return descriptor.tool("gripper")


@pytest.fixture
def empty_env():
    return WorkspaceState(arm_position=(0.0, 0.0, 0.3))
