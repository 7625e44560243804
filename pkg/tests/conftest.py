import math
from pathlib import Path

import numpy as np
import pytest

from reachvox import Capsule, JointSpec, Pose, RobotModel

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "reachvox" / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


def planar_robot(lengths, steps=None, capsule_radius=None, limits_deg=(-180.0, 180.0)):
    """Planar arm in the z=0 plane: revolute z joints, links along +x."""
    lengths = list(lengths)
    steps = list(steps) if steps is not None else [1.0] * len(lengths)
    lim = (math.radians(limits_deg[0]), math.radians(limits_deg[1]))
    joints = []
    caps = []
    offset = [0.0, 0.0, 0.0]
    for length, step in zip(lengths, steps):
        joints.append(JointSpec(Pose.from_translation(offset), np.array([0.0, 0.0, 1.0]), lim, step, True))
        if capsule_radius:
            caps.append((Capsule([0.0, 0.0, 0.0], [length, 0.0, 0.0], capsule_radius),))
        else:
            caps.append(())
        offset = [length, 0.0, 0.0]
    return RobotModel(Pose(), tuple(joints), tuple(caps), Pose.from_translation(offset))


def planar_tip_oracle(lengths, q):
    """Independent planar FK via complex arithmetic."""
    z = 0j
    angle = 0.0
    for length, a in zip(lengths, q):
        angle += a
        z += length * complex(math.cos(angle), math.sin(angle))
    return np.array([z.real, z.imag, 0.0])


def write_tiny_scenario(
    tmp_path: Path,
    rotation_count: int = 2,
    height_count: int = 2,
    schedule=(6.0, 6.0),
    with_wall: bool = False,
    capsule_radius: float | None = None,
    trials=None,
) -> Path:
    """Small planar scenario on disk: 1.4 m plate under a 0.5/0.3 arm."""
    import json

    from reachvox.kinematics import robot_to_dict
    from reachvox.meshio import save_obj
    from reachvox.shapes import box_mesh

    robot = planar_robot([0.5, 0.3], steps=list(schedule), capsule_radius=capsule_radius)
    (tmp_path / "robot.json").write_text(json.dumps(robot_to_dict(robot)))
    save_obj(box_mesh([0.0, 0.0, -0.0717], [1.4, 1.4, 0.02]), tmp_path / "plate.obj")
    doc = {
        "name": "tiny",
        "robot": "robot.json",
        "workpiece": "plate.obj",
        "crane": {
            "rotationStepDeg": 360.0 / rotation_count,
            "rotationCount": rotation_count,
            "heightCount": height_count,
            "heightStep": 0.15,
        },
        "grid": {"voxelSize": 0.05, "band": 0.05},
        "schedule": list(schedule),
        "halfSpaceRestricted": False,
        "trials": trials
        if trials is not None
        else [
            {"id": "good", "difficulty": "Easy", "taskPoints": [{"position": [0.4, 0.0, -0.02], "label": "mid"}]},
            {"id": "bad", "difficulty": "Hard", "taskPoints": [{"position": [0.65, 0.65, -0.02], "label": "corner"}]},
        ],
    }
    if with_wall:
        save_obj(box_mesh([0.45, 0.0, 0.0], [0.02, 2.0, 0.6]), tmp_path / "wall.obj")
        doc["staticObstacles"] = [{"mesh": "wall.obj"}]
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(doc))
    return path
