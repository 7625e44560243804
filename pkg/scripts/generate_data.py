#!/usr/bin/env python3
"""Regenerate the bundled robots, meshes, and scenario files under src/reachvox/data."""

import json
import math
from pathlib import Path

from reachvox.meshio import save_obj
from reachvox.shapes import box_mesh, engine_surrogate

DATA = Path(__file__).resolve().parent.parent / "src" / "reachvox" / "data"

IDENT = {"q": [1, 0, 0, 0], "t": [0, 0, 0]}


def pose(t):
    return {"q": [1, 0, 0, 0], "t": list(t)}


def joint(t, axis, step, enumerated=True, limits=(-180, 180)):
    return {
        "parentTransform": pose(t),
        "axis": list(axis),
        "limitsDeg": list(limits),
        "enumStepDeg": step,
        "enumerated": enumerated,
    }


def capsule(a, b, r):
    return {"a": list(a), "b": list(b), "radius": r}


def planar2(with_capsules: bool) -> dict:
    caps1 = [capsule([0, 0, 0], [0.6, 0, 0], 0.03)] if with_capsules else []
    caps2 = [capsule([0, 0, 0], [0.4, 0, 0], 0.03)] if with_capsules else []
    return {
        "basePose": IDENT,
        "toolOffset": pose([0.4, 0, 0]),
        "joints": [
            joint([0, 0, 0], [0, 0, 1], 1.0),
            joint([0.6, 0, 0], [0, 0, 1], 1.0),
        ],
        "linkCapsules": [caps1, caps2],
    }


def ur10e_like() -> dict:
    # 6R chain, paper step sizes on the five pose-relevant joints; the sixth
    # spins about the end-effector link axis and is skipped in sweeps.
    return {
        "basePose": IDENT,
        "toolOffset": pose([0.10, 0, 0]),
        "joints": [
            joint([0, 0, 0.181], [0, 0, 1], 30.0),
            joint([0, 0.137, 0], [0, 1, 0], 20.0),
            joint([0.613, 0, 0], [0, 1, 0], 12.0),
            joint([0.572, 0, 0], [0, 1, 0], 10.0),
            joint([0.135, 0, 0], [0, 0, 1], 8.0),
            joint([0.120, 0, 0], [1, 0, 0], 0.0, enumerated=False),
        ],
        "linkCapsules": [
            [capsule([0, 0, -0.08], [0, 0, 0.08], 0.08)],
            [capsule([0.08, 0, 0], [0.55, 0, 0], 0.06)],
            [capsule([0.05, 0, 0], [0.52, 0, 0], 0.05)],
            [capsule([0, 0, 0], [0.115, 0, 0], 0.045)],
            [capsule([0, 0, 0], [0.10, 0, 0], 0.045)],
            [capsule([0, 0, 0], [0.09, 0, 0], 0.04)],
        ],
    }


# Plate sits 0.0717 m below the planar arm's work plane: with voxel 0.05 and
# band 0.05 the derived grid puts one active cell row centered on z = 0 where
# the planar tooltips live.
PLATE_Z = -0.0717


def scenarios():
    crane = {"rotationStepDeg": 40, "rotationCount": 9, "heightCount": 4, "heightStep": 0.15, "basePose": IDENT}
    grid = {"voxelSize": 0.05, "band": 0.05}

    annulus = {
        "name": "annulus",
        "robot": "../robots/planar2.json",
        "workpiece": "../meshes/plate.obj",
        "crane": crane,
        "grid": grid,
        "schedule": [1, 1],
        "halfSpaceRestricted": False,
        "trials": [
            {
                "id": "disc-mid",
                "difficulty": "Easy",
                "taskPoints": [{"position": [0.5, 0.0, -0.02], "label": "mid-ring"}],
            },
            {
                "id": "corner-out-of-reach",
                "difficulty": "Hard",
                "taskPoints": [{"position": [1.05, 1.05, -0.02], "label": "far-corner"}],
            },
        ],
    }

    walled = {
        "name": "walled",
        "robot": "../robots/planar2_capsules.json",
        "workpiece": "../meshes/plate.obj",
        "staticObstacles": [{"mesh": "../meshes/wall.obj", "pose": IDENT}],
        "crane": crane,
        "grid": grid,
        "schedule": [1, 1],
        "halfSpaceRestricted": False,
        "trials": [
            {
                "id": "behind-wall",
                "difficulty": "Hard",
                "taskPoints": [{"position": [0.8, 0.0, -0.02], "label": "blocked-side"}],
            }
        ],
    }

    engine = {
        "name": "engine",
        "robot": "../robots/ur10e_like.json",
        "workpiece": "../meshes/engine.obj",
        "crane": {
            "rotationStepDeg": 40,
            "rotationCount": 9,
            "heightCount": 4,
            "heightStep": 0.15,
            "basePose": pose([1.05, 0.0, 0.30]),
        },
        "grid": grid,
        "schedule": [45, 30, 20, 15, 12],
        "halfSpaceRestricted": True,
        "trials": [
            {
                "id": "rib-face",
                "difficulty": "Easy",
                "taskPoints": [{"position": [0.42, 0.0, 0.05], "label": "rib"}],
            },
            {
                "id": "channel-floor",
                "difficulty": "Hard",
                "taskPoints": [{"position": [0.0, 0.05, -0.06], "label": "channel"}],
            },
        ],
    }
    return {"annulus": annulus, "walled": walled, "engine": engine}


def main():
    (DATA / "robots").mkdir(parents=True, exist_ok=True)
    (DATA / "meshes").mkdir(parents=True, exist_ok=True)
    (DATA / "scenarios").mkdir(parents=True, exist_ok=True)

    robots = {
        "planar2": planar2(False),
        "planar2_capsules": planar2(True),
        "ur10e_like": ur10e_like(),
    }
    for name, d in robots.items():
        with open(DATA / "robots" / f"{name}.json", "w") as fh:
            json.dump(d, fh, indent=2)
            fh.write("\n")

    save_obj(box_mesh([0, 0, PLATE_Z], [2.2, 2.2, 0.02]), DATA / "meshes" / "plate.obj")
    save_obj(box_mesh([0.55, 0, 0], [0.02, 2.6, 0.6]), DATA / "meshes" / "wall.obj")
    save_obj(engine_surrogate(), DATA / "meshes" / "engine.obj")

    for name, d in scenarios().items():
        with open(DATA / "scenarios" / f"{name}.json", "w") as fh:
            json.dump(d, fh, indent=2)
            fh.write("\n")

    print(f"wrote data files under {DATA}")


if __name__ == "__main__":
    main()
