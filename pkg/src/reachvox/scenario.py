"""Crane/workpiece scenario: discrete workpiece configurations, task points,
per-configuration reachability maps, and the attempt-limited accept loop."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .collision import Scene, TriMesh, distance_point_mesh
from .geometry import Pose, quat_from_axis_angle
from .kinematics import RobotModel, load_robot
from .meshio import load_mesh
from .reachability import (
    ReachabilityMap,
    Status,
    VoxelGrid,
    derive_grid,
    select_active_voxels,
    sweep_reachability,
)

_UP = np.array([0.0, 0.0, 1.0])


class Difficulty(str, Enum):
    EASY = "Easy"
    HARD = "Hard"


class Outcome(str, Enum):
    PENDING = "Pending"
    SUCCESS = "Success"
    FAILED = "Failed"


class TrialStateError(RuntimeError):
    """Attempt submitted against a trial that is no longer Pending."""


@dataclass(frozen=True, eq=False)
class CraneSpec:
    rotation_step_deg: float = 40.0
    rotation_count: int = 9
    height_count: int = 4
    height_step: float = 0.15
    base_pose: Pose = field(default_factory=Pose)

    def __post_init__(self):
        if self.rotation_count < 1 or self.height_count < 1:
            raise ValueError("rotation_count and height_count must be >= 1")
        if abs(self.rotation_step_deg * self.rotation_count - 360.0) > 1e-9:
            raise ValueError(
                f"rotation_step_deg * rotation_count must be 360, got "
                f"{self.rotation_step_deg} * {self.rotation_count}"
            )

    @property
    def config_count(self) -> int:
        return self.rotation_count * self.height_count

    def configs(self):
        for rot in range(self.rotation_count):
            for height in range(self.height_count):
                yield WorkpieceConfig(rot, height)


@dataclass(frozen=True)
class WorkpieceConfig:
    rot_index: int
    height_index: int


def _check_config(crane: CraneSpec, cfg: WorkpieceConfig) -> None:
    if not (0 <= cfg.rot_index < crane.rotation_count):
        raise ValueError(f"rot_index {cfg.rot_index} outside [0, {crane.rotation_count})")
    if not (0 <= cfg.height_index < crane.height_count):
        raise ValueError(f"height_index {cfg.height_index} outside [0, {crane.height_count})")


def config_pose(crane: CraneSpec, cfg: WorkpieceConfig) -> Pose:
    """Crane base pose, rotated about vertical by rot steps and lifted by height steps."""
    _check_config(crane, cfg)
    angle = math.radians(cfg.rot_index * crane.rotation_step_deg)
    lift = cfg.height_index * crane.height_step
    return crane.base_pose @ Pose(quat_from_axis_angle(_UP, angle), lift * _UP)


@dataclass(frozen=True, eq=False)
class TaskPoint:
    position: np.ndarray  # workpiece-local frame
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))


@dataclass
class Trial:
    id: str
    task_points: tuple[TaskPoint, ...]
    difficulty: Difficulty = Difficulty.EASY
    max_attempts: int = 8
    attempts_used: int = 0
    outcome: Outcome = Outcome.PENDING


@dataclass(frozen=True, eq=False)
class PointVerdict:
    point: TaskPoint
    voxel: Optional[tuple[int, int, int]]  # None = outside the grid
    status: Status


@dataclass(frozen=True, eq=False)
class EvalResult:
    valid: bool
    per_point: tuple[PointVerdict, ...]


def evaluate_config(
    rmap: ReachabilityMap, crane: CraneSpec, cfg: WorkpieceConfig, task_points: Sequence[TaskPoint]
) -> EvalResult:
    """valid iff every task point, posed with the workpiece, lands in a Reachable voxel."""
    pose = config_pose(crane, cfg)
    verdicts = []
    for tp in task_points:
        world = pose.apply(tp.position)
        voxel = rmap.grid.voxel_of_point(world)
        if voxel is None:
            verdicts.append(PointVerdict(tp, None, Status.BLOCKED))
        else:
            verdicts.append(PointVerdict(tp, voxel, rmap.status.get(voxel, Status.BLOCKED)))
    return EvalResult(all(v.status == Status.REACHABLE for v in verdicts), tuple(verdicts))


def submit_attempt(
    trial: Trial,
    maps: Mapping[WorkpieceConfig, ReachabilityMap],
    crane: CraneSpec,
    cfg: WorkpieceConfig,
) -> tuple[Trial, EvalResult]:
    """One accept-button press: consumes an attempt and resolves the trial state."""
    if trial.outcome != Outcome.PENDING:
        raise TrialStateError(f"trial {trial.id!r} is {trial.outcome.value}, not Pending")
    _check_config(crane, cfg)
    rmap = maps.get(cfg)
    if rmap is None:
        raise ValueError(f"no reachability map for rot={cfg.rot_index} height={cfg.height_index}")
    evaluation = evaluate_config(rmap, crane, cfg, trial.task_points)
    trial.attempts_used += 1
    if evaluation.valid:
        trial.outcome = Outcome.SUCCESS
    elif trial.attempts_used >= trial.max_attempts:
        trial.outcome = Outcome.FAILED
    return trial, evaluation


# ---------------------------------------------------------------------------
# precompute


def precompute_all(
    robot: RobotModel,
    workpiece: TriMesh,
    static_obstacles: Sequence[tuple[TriMesh, Pose]],
    crane: CraneSpec,
    voxel_size: float,
    band: float,
    schedule: Sequence[float],
    half_space_restricted: bool = False,
    threads: int = 1,
    progress: Optional[Callable[[WorkpieceConfig, ReachabilityMap], None]] = None,
) -> dict[WorkpieceConfig, ReachabilityMap]:
    """One reachability map per crane configuration, grid re-centered per config."""
    results: dict[WorkpieceConfig, ReachabilityMap] = {}
    for cfg in crane.configs():
        try:
            pose = config_pose(crane, cfg)
            scene = Scene(workpiece, pose, tuple(static_obstacles))
            lo, hi = workpiece.transformed(pose).bounds()
            grid = derive_grid(lo, hi, voxel_size, band)
            active = select_active_voxels(grid, workpiece, pose, band)
            rmap = sweep_reachability(
                robot, scene, active, grid, schedule,
                half_space_restricted=half_space_restricted, threads=threads,
            )
        except Exception as exc:
            raise RuntimeError(f"sweep failed for rot={cfg.rot_index} height={cfg.height_index}: {exc}") from exc
        results[cfg] = rmap
        if progress is not None:
            progress(cfg, rmap)
    return results


# ---------------------------------------------------------------------------
# scenario file


@dataclass(eq=False)
class Scenario:
    robot: RobotModel
    workpiece: TriMesh
    static_obstacles: tuple[tuple[TriMesh, Pose], ...]
    crane: CraneSpec
    voxel_size: float
    band: float
    schedule: tuple[float, ...]
    half_space_restricted: bool
    trials: list[Trial]
    name: str = ""

    def scene_for(self, cfg: WorkpieceConfig) -> Scene:
        return Scene(self.workpiece, config_pose(self.crane, cfg), self.static_obstacles)

    def precompute(self, threads: int = 1, progress=None) -> dict[WorkpieceConfig, ReachabilityMap]:
        return precompute_all(
            self.robot,
            self.workpiece,
            self.static_obstacles,
            self.crane,
            self.voxel_size,
            self.band,
            self.schedule,
            self.half_space_restricted,
            threads,
            progress,
        )


def load_scenario(path) -> Scenario:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    base = path.parent

    robot = load_robot(base / d["robot"])
    workpiece = load_mesh(base / d["workpiece"])
    obstacles = tuple(
        (load_mesh(base / o["mesh"]), Pose.from_dict(o.get("pose", {}))) for o in d.get("staticObstacles", [])
    )

    crane_d = d.get("crane", {})
    crane = CraneSpec(
        rotation_step_deg=float(crane_d.get("rotationStepDeg", 40.0)),
        rotation_count=int(crane_d.get("rotationCount", 9)),
        height_count=int(crane_d.get("heightCount", 4)),
        height_step=float(crane_d.get("heightStep", 0.15)),
        base_pose=Pose.from_dict(crane_d.get("basePose", {})),
    )

    grid_d = d.get("grid", {})
    voxel_size = float(grid_d.get("voxelSize", 0.05))
    band = float(grid_d.get("band", 0.05))

    trials = []
    for t in d.get("trials", []):
        points = tuple(TaskPoint(np.asarray(p["position"], float), p.get("label", "")) for p in t.get("taskPoints", []))
        for tp in points:
            dist = distance_point_mesh(tp.position, workpiece)
            if dist > band + 1e-9:
                raise ValueError(
                    f"trial {t['id']!r}: task point {tp.label!r} is {dist:.4f} m from the "
                    f"workpiece surface, beyond the {band} m band"
                )
        trials.append(
            Trial(
                id=str(t["id"]),
                task_points=points,
                difficulty=Difficulty(t.get("difficulty", "Easy")),
                max_attempts=int(t.get("maxAttempts", 8)),
            )
        )

    return Scenario(
        robot=robot,
        workpiece=workpiece,
        static_obstacles=obstacles,
        crane=crane,
        voxel_size=voxel_size,
        band=band,
        schedule=tuple(float(s) for s in d.get("schedule", [])),
        half_space_restricted=bool(d.get("halfSpaceRestricted", False)),
        trials=trials,
        name=str(d.get("name", path.stem)),
    )
