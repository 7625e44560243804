"""Voxelized reachability maps around a workpiece for a serial robot arm."""

from .collision import (
    Capsule,
    MeshAccelerator,
    Scene,
    TriMesh,
    build_mesh_accelerator,
    capsule_capsule_intersects,
    capsule_mesh_intersects,
    distance_point_mesh,
    robot_collides,
)
from .geometry import Pose
from .kinematics import (
    FKResult,
    IKResult,
    JointSpec,
    RobotModel,
    forward_kinematics,
    load_robot,
    reach_envelope,
    solve_ik,
)
from .mapstore import MapSetParseError, read_map_set, write_map_set
from .reachability import (
    ReachabilityMap,
    Status,
    SweepMeta,
    VoxelGrid,
    dense_reference_sweep,
    enumeration_count,
    map_stats,
    maps_equal,
    select_active_voxels,
    sweep_reachability,
    voxel_of_point,
)
from .scenario import (
    CraneSpec,
    Difficulty,
    EvalResult,
    Outcome,
    Scenario,
    TaskPoint,
    Trial,
    TrialStateError,
    WorkpieceConfig,
    config_pose,
    evaluate_config,
    load_scenario,
    precompute_all,
    submit_attempt,
)

__version__ = "0.1.0"

__all__ = [
    "Capsule",
    "CraneSpec",
    "Difficulty",
    "EvalResult",
    "FKResult",
    "IKResult",
    "JointSpec",
    "MapSetParseError",
    "MeshAccelerator",
    "Outcome",
    "Pose",
    "ReachabilityMap",
    "RobotModel",
    "Scenario",
    "Scene",
    "Status",
    "SweepMeta",
    "TaskPoint",
    "Trial",
    "TrialStateError",
    "TriMesh",
    "VoxelGrid",
    "WorkpieceConfig",
    "build_mesh_accelerator",
    "capsule_capsule_intersects",
    "capsule_mesh_intersects",
    "config_pose",
    "dense_reference_sweep",
    "distance_point_mesh",
    "enumeration_count",
    "evaluate_config",
    "forward_kinematics",
    "load_robot",
    "load_scenario",
    "map_stats",
    "maps_equal",
    "precompute_all",
    "reach_envelope",
    "read_map_set",
    "robot_collides",
    "select_active_voxels",
    "solve_ik",
    "submit_attempt",
    "sweep_reachability",
    "voxel_of_point",
    "write_map_set",
]
