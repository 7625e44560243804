"""Serial-chain kinematics: forward kinematics, reach envelope, and DLS inverse kinematics.

A robot is a base pose plus an ordered chain of revolute joints. Joint j's
world frame is ``frame(j-1) @ parent_transform(j) @ Rot(axis(j), q[j])``; link
j's capsules live in that frame. The tooltip is the tool offset applied to the
last link frame. Angles are radians and are clamped to limits, never wrapped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .collision import Capsule
from .geometry import Pose, quat_from_axis_angle

_AXIS_TOL = 1e-9
_LIMIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class JointSpec:
    """One revolute joint: fixed offset from the previous link, then rotation about axis."""

    parent_transform: Pose
    axis: np.ndarray
    limits: tuple[float, float]  # radians
    enum_step_deg: float = 0.0
    enumerated: bool = True

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        if abs(np.linalg.norm(axis) - 1.0) > _AXIS_TOL:
            raise ValueError(f"joint axis must be unit length, got norm {np.linalg.norm(axis)}")
        object.__setattr__(self, "axis", axis)
        lo, hi = self.limits
        if not lo <= hi:
            raise ValueError(f"joint limits reversed: [{lo}, {hi}]")
        object.__setattr__(self, "limits", (float(lo), float(hi)))
        if self.enumerated and not self.enum_step_deg > 0:
            raise ValueError("enumerated joint needs enum_step_deg > 0")


@dataclass(frozen=True, eq=False)
class KernelArrays:
    """Flat views of a RobotModel for the numba kernels."""

    base_R: np.ndarray
    base_t: np.ndarray
    pt_R: np.ndarray
    pt_t: np.ndarray
    axes: np.ndarray
    tool_t: np.ndarray
    limits_lo: np.ndarray
    limits_hi: np.ndarray
    caps_a: np.ndarray
    caps_b: np.ndarray
    caps_r: np.ndarray
    caps_start: np.ndarray
    enumerated_count: int
    tail_R: np.ndarray
    tail_t: np.ndarray
    tip_local: np.ndarray
    tail_reach: np.ndarray
    pinned_tail: np.ndarray


@dataclass(frozen=True, eq=False)
class RobotModel:
    base_pose: Pose
    joints: tuple[JointSpec, ...]
    link_capsules: tuple[tuple[Capsule, ...], ...]
    tool_offset: Pose = field(default_factory=Pose)

    def __post_init__(self):
        joints = tuple(self.joints)
        if len(joints) < 2:
            raise ValueError("robot needs at least 2 joints")
        object.__setattr__(self, "joints", joints)
        caps = tuple(tuple(c) for c in self.link_capsules)
        if len(caps) != len(joints):
            raise ValueError(f"link_capsules has {len(caps)} entries for {len(joints)} joints")
        object.__setattr__(self, "link_capsules", caps)
        flags = [j.enumerated for j in joints]
        k = flags.count(True)
        if k == 0:
            raise ValueError("at least one joint must be enumerated")
        if flags != [True] * k + [False] * (len(flags) - k):
            raise ValueError("non-enumerated joints must be a trailing suffix of the chain")
        object.__setattr__(self, "_cache", {})

    @property
    def enumerated_count(self) -> int:
        return sum(1 for j in self.joints if j.enumerated)

    def validate_joint_vector(self, q) -> np.ndarray:
        qv = np.asarray(q, dtype=np.float64).reshape(-1)
        if qv.shape[0] != len(self.joints):
            raise ValueError(f"joint vector has {qv.shape[0]} entries, robot has {len(self.joints)} joints")
        for i, spec in enumerate(self.joints):
            lo, hi = spec.limits
            if qv[i] < lo - _LIMIT_TOL or qv[i] > hi + _LIMIT_TOL:
                raise ValueError(f"joint {i} angle {qv[i]:.6f} outside limits [{lo:.6f}, {hi:.6f}]")
        return np.ascontiguousarray(qv)

    def pinned_value(self, joint_index: int) -> float:
        lo, hi = self.joints[joint_index].limits
        return min(max(0.0, lo), hi)

    def kernel_arrays(self) -> KernelArrays:
        cache = self.__dict__["_cache"]
        if "kernel" not in cache:
            n = len(self.joints)
            e = self.enumerated_count
            pt_R = np.empty((n, 3, 3))
            pt_t = np.empty((n, 3))
            axes = np.empty((n, 3))
            lo = np.empty(n)
            hi = np.empty(n)
            for i, spec in enumerate(self.joints):
                pt_R[i] = spec.parent_transform.rotation_matrix()
                pt_t[i] = spec.parent_transform.t
                axes[i] = spec.axis
                lo[i], hi[i] = spec.limits

            caps_a, caps_b, caps_r, starts = [], [], [], [0]
            for link in self.link_capsules:
                for c in link:
                    caps_a.append(c.a)
                    caps_b.append(c.b)
                    caps_r.append(c.radius)
                starts.append(len(caps_a))
            caps_a = np.asarray(caps_a, dtype=float).reshape(-1, 3) if caps_a else np.zeros((0, 3))
            caps_b = np.asarray(caps_b, dtype=float).reshape(-1, 3) if caps_b else np.zeros((0, 3))
            caps_r = np.asarray(caps_r, dtype=float) if caps_r else np.zeros(0)

            pinned = np.array([self.pinned_value(i) for i in range(e, n)], dtype=float)
            m = n - e
            tail_R = np.empty((m, 3, 3))
            tail_t = np.empty((m, 3))
            rel = Pose()
            for k in range(m):
                spec = self.joints[e + k]
                rel = rel @ spec.parent_transform @ Pose(quat_from_axis_angle(spec.axis, pinned[k]))
                tail_R[k] = rel.rotation_matrix()
                tail_t[k] = rel.t
            tip_local = (rel @ self.tool_offset).t

            offsets = np.linalg.norm(pt_t, axis=1)
            tool_len = float(np.linalg.norm(self.tool_offset.t))
            tail_reach = np.array([offsets[l + 1 :].sum() + tool_len for l in range(e)], dtype=float)

            cache["kernel"] = KernelArrays(
                base_R=self.base_pose.rotation_matrix(),
                base_t=np.asarray(self.base_pose.t, dtype=float),
                pt_R=pt_R,
                pt_t=pt_t,
                axes=axes,
                tool_t=np.asarray(self.tool_offset.t, dtype=float),
                limits_lo=lo,
                limits_hi=hi,
                caps_a=caps_a,
                caps_b=caps_b,
                caps_r=caps_r,
                caps_start=np.asarray(starts, dtype=np.int64),
                enumerated_count=e,
                tail_R=tail_R,
                tail_t=tail_t,
                tip_local=np.asarray(tip_local, dtype=float),
                tail_reach=tail_reach,
                pinned_tail=pinned,
            )
        return cache["kernel"]

    def full_joint_vector(self, enumerated_values: Sequence[float]) -> np.ndarray:
        """Extend values for the enumerated joints with the pinned tail values."""
        arrays = self.kernel_arrays()
        e = arrays.enumerated_count
        vals = np.asarray(enumerated_values, dtype=float).reshape(-1)
        if vals.shape[0] != e:
            raise ValueError(f"expected {e} enumerated values, got {vals.shape[0]}")
        return np.concatenate([vals, arrays.pinned_tail])


@dataclass(frozen=True, eq=False)
class FKResult:
    link_poses: tuple[Pose, ...]
    tooltip: np.ndarray


def forward_kinematics(robot: RobotModel, q) -> FKResult:
    """World pose of every link plus the tooltip position, straight quaternion math."""
    qv = robot.validate_joint_vector(q)
    pose = robot.base_pose
    links = []
    for spec, angle in zip(robot.joints, qv):
        pose = pose @ spec.parent_transform @ Pose(quat_from_axis_angle(spec.axis, float(angle)))
        links.append(pose)
    tooltip = (links[-1] @ robot.tool_offset).t
    return FKResult(tuple(links), tooltip)


def reach_envelope(robot: RobotModel) -> float:
    """Radius (from the base position) no tooltip position can exceed."""
    arrays = robot.kernel_arrays()
    return float(np.linalg.norm(arrays.pt_t, axis=1).sum() + np.linalg.norm(arrays.tool_t))


@dataclass(frozen=True, eq=False)
class IKResult:
    success: bool
    joints: np.ndarray
    residual: float
    iterations: int


def solve_ik(
    robot: RobotModel,
    target,
    seed,
    max_iters: int = 300,
    tolerance: float = 1e-3,
    damping: float = 0.05,
) -> IKResult:
    """Damped-least-squares IK on the position Jacobian (central differences).

    Returns the best configuration found; ``success`` says whether the tooltip
    got within ``tolerance`` of ``target``. The result always respects joint
    limits (angles are clamped every step). Deterministic for fixed inputs:
    restarts after stalls use a counter-seeded generator.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be > 0")
    arrays = robot.kernel_arrays()
    n = len(robot.joints)
    lo, hi = arrays.limits_lo, arrays.limits_hi
    target = np.asarray(target, dtype=float).reshape(3)

    q = np.clip(np.asarray(seed, dtype=float).reshape(-1), lo, hi)
    if q.shape[0] != n:
        raise ValueError(f"seed has {q.shape[0]} entries, robot has {n} joints")

    h = 1e-6
    lam_sq = damping * damping
    eye3 = np.eye(3)

    batch = np.empty((2 * n + 1, n))
    tips = np.empty((2 * n + 1, 3))
    best_q = q.copy()
    best_err = math.inf
    since_improve = 0
    restarts = 0

    def tip_of(qv: np.ndarray) -> np.ndarray:
        one = qv.reshape(1, -1)
        out = np.empty((1, 3))
        kernels.fk_tips_batch(arrays.base_R, arrays.base_t, arrays.pt_R, arrays.pt_t, arrays.axes, arrays.tool_t, one, out)
        return out[0]

    iterations = 0
    while True:
        err = float(np.linalg.norm(target - tip_of(q)))
        if err < best_err - 1e-12:
            best_err = err
            best_q = q.copy()
            since_improve = 0
        else:
            since_improve += 1
        if err <= tolerance:
            return IKResult(True, q.copy(), err, iterations)
        if iterations >= max_iters:
            return IKResult(False, best_q, best_err, iterations)

        if since_improve > 20:
            restarts += 1
            rng = np.random.default_rng(1000 + restarts)
            q = lo + rng.random(n) * (hi - lo)
            since_improve = 0
            iterations += 1
            continue

        batch[0] = q
        for j in range(n):
            batch[1 + 2 * j] = q
            batch[1 + 2 * j, j] += h
            batch[2 + 2 * j] = q
            batch[2 + 2 * j, j] -= h
        kernels.fk_tips_batch(arrays.base_R, arrays.base_t, arrays.pt_R, arrays.pt_t, arrays.axes, arrays.tool_t, batch, tips)
        jac = np.empty((3, n))
        for j in range(n):
            jac[:, j] = (tips[1 + 2 * j] - tips[2 + 2 * j]) / (2 * h)

        e = target - tips[0]
        # project out joints pinned at a limit that the step would push outward,
        # otherwise the solve wastes its budget grinding against the boundary
        mask = np.ones(n, dtype=bool)
        for _ in range(3):
            jm = jac * mask
            dq = jm.T @ np.linalg.solve(jm @ jm.T + lam_sq * eye3, e)
            saturating = mask & (((q <= lo + 1e-12) & (dq < 0)) | ((q >= hi - 1e-12) & (dq > 0)))
            if not saturating.any():
                break
            mask &= ~saturating
        step = float(np.linalg.norm(dq))
        if step > 0.5:
            dq *= 0.5 / step
        q_new = np.clip(q + dq, lo, hi)
        if float(np.abs(q_new - q).max()) < 1e-14:
            since_improve = 21  # saturated against limits; force a restart next pass
        q = q_new
        iterations += 1


# ---------------------------------------------------------------------------
# robot description file


def robot_from_dict(d: dict) -> RobotModel:
    joints = []
    for j in d["joints"]:
        lo, hi = j["limitsDeg"]
        joints.append(
            JointSpec(
                parent_transform=Pose.from_dict(j.get("parentTransform", {})),
                axis=np.asarray(j["axis"], dtype=float),
                limits=(math.radians(lo), math.radians(hi)),
                enum_step_deg=float(j.get("enumStepDeg", 0.0)),
                enumerated=bool(j.get("enumerated", True)),
            )
        )
    link_capsules = []
    for link in d.get("linkCapsules", [[] for _ in joints]):
        link_capsules.append(tuple(Capsule(np.asarray(c["a"], float), np.asarray(c["b"], float), float(c["radius"])) for c in link))
    return RobotModel(
        base_pose=Pose.from_dict(d.get("basePose", {})),
        joints=tuple(joints),
        link_capsules=tuple(link_capsules),
        tool_offset=Pose.from_dict(d.get("toolOffset", {})),
    )


def robot_to_dict(robot: RobotModel) -> dict:
    return {
        "basePose": robot.base_pose.to_dict(),
        "toolOffset": robot.tool_offset.to_dict(),
        "joints": [
            {
                "parentTransform": j.parent_transform.to_dict(),
                "axis": [float(v) for v in j.axis],
                "limitsDeg": [math.degrees(j.limits[0]), math.degrees(j.limits[1])],
                "enumStepDeg": j.enum_step_deg,
                "enumerated": j.enumerated,
            }
            for j in robot.joints
        ],
        "linkCapsules": [
            [{"a": [float(v) for v in c.a], "b": [float(v) for v in c.b], "radius": c.radius} for c in link]
            for link in robot.link_capsules
        ],
    }


def load_robot(path) -> RobotModel:
    with open(path, "r", encoding="utf-8") as fh:
        return robot_from_dict(json.load(fh))
