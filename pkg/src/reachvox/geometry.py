"""Rigid transforms as unit quaternion + translation.

All rotations use scalar-first quaternions (w, x, y, z); translations are in
meters. Poses compose left-to-right like homogeneous matrices: ``a @ b`` first
applies ``b`` in ``a``'s frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_UNIT_TOL = 1e-9


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector ``v`` by unit quaternion ``q``."""
    w, x, y, z = q
    # v + 2*w*(u x v) + 2*(u x (u x v)) with u = (x, y, z)
    u = np.array([x, y, z])
    uv = np.cross(u, v)
    return v + 2.0 * (w * uv + np.cross(u, uv))


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < 1e-12:
        raise ValueError("rotation axis must be non-zero")
    half = 0.5 * angle
    s = math.sin(half) / n
    return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform: rotation ``q`` (unit quaternion, wxyz) then translation ``t``."""

    q: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(4)
        t = np.asarray(self.t, dtype=float).reshape(3)
        if abs(np.linalg.norm(q) - 1.0) > _UNIT_TOL:
            raise ValueError(f"quaternion norm {np.linalg.norm(q)!r} not within {_UNIT_TOL} of 1")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "t", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_axis_angle(axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "Pose":
        return Pose(quat_from_axis_angle(np.asarray(axis, float), angle), np.asarray(translation, float))

    @staticmethod
    def from_translation(translation) -> "Pose":
        return Pose(t=np.asarray(translation, dtype=float))

    def compose(self, other: "Pose") -> "Pose":
        q = quat_multiply(self.q, other.q)
        n = np.linalg.norm(q)
        return Pose(q / n, self.t + quat_rotate(self.q, other.t))

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def apply(self, point) -> np.ndarray:
        """Map a point given in this pose's local frame into the parent frame."""
        return self.t + quat_rotate(self.q, np.asarray(point, dtype=float))

    def inverse(self) -> "Pose":
        conj = self.q * np.array([1.0, -1.0, -1.0, -1.0])
        return Pose(conj, -quat_rotate(conj, self.t))

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.q)

    def is_close(self, other: "Pose", tol: float = 1e-9) -> bool:
        # q and -q encode the same rotation
        qd = min(np.abs(self.q - other.q).max(), np.abs(self.q + other.q).max())
        return qd <= tol and np.abs(self.t - other.t).max() <= tol

    def to_dict(self) -> dict:
        return {"q": [float(v) for v in self.q], "t": [float(v) for v in self.t]}

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(np.asarray(d.get("q", [1, 0, 0, 0]), float), np.asarray(d.get("t", [0, 0, 0]), float))
