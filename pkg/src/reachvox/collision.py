"""Collision queries: capsules vs triangle meshes, plus robot self-collision.

Robot links are approximated by capsules; scene geometry is triangle soup.
Distance/intersection queries run through a median-split BVH (leaf size 4)
whose results are exactly the brute-force all-triangles results — the tree
only prunes triangles that provably cannot matter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from . import kernels
from .geometry import Pose

if TYPE_CHECKING:  # pragma: no cover
    from .kinematics import RobotModel

_LEAF_SIZE = 4


@dataclass(frozen=True, eq=False)
class Capsule:
    """Segment [a, b] inflated by radius, in some link-local frame (meters)."""

    a: np.ndarray
    b: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(3))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(3))
        if not self.radius > 0:
            raise ValueError(f"capsule radius must be > 0, got {self.radius}")


class TriMesh:
    """Indexed triangle mesh. Vertices in meters."""

    def __init__(self, vertices, triangles):
        self.vertices = np.ascontiguousarray(np.asarray(vertices, dtype=np.float64).reshape(-1, 3))
        self.triangles = np.ascontiguousarray(np.asarray(triangles, dtype=np.int32).reshape(-1, 3))
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")
        self._accel: Optional[MeshAccelerator] = None

    def __len__(self):
        return len(self.triangles)

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def corners(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        v, t = self.vertices, self.triangles
        return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_empty:
            raise ValueError("empty mesh has no bounds")
        used = self.vertices[np.unique(self.triangles)]
        return used.min(axis=0), used.max(axis=0)

    def transformed(self, pose: Pose) -> "TriMesh":
        R = pose.rotation_matrix()
        return TriMesh(self.vertices @ R.T + pose.t, self.triangles.copy())

    def accelerator(self) -> "MeshAccelerator":
        if self._accel is None:
            self._accel = build_mesh_accelerator(self)
        return self._accel


def drop_degenerate_triangles(mesh: TriMesh, warn: bool = True) -> TriMesh:
    """Remove zero-area triangles (they poison closest-point queries)."""
    v0, v1, v2 = mesh.corners()
    area2 = np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)
    keep = area2 > 1e-12
    dropped = int((~keep).sum())
    if dropped and warn:
        import warnings

        warnings.warn(f"dropped {dropped} degenerate triangle(s)", stacklevel=2)
    if dropped == 0:
        return mesh
    return TriMesh(mesh.vertices, mesh.triangles[keep])


class MeshAccelerator:
    """Median-split triangle BVH. Build is deterministic for a given mesh."""

    def __init__(self, mesh: TriMesh):
        if mesh.is_empty:
            raise ValueError("cannot build accelerator for empty mesh")
        v0, v1, v2 = mesh.corners()
        self.v0 = np.ascontiguousarray(v0)
        self.v1 = np.ascontiguousarray(v1)
        self.v2 = np.ascontiguousarray(v2)
        tri_min = np.minimum(np.minimum(v0, v1), v2)
        tri_max = np.maximum(np.maximum(v0, v1), v2)
        centroids = (v0 + v1 + v2) / 3.0

        order = np.arange(len(v0), dtype=np.int32)
        nmin: list[np.ndarray] = []
        nmax: list[np.ndarray] = []
        nleft: list[int] = []
        nright: list[int] = []
        nstart: list[int] = []
        ncount: list[int] = []

        def build(lo: int, hi: int) -> int:
            node = len(nmin)
            seg = order[lo:hi]
            nmin.append(tri_min[seg].min(axis=0))
            nmax.append(tri_max[seg].max(axis=0))
            nleft.append(-1)
            nright.append(-1)
            nstart.append(lo)
            ncount.append(hi - lo)
            if hi - lo > _LEAF_SIZE:
                cen = centroids[seg]
                extent = cen.max(axis=0) - cen.min(axis=0)
                axis = int(np.argmax(extent))
                if extent[axis] > 0:
                    order[lo:hi] = seg[np.argsort(cen[:, axis], kind="stable")]
                mid = (lo + hi) // 2
                ncount[node] = 0
                nleft[node] = build(lo, mid)
                nright[node] = build(mid, hi)
            return node

        build(0, len(v0))
        self.node_min = np.ascontiguousarray(np.asarray(nmin))
        self.node_max = np.ascontiguousarray(np.asarray(nmax))
        self.node_left = np.asarray(nleft, dtype=np.int32)
        self.node_right = np.asarray(nright, dtype=np.int32)
        self.node_start = np.asarray(nstart, dtype=np.int32)
        self.node_count = np.asarray(ncount, dtype=np.int32)
        self.order = np.ascontiguousarray(order)

    def _args(self):
        return (
            self.v0,
            self.v1,
            self.v2,
            self.node_min,
            self.node_max,
            self.node_left,
            self.node_right,
            self.node_start,
            self.node_count,
            self.order,
        )

    def point_distance(self, p) -> float:
        p = np.asarray(p, dtype=float).reshape(3)
        return float(np.sqrt(kernels.bvh_point_dist_sq(p, *self._args())))

    def point_within(self, p, cutoff: float) -> bool:
        p = np.asarray(p, dtype=float).reshape(3)
        return bool(kernels.bvh_point_within(p, float(cutoff) ** 2, *self._args()))

    def segment_distance(self, a, b) -> float:
        a = np.asarray(a, dtype=float).reshape(3)
        b = np.asarray(b, dtype=float).reshape(3)
        return float(np.sqrt(kernels.bvh_seg_dist_sq(a, b, *self._args())))

    def segment_hit(self, a, b, radius: float) -> bool:
        a = np.asarray(a, dtype=float).reshape(3)
        b = np.asarray(b, dtype=float).reshape(3)
        return bool(kernels.bvh_seg_hit(a, b, float(radius), *self._args()))


def build_mesh_accelerator(mesh: TriMesh) -> MeshAccelerator:
    """Spatial index whose queries match brute force over all triangles."""
    return MeshAccelerator(mesh)


def distance_point_mesh(p, mesh: TriMesh, pose: Pose = Pose()) -> float:
    """Exact minimum distance from world point p to the posed mesh surface."""
    if mesh.is_empty:
        raise ValueError("distance query on empty mesh")
    # rigid invariance: query in the mesh's local frame
    return mesh.accelerator().point_distance(pose.inverse().apply(p))


def capsule_mesh_intersects(capsule: Capsule, capsule_pose: Pose, mesh: TriMesh, mesh_pose: Pose = Pose()) -> bool:
    """True iff the capsule's segment comes closer than its radius to the posed mesh."""
    if mesh.is_empty:
        return False
    to_local = mesh_pose.inverse() @ capsule_pose
    return mesh.accelerator().segment_hit(to_local.apply(capsule.a), to_local.apply(capsule.b), capsule.radius)


def capsule_capsule_intersects(c1: Capsule, pose1: Pose, c2: Capsule, pose2: Pose) -> bool:
    a1, b1 = pose1.apply(c1.a), pose1.apply(c1.b)
    a2, b2 = pose2.apply(c2.a), pose2.apply(c2.b)
    rr = c1.radius + c2.radius
    return bool(kernels.seg_seg_dist_sq(a1, b1, a2, b2) < rr * rr)


@dataclass
class Scene:
    """Workpiece plus static obstacles, each with a world pose."""

    workpiece: Optional[TriMesh]
    workpiece_pose: Pose = field(default_factory=Pose)
    static_obstacles: Sequence[tuple[TriMesh, Pose]] = ()

    def __post_init__(self):
        self._world_accel: Optional[MeshAccelerator] = None
        self._world_empty: Optional[bool] = None

    def meshes(self):
        if self.workpiece is not None:
            yield self.workpiece, self.workpiece_pose
        for mesh, pose in self.static_obstacles:
            yield mesh, pose

    def world_accelerator(self) -> Optional[MeshAccelerator]:
        """BVH over every scene triangle posed into world frame (None if no geometry)."""
        if self._world_empty is None:
            soups = [m.transformed(p) for m, p in self.meshes() if not m.is_empty]
            if not soups:
                self._world_empty = True
            else:
                verts = []
                tris = []
                off = 0
                for s in soups:
                    verts.append(s.vertices)
                    tris.append(s.triangles + off)
                    off += len(s.vertices)
                merged = TriMesh(np.vstack(verts), np.vstack(tris))
                self._world_accel = MeshAccelerator(merged)
                self._world_empty = False
        return None if self._world_empty else self._world_accel


_NO_TRIS = (
    np.zeros((1, 3)),
    np.zeros((1, 3)),
    np.zeros((1, 3)),
    np.zeros((1, 3)),
    np.zeros((1, 3)),
    np.array([-1], dtype=np.int32),
    np.array([-1], dtype=np.int32),
    np.array([0], dtype=np.int32),
    np.array([0], dtype=np.int32),
    np.array([0], dtype=np.int32),
)


def scene_kernel_args(scene: Optional[Scene]):
    """(tri/bvh arrays..., has_scene) tuple for the numba kernels."""
    accel = scene.world_accelerator() if scene is not None else None
    if accel is None:
        return (*_NO_TRIS, False)
    return (*accel._args(), True)


def robot_collides(robot: "RobotModel", q, scene: Optional[Scene]) -> bool:
    """True iff any posed link capsule hits the scene or a non-adjacent link."""
    arrays = robot.kernel_arrays()
    qv = robot.validate_joint_vector(q)
    n = len(robot.joints)
    link_R = np.empty((n, 3, 3))
    link_t = np.empty((n, 3))
    kernels.fk_links(arrays.base_R, arrays.base_t, arrays.pt_R, arrays.pt_t, arrays.axes, qv, link_R, link_t)
    return bool(
        kernels.config_collides(
            link_R,
            link_t,
            arrays.caps_a,
            arrays.caps_b,
            arrays.caps_r,
            arrays.caps_start,
            *scene_kernel_args(scene),
        )
    )
