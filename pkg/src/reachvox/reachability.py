"""Voxel classification core: active-band selection and the configuration sweep.

A voxel is Reachable iff at least one enumerated configuration puts the
tooltip inside its cell without any robot/scene or robot self collision;
every other active voxel is Blocked. Green is absorbing, so the result is the
OR of an order-free predicate over configurations: enumeration order, thread
count, and conservative pruning cannot change the map.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .collision import Scene, TriMesh, robot_collides, scene_kernel_args
from .geometry import Pose
from .kinematics import RobotModel

_COUNT_SLOP = 1e-9  # absorbs degree<->radian round-trip noise in span/step


class Status(IntEnum):
    BLOCKED = 0
    REACHABLE = 1


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Axis-aligned grid of cubic cells; origin is the corner of cell (0,0,0)."""

    origin: np.ndarray
    cell_size: float
    dims: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))
        object.__setattr__(self, "cell_size", float(self.cell_size))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.cell_size > 0:
            raise ValueError("cell_size must be > 0")
        if any(d < 1 for d in self.dims):
            raise ValueError(f"grid dims must all be >= 1, got {self.dims}")

    @property
    def num_cells(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2]

    def centers(self) -> np.ndarray:
        """(num_cells, 3) cell centers in C order (i fastest-varying last)."""
        axes = [self.origin[k] + (np.arange(self.dims[k]) + 0.5) * self.cell_size for k in range(3)]
        gi, gj, gk = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([gi.ravel(), gj.ravel(), gk.ravel()])

    def cell_lower(self, coord) -> np.ndarray:
        return self.origin + np.asarray(coord, dtype=float) * self.cell_size

    def contains_coord(self, coord) -> bool:
        return all(0 <= c < d for c, d in zip(coord, self.dims))

    def voxel_of_point(self, p) -> Optional[tuple[int, int, int]]:
        """Cell containing p, or None when outside. Boundary points go to the higher cell."""
        p = np.asarray(p, dtype=float).reshape(3)
        idx = np.floor((p - self.origin) / self.cell_size).astype(int)
        if (idx < 0).any() or (idx >= np.asarray(self.dims)).any():
            return None
        return int(idx[0]), int(idx[1]), int(idx[2])


def voxel_of_point(grid: VoxelGrid, p) -> Optional[tuple[int, int, int]]:
    return grid.voxel_of_point(p)


@dataclass(frozen=True)
class SweepMeta:
    configs_tested: int
    sweep_seconds: float
    step_schedule_deg: tuple[float, ...]


@dataclass(eq=False)
class ReachabilityMap:
    grid: VoxelGrid
    status: dict[tuple[int, int, int], Status]
    meta: Optional[SweepMeta] = None


def maps_equal(a: ReachabilityMap, b: ReachabilityMap) -> bool:
    """Content equality: same grid geometry and identical per-voxel statuses."""
    return (
        np.array_equal(a.grid.origin, b.grid.origin)
        and a.grid.cell_size == b.grid.cell_size
        and a.grid.dims == b.grid.dims
        and a.status == b.status
    )


def map_stats(rmap: ReachabilityMap) -> tuple[int, int, float]:
    """(active voxels, reachable voxels, reachable fraction; 0 when empty)."""
    active = len(rmap.status)
    reachable = sum(1 for s in rmap.status.values() if s == Status.REACHABLE)
    return active, reachable, (reachable / active if active else 0.0)


# ---------------------------------------------------------------------------
# active band


def select_active_voxels(grid: VoxelGrid, workpiece: TriMesh, workpiece_pose: Pose, band: float) -> set[tuple[int, int, int]]:
    """Cells whose center is within band + cell*sqrt(3)/2 of the posed workpiece surface."""
    if band < 0:
        raise ValueError("band must be >= 0")
    if workpiece is None or workpiece.is_empty:
        raise ValueError("active-voxel selection needs a non-empty workpiece mesh")
    cutoff = band + grid.cell_size * math.sqrt(3.0) / 2.0
    centers = grid.centers()
    rot = workpiece_pose.rotation_matrix()
    local = (centers - workpiece_pose.t) @ rot  # rows become R^T (c - t)
    mask = np.zeros(len(local), dtype=np.bool_)
    kernels.active_centers_mask(np.ascontiguousarray(local), cutoff, *workpiece.accelerator()._args(), mask)
    coords = np.argwhere(mask.reshape(grid.dims))
    return {(int(i), int(j), int(k)) for i, j, k in coords}


def derive_grid(bounds_min, bounds_max, cell_size: float, band: float) -> VoxelGrid:
    """Grid covering an AABB inflated enough to hold every possible active cell."""
    pad = band + cell_size * (math.sqrt(3.0) / 2.0 + 1.0)
    lo = np.asarray(bounds_min, dtype=float) - pad
    hi = np.asarray(bounds_max, dtype=float) + pad
    dims = np.maximum(np.ceil((hi - lo) / cell_size - 1e-12).astype(int), 1)
    return VoxelGrid(lo, cell_size, (int(dims[0]), int(dims[1]), int(dims[2])))


# ---------------------------------------------------------------------------
# enumeration


def normalize_schedule(robot: RobotModel, schedule: Sequence[float]) -> tuple[float, ...]:
    steps = tuple(float(s) for s in schedule)
    if len(steps) != robot.enumerated_count:
        raise ValueError(f"schedule has {len(steps)} steps for {robot.enumerated_count} enumerated joints")
    if any(not s > 0 for s in steps):
        raise ValueError("schedule steps must all be > 0")
    return steps


def _joint_windows(robot: RobotModel, steps: tuple[float, ...], half_space_restricted: bool, bearing_deg: float):
    """Per enumerated joint: (start_deg, step_deg, count, hi_deg)."""
    windows = []
    enumerated = robot.joints[: robot.enumerated_count]
    for idx, (spec, step) in enumerate(zip(enumerated, steps)):
        lo_deg = math.degrees(spec.limits[0])
        hi_deg = math.degrees(spec.limits[1])
        span = hi_deg - lo_deg
        start = lo_deg
        if idx == 0 and half_space_restricted and span > 180.0:
            start = min(max(bearing_deg - 90.0, lo_deg), hi_deg - 180.0)
            span = 180.0
        count = int(math.floor(span / step + _COUNT_SLOP)) + 1
        windows.append((start, step, count, hi_deg))
    return windows


def enumeration_count(robot: RobotModel, schedule: Sequence[float], half_space_restricted: bool = False) -> int:
    """Number of configurations a sweep visits: product of per-joint grid sizes.

    Each enumerated joint contributes floor(span/step) + 1 values (both
    endpoints on the grid); the base joint's span is capped at 180 degrees
    when the sweep is restricted to the workpiece-facing half-space.
    """
    steps = normalize_schedule(robot, schedule)
    total = 1
    for _, _, count, _ in _joint_windows(robot, steps, half_space_restricted, 0.0):
        total *= count
    return total


def half_space_bearing_deg(robot: RobotModel, scene: Optional[Scene]) -> float:
    """Bearing of the posed workpiece centroid in the base joint's rotation plane."""
    if scene is None or scene.workpiece is None or scene.workpiece.is_empty:
        return 0.0
    lo, hi = scene.workpiece.transformed(scene.workpiece_pose).bounds()
    centroid = (lo + hi) / 2.0
    frame = robot.base_pose @ robot.joints[0].parent_transform
    v = frame.rotation_matrix().T @ (centroid - frame.t)
    axis = robot.joints[0].axis
    v_perp = v - (v @ axis) * axis
    if np.linalg.norm(v_perp) < 1e-9:
        return 0.0
    e = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = e - (e @ axis) * axis
    u /= np.linalg.norm(u)
    w = np.cross(axis, u)
    return math.degrees(math.atan2(v_perp @ w, v_perp @ u))


def _enumeration_values(robot: RobotModel, steps, half_space_restricted, bearing_deg):
    """(values_rad padded (E, max_count), counts (E,)) for the kernels."""
    windows = _joint_windows(robot, steps, half_space_restricted, bearing_deg)
    counts = np.array([c for _, _, c, _ in windows], dtype=np.int64)
    values = np.zeros((len(windows), int(counts.max())), dtype=np.float64)
    for row, (start, step, count, hi_deg) in enumerate(windows):
        deg = np.minimum(start + step * np.arange(count), hi_deg)
        values[row, :count] = np.radians(deg)
    return values, counts


# ---------------------------------------------------------------------------
# sweeps


def _prepare_active(grid: VoxelGrid, active: Iterable[tuple[int, int, int]]):
    coords = sorted((int(i), int(j), int(k)) for i, j, k in active)
    mask = np.zeros(grid.num_cells, dtype=np.bool_)
    d0, d1, d2 = grid.dims
    for c in coords:
        if not grid.contains_coord(c):
            raise ValueError(f"active voxel {c} outside grid dims {grid.dims}")
        mask[(c[0] * d1 + c[1]) * d2 + c[2]] = True
    if coords:
        lowers = np.array([grid.cell_lower(c) for c in coords])
        amin = lowers.min(axis=0)
        amax = lowers.max(axis=0) + grid.cell_size
    else:
        amin = np.zeros(3)
        amax = np.zeros(3)
    return coords, mask, amin, amax


def sweep_reachability(
    robot: RobotModel,
    scene: Optional[Scene],
    active: Iterable[tuple[int, int, int]],
    grid: VoxelGrid,
    schedule: Sequence[float],
    half_space_restricted: bool = False,
    threads: int = 1,
    prune: bool = True,
) -> ReachabilityMap:
    """Hierarchically enumerate configurations and classify the active voxels.

    Workers partition the outermost joint's values and accumulate private
    green sets that merge by OR, so the map is independent of thread count.
    ``prune=False`` runs the same enumeration densely (no subtree skipping);
    it must and does produce an identical map.
    """
    t_start = time.perf_counter()
    steps = normalize_schedule(robot, schedule)
    configs_tested = enumeration_count(robot, steps, half_space_restricted)
    coords, mask, amin, amax = _prepare_active(grid, active)
    arrays = robot.kernel_arrays()

    if not coords:
        meta = SweepMeta(configs_tested, time.perf_counter() - t_start, steps)
        return ReachabilityMap(grid, {}, meta)

    bearing = half_space_bearing_deg(robot, scene) if half_space_restricted else 0.0
    values, counts = _enumeration_values(robot, steps, half_space_restricted, bearing)
    scene_args = scene_kernel_args(scene)
    dims_arr = np.asarray(grid.dims, dtype=np.int64)

    def run_range(o_lo: int, o_hi: int, green: np.ndarray) -> int:
        return kernels.sweep_range(
            o_lo,
            o_hi,
            values,
            counts,
            arrays.base_R,
            arrays.base_t,
            arrays.pt_R,
            arrays.pt_t,
            arrays.axes,
            arrays.tail_R,
            arrays.tail_t,
            arrays.tip_local,
            arrays.caps_a,
            arrays.caps_b,
            arrays.caps_r,
            arrays.caps_start,
            *scene_args,
            grid.origin,
            grid.cell_size,
            dims_arr,
            mask,
            green,
            arrays.tail_reach,
            amin,
            amax,
            prune,
        )

    outer = int(counts[0])
    workers = max(1, min(int(threads), outer))
    if workers == 1:
        green = np.zeros(grid.num_cells, dtype=np.bool_)
        leaves = run_range(0, outer, green)
    else:
        bounds = np.linspace(0, outer, workers + 1).astype(int)
        greens = [np.zeros(grid.num_cells, dtype=np.bool_) for _ in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(run_range, int(bounds[w]), int(bounds[w + 1]), greens[w]) for w in range(workers)]
            leaves = sum(f.result() for f in futs)
        green = np.logical_or.reduce(greens)

    if not prune and leaves != configs_tested:
        raise AssertionError(f"dense sweep visited {leaves} configurations, formula says {configs_tested}")

    d1, d2 = grid.dims[1], grid.dims[2]
    status = {
        c: (Status.REACHABLE if green[(c[0] * d1 + c[1]) * d2 + c[2]] else Status.BLOCKED) for c in coords
    }
    meta = SweepMeta(configs_tested, time.perf_counter() - t_start, steps)
    return ReachabilityMap(grid, status, meta)


# ---------------------------------------------------------------------------
# independent reference sweep (vectorized numpy FK, public collision checks)


def _fk_tips_numpy(robot: RobotModel, Q: np.ndarray) -> np.ndarray:
    """Batch tooltip positions via matrix composition; shares no code with the kernels."""
    arrays = robot.kernel_arrays()
    B = Q.shape[0]
    R = np.broadcast_to(arrays.base_R, (B, 3, 3)).copy()
    t = np.broadcast_to(arrays.base_t, (B, 3)).copy()
    eye = np.eye(3)
    for l in range(len(robot.joints)):
        t = t + np.einsum("bij,j->bi", R, arrays.pt_t[l])
        R = np.einsum("bij,jk->bik", R, arrays.pt_R[l])
        ax = arrays.axes[l]
        K = np.array([[0, -ax[2], ax[1]], [ax[2], 0, -ax[0]], [-ax[1], ax[0], 0]])
        ang = Q[:, l]
        s = np.sin(ang)[:, None, None]
        c = np.cos(ang)[:, None, None]
        Rax = eye[None, :, :] + s * K[None, :, :] + (1 - c) * (K @ K)[None, :, :]
        R = np.einsum("bij,bjk->bik", R, Rax)
    return t + np.einsum("bij,j->bi", R, arrays.tool_t)


def dense_reference_sweep(
    robot: RobotModel,
    scene: Optional[Scene],
    active: Iterable[tuple[int, int, int]],
    grid: VoxelGrid,
    schedule: Sequence[float],
    half_space_restricted: bool = False,
) -> ReachabilityMap:
    """Brute-force sweep used as the oracle for the hierarchical engine.

    Enumerates the identical configuration grid but evaluates every
    configuration with straightforward numpy FK plus per-configuration
    public collision checks.
    """
    t_start = time.perf_counter()
    steps = normalize_schedule(robot, schedule)
    configs_tested = enumeration_count(robot, steps, half_space_restricted)
    coords, mask, _, _ = _prepare_active(grid, active)
    meta_schedule = steps

    if not coords:
        return ReachabilityMap(grid, {}, SweepMeta(configs_tested, time.perf_counter() - t_start, meta_schedule))

    bearing = half_space_bearing_deg(robot, scene) if half_space_restricted else 0.0
    values, counts = _enumeration_values(robot, steps, half_space_restricted, bearing)
    grids = np.meshgrid(*[values[i, : counts[i]] for i in range(len(counts))], indexing="ij")
    all_q = np.column_stack([g.ravel() for g in grids])
    assert all_q.shape[0] == configs_tested

    arrays = robot.kernel_arrays()
    pinned = np.broadcast_to(arrays.pinned_tail, (all_q.shape[0], arrays.pinned_tail.shape[0]))
    full_q = np.hstack([all_q, pinned]) if pinned.shape[1] else all_q

    has_capsules = arrays.caps_a.shape[0] > 0
    d1, d2 = grid.dims[1], grid.dims[2]
    green = np.zeros(grid.num_cells, dtype=bool)
    dims = np.asarray(grid.dims)

    chunk = 65536
    for ofs in range(0, full_q.shape[0], chunk):
        qs = full_q[ofs : ofs + chunk]
        tips = _fk_tips_numpy(robot, qs)
        cells = np.floor((tips - grid.origin) / grid.cell_size).astype(np.int64)
        inside = np.all((cells >= 0) & (cells < dims), axis=1)
        flats = (cells[:, 0] * d1 + cells[:, 1]) * d2 + cells[:, 2]
        for row in np.flatnonzero(inside):
            flat = flats[row]
            if mask[flat] and not green[flat]:
                if not has_capsules or not robot_collides(robot, qs[row], scene):
                    green[flat] = True

    status = {c: (Status.REACHABLE if green[(c[0] * d1 + c[1]) * d2 + c[2]] else Status.BLOCKED) for c in coords}
    return ReachabilityMap(grid, status, SweepMeta(configs_tested, time.perf_counter() - t_start, meta_schedule))
