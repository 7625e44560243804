"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""

import math
import struct
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from reachvox import (
    CraneSpec,
    MapSetParseError,
    Pose,
    ReachabilityMap,
    Scene,
    Status,
    TriMesh,
    VoxelGrid,
    WorkpieceConfig,
    dense_reference_sweep,
    enumeration_count,
    forward_kinematics,
    load_robot,
    load_scenario,
    maps_equal,
    read_map_set,
    solve_ik,
    sweep_reachability,
    write_map_set,
)
from reachvox.reachability import derive_grid, select_active_voxels
from reachvox.scenario import config_pose
from reachvox.shapes import box_mesh, merge_meshes

from conftest import DATA_DIR, planar_robot


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'}: {name} ({detail})")


def plane_grid_42():
    return VoxelGrid(np.array([-1.05, -1.05, -0.025]), 0.05, (42, 42, 1))


def all_cells(grid):
    return {(i, j, k) for i in range(grid.dims[0]) for j in range(grid.dims[1]) for k in range(grid.dims[2])}


def test_annulus_oracle():
    """>=99% agreement with the analytic annulus, boundary-only mismatches, <30 s."""
    robot = load_robot(DATA_DIR / "robots" / "planar2.json")
    grid = plane_grid_42()
    active = all_cells(grid)

    t0 = time.perf_counter()
    rmap = sweep_reachability(robot, Scene(None), active, grid, [1.0, 1.0], threads=1)
    elapsed = time.perf_counter() - t0

    inner, outer = 0.2, 1.0
    mismatches = 0
    off_boundary = 0
    for (i, j, _k), status in rmap.status.items():
        x0 = grid.origin[0] + i * grid.cell_size
        y0 = grid.origin[1] + j * grid.cell_size
        x1, y1 = x0 + grid.cell_size, y0 + grid.cell_size
        nx = min(max(0.0, x0), x1)
        ny = min(max(0.0, y0), y1)
        min_r = math.hypot(nx, ny)
        max_r = max(math.hypot(x, y) for x in (x0, x1) for y in (y0, y1))
        analytic = (min_r <= outer) and (max_r >= inner)
        if (status == Status.REACHABLE) != analytic:
            mismatches += 1
            crosses = (min_r <= inner <= max_r) or (min_r <= outer <= max_r)
            if not crosses:
                off_boundary += 1
    agreement = 1.0 - mismatches / len(rmap.status)
    ok = agreement >= 0.99 and off_boundary == 0 and elapsed < 30.0
    report(
        "annulus oracle",
        ok,
        f"agreement {agreement:.2%}, {mismatches} mismatches all on boundary={off_boundary == 0}, {elapsed:.2f} s",
    )
    assert agreement >= 0.99
    assert off_boundary == 0
    assert elapsed < 30.0


def twenty_triangle_scene() -> Scene:
    def tetra(center, scale):
        c = np.asarray(center, float)
        v = c + scale * np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]])
        return TriMesh(v, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])

    mesh = merge_meshes(
        [
            box_mesh([0.45, 0.30, 0.0], [0.16, 0.16, 0.40]),
            tetra([-0.30, 0.35, -0.10], 0.25),
            tetra([0.10, -0.50, -0.10], 0.30),
        ]
    )
    assert len(mesh) == 20
    return Scene(mesh)


def test_bruteforce_sweep_equivalence():
    """Pruned hierarchical sweep == unpruned dense sweep, exact set equality."""
    robot = planar_robot([0.4, 0.3, 0.2], steps=[30, 20, 12], capsule_radius=0.025)
    scene = twenty_triangle_scene()
    # grid offset from the tooltip lattice: 30-degree trig on 0.1-multiple links
    # puts some tooltips exactly on 0.05 boundaries, where the two FK
    # implementations' last-ulp differences would bin into different cells
    grid = VoxelGrid(np.array([-0.9517, -0.9523, -0.0251]), 0.05, (38, 38, 1))
    active = all_cells(grid)
    schedule = [30.0, 20.0, 12.0]

    pruned = sweep_reachability(robot, scene, active, grid, schedule, threads=1, prune=True)
    dense = sweep_reachability(robot, scene, active, grid, schedule, threads=1, prune=False)
    reference = dense_reference_sweep(robot, scene, active, grid, schedule)

    ok = maps_equal(pruned, dense) and maps_equal(pruned, reference)
    report(
        "brute-force sweep equivalence",
        ok,
        f"{len(active)} voxels, {pruned.meta.configs_tested} configs, pruned==dense=={maps_equal(pruned, dense)}, "
        f"==numpy reference=={maps_equal(pruned, reference)}",
    )
    assert maps_equal(pruned, dense)
    assert maps_equal(pruned, reference)


@pytest.mark.parametrize("name", ["annulus", "walled"])
def test_parallel_determinism(name, tmp_path):
    """1, 2, and 8 workers write byte-identical map files."""
    scn = load_scenario(DATA_DIR / "scenarios" / f"{name}.json")
    maps_by_threads = {t: {} for t in (1, 2, 8)}
    for cfg in scn.crane.configs():
        pose = config_pose(scn.crane, cfg)
        scene = Scene(scn.workpiece, pose, scn.static_obstacles)
        grid = derive_grid(*scn.workpiece.transformed(pose).bounds(), scn.voxel_size, scn.band)
        active = select_active_voxels(grid, scn.workpiece, pose, scn.band)
        for t in (1, 2, 8):
            maps_by_threads[t][cfg] = sweep_reachability(
                scn.robot, scene, active, grid, scn.schedule,
                half_space_restricted=scn.half_space_restricted, threads=t,
            )
    blobs = {}
    for t in (1, 2, 8):
        path = tmp_path / f"{name}_{t}.rvox"
        write_map_set(path, scn.crane, maps_by_threads[t])
        blobs[t] = path.read_bytes()
    ok = blobs[1] == blobs[2] == blobs[8]
    report(f"parallel determinism ({name})", ok, f"{len(blobs[1])} bytes x 3 worker counts")
    assert blobs[1] == blobs[2]
    assert blobs[1] == blobs[8]


def test_enumeration_count_law():
    """Sweep-reported configsTested equals the formula, incl. the paper schedule."""
    rng = np.random.default_rng(99)
    checked = 0
    for _ in range(20):
        n = int(rng.integers(2, 5))
        lengths = rng.uniform(0.1, 0.4, n)
        steps = rng.uniform(30.0, 120.0, n)
        robot = planar_robot(lengths, steps=list(steps))
        # randomize limits per joint by rebuilding specs
        from reachvox import JointSpec, RobotModel

        joints = []
        for spec in robot.joints:
            lo = float(rng.uniform(-math.pi, 0))
            hi = float(rng.uniform(0, math.pi))
            joints.append(JointSpec(spec.parent_transform, spec.axis, (lo, hi), spec.enum_step_deg, True))
        robot = RobotModel(robot.base_pose, tuple(joints), robot.link_capsules, robot.tool_offset)
        half = bool(rng.integers(0, 2))

        grid = VoxelGrid(np.array([-0.4, -0.4, -0.1]), 0.2, (4, 4, 1))
        active = {(0, 0, 0), (3, 3, 0)}
        scene = Scene(box_mesh([0.0, 0.0, -0.4], [0.5, 0.5, 0.1]))
        swept = sweep_reachability(robot, scene, active, grid, steps, half_space_restricted=half, threads=2)
        dense = sweep_reachability(robot, scene, active, grid, steps, half_space_restricted=half, prune=False)
        expected = enumeration_count(robot, steps, half)
        assert swept.meta.configs_tested == expected
        assert dense.meta.configs_tested == expected  # dense mode also counts visited leaves internally
        checked += 1

    # the five-joint +-180 paper schedule, frozen via an independent integer product
    robot5 = planar_robot([0.2] * 5, steps=[30, 20, 12, 10, 8])
    per_joint = [int(Fraction(360, 1) / Fraction(s)) + 1 for s in (30, 20, 12, 10, 8)]
    full_expected = math.prod(per_joint)
    half_expected = math.prod([int(Fraction(180, 1) / Fraction(30)) + 1] + per_joint[1:])
    got_full = enumeration_count(robot5, [30, 20, 12, 10, 8], False)
    got_half = enumeration_count(robot5, [30, 20, 12, 10, 8], True)
    ok = got_full == full_expected and got_half == half_expected and checked == 20
    report(
        "enumeration-count law",
        ok,
        f"20 randomized cases; paper schedule {got_full} unrestricted / {got_half} half-space "
        f"(products {'x'.join(map(str, per_joint))})",
    )
    assert got_full == full_expected
    assert got_half == half_expected


def test_obstacle_monotonicity():
    """Adding an obstacle never turns Blocked into Reachable; removal never the reverse."""
    rng = np.random.default_rng(123)
    grid = VoxelGrid(np.array([-0.9, -0.9, -0.025]), 0.05, (36, 36, 1))
    active = all_cells(grid)
    violations = 0
    for _ in range(50):
        lengths = [float(rng.uniform(0.3, 0.6)), float(rng.uniform(0.2, 0.4))]
        robot = planar_robot(lengths, capsule_radius=float(rng.uniform(0.02, 0.04)))
        base_obstacles = []
        for _ in range(int(rng.integers(0, 2))):
            base_obstacles.append((box_mesh(rng.uniform(-0.7, 0.7, 3) * [1, 1, 0], rng.uniform(0.08, 0.3, 3)), Pose()))
        extra = (box_mesh(rng.uniform(-0.7, 0.7, 3) * [1, 1, 0], rng.uniform(0.08, 0.3, 3)), Pose())

        without = sweep_reachability(robot, Scene(None, Pose(), base_obstacles), active, grid, [15, 15])
        with_extra = sweep_reachability(robot, Scene(None, Pose(), base_obstacles + [extra]), active, grid, [15, 15])

        for coord, status in with_extra.status.items():
            if status == Status.REACHABLE and without.status[coord] != Status.REACHABLE:
                violations += 1  # adding turned Blocked into Reachable
        for coord, status in without.status.items():
            if status == Status.BLOCKED and with_extra.status[coord] == Status.REACHABLE:
                violations += 1  # removing (reverse view) turned Reachable into Blocked
    report("obstacle monotonicity", violations == 0, f"50 scenes, {violations} violations")
    assert violations == 0


def test_desk_scale_36_config_run(tmp_path):
    """Bundled engine surrogate: 36 configs < 120 s at 8 workers, file round-trips."""
    scn = load_scenario(DATA_DIR / "scenarios" / "engine.json")
    assert scn.robot.enumerated_count == 5
    assert tuple(scn.schedule) == (45.0, 30.0, 20.0, 15.0, 12.0)
    assert scn.voxel_size == 0.05

    t0 = time.perf_counter()
    maps = scn.precompute(threads=8)
    elapsed = time.perf_counter() - t0

    out = tmp_path / "engine.rvox"
    nbytes = write_map_set(out, scn.crane, maps)
    crane2, maps2 = read_map_set(out)
    round_trip = (
        crane2.rotation_count == scn.crane.rotation_count
        and crane2.height_count == scn.crane.height_count
        and all(maps_equal(maps[cfg], maps2[cfg]) for cfg in maps)
    )
    ok = len(maps) == 36 and elapsed < 120.0 and round_trip
    report(
        "36-config desk-scale run",
        ok,
        f"{len(maps)} configs in {elapsed:.1f} s at 8 workers, {nbytes} bytes, exact round trip={round_trip}",
    )
    assert len(maps) == 36
    assert elapsed < 120.0
    assert round_trip


def test_ik_convergence():
    """500 FK targets: >=95% within 1 mm in <=300 iterations, zero limit violations."""
    robot = load_robot(DATA_DIR / "robots" / "ur10e_like.json")
    arrays = robot.kernel_arrays()
    lo, hi = arrays.limits_lo, arrays.limits_hi
    rng = np.random.default_rng(42)
    seed = np.zeros(len(robot.joints))

    successes = 0
    violations = 0
    for _ in range(500):
        q = rng.uniform(lo, hi)
        target = forward_kinematics(robot, q).tooltip
        res = solve_ik(robot, target, seed, max_iters=300, tolerance=1e-3)
        if res.success:
            successes += 1
            assert np.linalg.norm(forward_kinematics(robot, res.joints).tooltip - target) <= 1e-3
        if np.any(res.joints < lo - 1e-12) or np.any(res.joints > hi + 1e-12):
            violations += 1
    rate = successes / 500
    ok = rate >= 0.95 and violations == 0
    report("IK convergence", ok, f"{successes}/500 within 1 mm ({rate:.1%}), {violations} limit violations")
    assert rate >= 0.95
    assert violations == 0


def reference_file(tmp_path) -> Path:
    crane = CraneSpec(360.0, 1, 1, 0.1)
    grid = VoxelGrid(np.zeros(3), 0.05, (3, 3, 3))
    status = {(0, 0, 0): Status.REACHABLE, (1, 2, 0): Status.BLOCKED}
    path = tmp_path / "ref.rvox"
    write_map_set(path, crane, {WorkpieceConfig(0, 0): ReachabilityMap(grid, status, None)})
    return path


def test_format_robustness(tmp_path):
    """Randomized round trips are exact; 20 corruptions all raise parse errors."""
    rng = np.random.default_rng(7)
    for _ in range(10):
        rot = int(rng.integers(1, 4))
        height = int(rng.integers(1, 4))
        crane = CraneSpec(360.0 / rot, rot, height, float(rng.uniform(0.05, 0.3)))
        maps = {}
        for cfg in crane.configs():
            dims = tuple(int(d) for d in rng.integers(1, 8, 3))
            grid = VoxelGrid(rng.normal(size=3), float(rng.uniform(0.01, 0.2)), dims)
            status = {
                tuple(int(rng.integers(0, d)) for d in dims): Status(int(rng.integers(0, 2)))
                for _ in range(int(rng.integers(0, 30)))
            }
            maps[cfg] = ReachabilityMap(grid, status, None)
        path = tmp_path / "rt.rvox"
        write_map_set(path, crane, maps)
        crane2, maps2 = read_map_set(path)
        assert all(maps_equal(maps[cfg], maps2[cfg]) for cfg in maps)

    # layout of the reference file: 26-byte header, grid block at 26,
    # dims at 58, voxelCount at 70, records at 74 (13 bytes each)
    base = reference_file(tmp_path).read_bytes()

    def mutate(fn):
        data = bytearray(base)
        fn(data)
        return bytes(data)

    mutations = {
        "magic byte 0": mutate(lambda d: d.__setitem__(0, ord("X"))),
        "magic byte 3": mutate(lambda d: d.__setitem__(3, ord("!"))),
        "version 0": mutate(lambda d: struct.pack_into("<H", d, 4, 0)),
        "version 2": mutate(lambda d: struct.pack_into("<H", d, 4, 2)),
        "zero rotation count": mutate(lambda d: struct.pack_into("<H", d, 6, 0)),
        "zero height count": mutate(lambda d: struct.pack_into("<H", d, 8, 0)),
        "rotation law broken": mutate(lambda d: struct.pack_into("<d", d, 10, 123.0)),
        "height step NaN": mutate(lambda d: struct.pack_into("<d", d, 18, math.nan)),
        "truncated in magic": base[:3],
        "truncated in header": base[:20],
        "truncated in grid block": base[:40],
        "one byte short": base[:-1],
        "inflated voxel count": mutate(lambda d: struct.pack_into("<I", d, 70, 1000)),
        "deflated voxel count": mutate(lambda d: struct.pack_into("<I", d, 70, 1)),
        "status byte 2": mutate(lambda d: d.__setitem__(74 + 12, 2)),
        "coordinate out of range": mutate(lambda d: struct.pack_into("<i", d, 74, 77)),
        "negative coordinate": mutate(lambda d: struct.pack_into("<i", d, 74 + 13, -3)),
        "trailing garbage": base + b"\0\0\0",
        "zero cell size": mutate(lambda d: struct.pack_into("<d", d, 50, 0.0)),
        "zero dims": mutate(lambda d: struct.pack_into("<I", d, 58, 0)),
    }
    assert len(mutations) == 20
    failures = []
    for name, blob in mutations.items():
        path = tmp_path / "mut.rvox"
        path.write_bytes(blob)
        try:
            read_map_set(path)
            failures.append(name)
        except MapSetParseError:
            pass
    ok = not failures
    report("format robustness", ok, f"10 round trips exact, 20/20 corruptions rejected, leaked: {failures}")
    assert not failures
