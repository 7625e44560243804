import math
from fractions import Fraction

import numpy as np
import pytest

from reachvox import (
    Pose,
    Scene,
    Status,
    VoxelGrid,
    dense_reference_sweep,
    distance_point_mesh,
    enumeration_count,
    map_stats,
    maps_equal,
    reach_envelope,
    select_active_voxels,
    sweep_reachability,
    voxel_of_point,
)
from reachvox.reachability import derive_grid
from reachvox.shapes import box_mesh

from conftest import planar_robot, planar_tip_oracle


def arm_64():
    return planar_robot([0.6, 0.4])


def plane_grid(half_extent=1.05, cell=0.05):
    n = round(2 * half_extent / cell)
    return VoxelGrid(np.array([-half_extent, -half_extent, -cell / 2]), cell, (n, n, 1))


def all_cells(grid):
    return {(i, j, k) for i in range(grid.dims[0]) for j in range(grid.dims[1]) for k in range(grid.dims[2])}


class TestVoxelOfPoint:
    def test_origin_cell(self):
        grid = VoxelGrid(np.array([0.2, -0.4, 1.0]), 0.1, (4, 4, 4))
        assert voxel_of_point(grid, grid.origin) == (0, 0, 0)

    def test_boundary_goes_to_higher_cell(self):
        # exactly representable coordinates so the boundary lands exactly
        grid = VoxelGrid(np.array([0.25, -0.5, 1.0]), 0.25, (4, 4, 4))
        p = grid.origin + grid.cell_size * np.array([1.0, 1.0, 1.0])
        assert voxel_of_point(grid, p) == (1, 1, 1)

    def test_outside_marker(self):
        grid = VoxelGrid(np.zeros(3), 0.1, (4, 4, 4))
        assert voxel_of_point(grid, [1.0, 0.0, 0.0]) is None
        assert voxel_of_point(grid, [0.4, 0.0, 0.0]) is None  # upper boundary is outside

    def test_matches_scalar_floor_oracle(self):
        rng = np.random.default_rng(2)
        grid = VoxelGrid(np.array([-1.0, 0.5, -2.0]), 0.07, (11, 9, 13))
        for _ in range(1000):
            p = rng.uniform(-3, 3, 3)
            expected = tuple(math.floor((p[i] - grid.origin[i]) / grid.cell_size) for i in range(3))
            inside = all(0 <= expected[i] < grid.dims[i] for i in range(3))
            assert voxel_of_point(grid, p) == (expected if inside else None)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            VoxelGrid(np.zeros(3), 0.0, (2, 2, 2))
        with pytest.raises(ValueError):
            VoxelGrid(np.zeros(3), 0.1, (0, 2, 2))


class TestSelectActiveVoxels:
    def test_unit_cube_centered_3x3x3(self):
        # oracle: brute-force distance at all 27 centers against the stated rule
        cube = box_mesh([0, 0, 0], [1, 1, 1])
        grid = VoxelGrid(np.array([-0.75, -0.75, -0.75]), 0.5, (3, 3, 3))
        cutoff = 0.0 + 0.5 * math.sqrt(3) / 2
        expected = set()
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    center = grid.origin + (np.array([i, j, k]) + 0.5) * 0.5
                    if distance_point_mesh(center, cube) <= cutoff:
                        expected.add((i, j, k))
        got = select_active_voxels(grid, cube, Pose(), band=0.0)
        assert got == expected
        assert (1, 1, 1) not in got  # center cell: 0.5 m inside > cutoff
        assert len(got) == 26

    def test_huge_band_activates_everything(self):
        cube = box_mesh([0, 0, 0], [0.2, 0.2, 0.2])
        grid = VoxelGrid(np.array([-1.0, -1.0, -1.0]), 0.25, (8, 8, 8))
        active = select_active_voxels(grid, cube, Pose(), band=100.0)
        assert active == all_cells(grid)

    def test_far_grid_is_empty(self):
        cube = box_mesh([50, 50, 50], [0.2, 0.2, 0.2])
        grid = VoxelGrid(np.array([-1.0, -1.0, -1.0]), 0.25, (8, 8, 8))
        assert select_active_voxels(grid, cube, Pose(), band=0.1) == set()

    def test_band_validation(self):
        cube = box_mesh([0, 0, 0], [1, 1, 1])
        grid = VoxelGrid(np.zeros(3), 0.5, (2, 2, 2))
        with pytest.raises(ValueError):
            select_active_voxels(grid, cube, Pose(), band=-0.1)

    def test_empty_mesh_rejected(self):
        from reachvox import TriMesh

        grid = VoxelGrid(np.zeros(3), 0.5, (2, 2, 2))
        empty = TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))
        with pytest.raises(ValueError):
            select_active_voxels(grid, empty, Pose(), band=0.1)
        with pytest.raises(ValueError):
            select_active_voxels(grid, None, Pose(), band=0.1)


class TestEnumerationCount:
    def test_paper_schedule_products(self):
        # oracle: exact integer products of floor(span/step)+1 per joint
        robot = planar_robot([0.2] * 5, steps=[30, 20, 12, 10, 8])
        per_joint = [int(Fraction(360, 1) / Fraction(s)) + 1 for s in (30, 20, 12, 10, 8)]
        assert per_joint == [13, 19, 31, 37, 46]
        expected = math.prod(per_joint)
        assert enumeration_count(robot, [30, 20, 12, 10, 8], False) == expected

        half_base = int(Fraction(180, 1) / Fraction(30)) + 1
        assert half_base == 7
        expected_half = math.prod([half_base] + per_joint[1:])
        assert enumeration_count(robot, [30, 20, 12, 10, 8], True) == expected_half

    def test_single_joint_quarter_range(self):
        robot = planar_robot([0.2, 0.2], steps=[30, 30], limits_deg=(0, 90))
        # joint spans 90 deg at 30 deg steps: 0, 30, 60, 90
        assert enumeration_count(robot, [30, 120], False) == 4 * (90 // 120 + 1)

    def test_schedule_mismatch(self):
        robot = planar_robot([0.2, 0.2])
        with pytest.raises(ValueError):
            enumeration_count(robot, [30, 20, 12], False)
        with pytest.raises(ValueError):
            enumeration_count(robot, [30, -1], False)

    def test_half_space_noop_for_small_span(self):
        robot = planar_robot([0.2, 0.2], steps=[10, 10], limits_deg=(-60, 60))
        assert enumeration_count(robot, [10, 10], True) == enumeration_count(robot, [10, 10], False)


class TestSweep:
    def test_empty_active_returns_meta_only(self):
        robot = arm_64()
        grid = plane_grid()
        rmap = sweep_reachability(robot, Scene(None), set(), grid, [10, 10])
        assert rmap.status == {}
        assert rmap.meta.configs_tested == enumeration_count(robot, [10, 10], False)

    def test_active_outside_grid_rejected(self):
        robot = arm_64()
        grid = plane_grid()
        with pytest.raises(ValueError):
            sweep_reachability(robot, Scene(None), {(99, 0, 0)}, grid, [10, 10])

    def test_dense_kernel_and_reference_agree_with_pruned(self):
        robot = planar_robot([0.5, 0.3], capsule_radius=0.03)
        grid = plane_grid(0.85)
        active = all_cells(grid)
        scene = Scene(box_mesh([0.55, 0.3, 0.0], [0.2, 0.2, 0.4]))
        pruned = sweep_reachability(robot, scene, active, grid, [6, 6], threads=1, prune=True)
        dense = sweep_reachability(robot, scene, active, grid, [6, 6], threads=1, prune=False)
        reference = dense_reference_sweep(robot, scene, active, grid, [6, 6])
        assert maps_equal(pruned, dense)
        assert maps_equal(pruned, reference)

    def test_thread_count_independence(self):
        robot = arm_64()
        grid = plane_grid()
        active = all_cells(grid)
        maps = [
            sweep_reachability(robot, Scene(None), active, grid, [3, 3], threads=t) for t in (1, 2, 5)
        ]
        assert maps_equal(maps[0], maps[1])
        assert maps_equal(maps[0], maps[2])

    def test_refinement_monotonicity(self):
        # halving every step keeps the coarse lattice as a subset
        robot = arm_64()
        grid = plane_grid()
        active = all_cells(grid)
        coarse = sweep_reachability(robot, Scene(None), active, grid, [8, 8])
        fine = sweep_reachability(robot, Scene(None), active, grid, [4, 4])
        for coord, status in coarse.status.items():
            if status == Status.REACHABLE:
                assert fine.status[coord] == Status.REACHABLE

    def test_obstacle_monotonicity_simple(self):
        robot = planar_robot([0.5, 0.3], capsule_radius=0.03)
        grid = plane_grid(0.85)
        active = all_cells(grid)
        free = sweep_reachability(robot, Scene(None), active, grid, [5, 5])
        walled = sweep_reachability(
            robot, Scene(None, Pose(), [(box_mesh([0.4, 0.0, 0.0], [0.1, 0.6, 0.4]), Pose())]),
            active, grid, [5, 5],
        )
        for coord, status in walled.status.items():
            if status == Status.REACHABLE:
                assert free.status[coord] == Status.REACHABLE

    def test_envelope_consistency(self):
        robot = arm_64()
        grid = plane_grid()
        active = all_cells(grid)
        rmap = sweep_reachability(robot, Scene(None), active, grid, [4, 4])
        limit = reach_envelope(robot)
        for (i, j, k), status in rmap.status.items():
            if status == Status.REACHABLE:
                lower = grid.cell_lower((i, j, k))
                nearest = np.maximum(lower, np.minimum(lower + grid.cell_size, 0.0))
                assert np.linalg.norm(nearest) <= limit + 1e-9

    def test_identical_runs_identical_maps(self):
        robot = arm_64()
        grid = plane_grid()
        active = all_cells(grid)
        a = sweep_reachability(robot, Scene(None), active, grid, [5, 5])
        b = sweep_reachability(robot, Scene(None), active, grid, [5, 5])
        assert maps_equal(a, b)

    def test_map_stats(self):
        robot = arm_64()
        grid = plane_grid()
        rmap = sweep_reachability(robot, Scene(None), set(), grid, [10, 10])
        assert map_stats(rmap) == (0, 0, 0.0)
        rmap.status = {(0, 0, 0): Status.REACHABLE, (1, 0, 0): Status.BLOCKED}
        active, reachable, frac = map_stats(rmap)
        assert (active, reachable) == (2, 1)
        assert frac == pytest.approx(0.5)


class TestWalledScene:
    """Right half-plane blocked by a wall; left half matches a non-crossing oracle."""

    WALL_X = 0.55
    RADIUS = 0.03

    def setup_maps(self, step=3.0):
        robot = planar_robot([0.6, 0.4], capsule_radius=self.RADIUS)
        grid = plane_grid()
        active = all_cells(grid)
        wall = box_mesh([self.WALL_X, 0, 0], [0.02, 2.6, 0.6])
        free = sweep_reachability(robot, Scene(None), active, grid, [step, step])
        walled = sweep_reachability(robot, Scene(None, Pose(), [(wall, Pose())]), active, grid, [step, step])
        return robot, grid, free, walled

    def test_right_half_blocked(self):
        _, grid, _, walled = self.setup_maps()
        wall_max_x = self.WALL_X + 0.01
        for (i, j, k), status in walled.status.items():
            center_x = grid.origin[0] + (i + 0.5) * grid.cell_size
            if center_x > wall_max_x:
                assert status == Status.BLOCKED

    def test_left_half_matches_non_crossing_oracle(self):
        # oracle: rerun the enumeration with independent planar FK, keeping only
        # configurations whose arm stays strictly left of the wall
        _, grid, free, walled = self.setup_maps()
        wall_min_x = self.WALL_X - 0.01
        step = math.radians(3.0)
        values = [math.radians(-180) + k * step for k in range(int(360 / 3) + 1)]
        greens = set()
        for q1 in values:
            elbow = np.array([0.6 * math.cos(q1), 0.6 * math.sin(q1), 0.0])
            for q2 in values:
                tip = planar_tip_oracle([0.6, 0.4], [q1, q2])
                reach_x = max(0.0, elbow[0], tip[0]) + self.RADIUS
                if reach_x >= wall_min_x:
                    continue
                coord = grid.voxel_of_point(tip)
                if coord is not None:
                    greens.add(coord)
        for coord, status in walled.status.items():
            center_x = grid.origin[0] + (coord[0] + 0.5) * grid.cell_size
            if center_x + grid.cell_size / 2 < wall_min_x - self.RADIUS:
                assert (status == Status.REACHABLE) == (coord in greens), coord

    def test_walled_subset_of_free(self):
        _, _, free, walled = self.setup_maps()
        for coord, status in walled.status.items():
            if status == Status.REACHABLE:
                assert free.status[coord] == Status.REACHABLE


class TestDeriveGrid:
    def test_grid_covers_all_possible_active_cells(self):
        cube = box_mesh([0.3, -0.2, 0.6], [0.5, 0.4, 0.3])
        band = 0.05
        grid = derive_grid(*cube.bounds(), 0.05, band)
        active = select_active_voxels(grid, cube, Pose(), band)
        # no active voxel touches the grid boundary: the padding was sufficient
        for i, j, k in active:
            assert 0 < i < grid.dims[0] - 1
            assert 0 < j < grid.dims[1] - 1
            assert 0 < k < grid.dims[2] - 1
