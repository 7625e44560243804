"""Command-line entry points: compute, stats, oracle, serve, ik-check.

Exit codes: 0 success, 1 user error (bad arguments, bad files, failed oracle
gate), 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from dataclasses import replace
from pathlib import Path

import numpy as np

from .collision import robot_collides
from .kinematics import solve_ik
from .mapstore import MapSetParseError, read_map_set, write_map_set
from .reachability import (
    dense_reference_sweep,
    derive_grid,
    map_stats,
    select_active_voxels,
    sweep_reachability,
)
from .scenario import Scenario, WorkpieceConfig, config_pose, load_scenario


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def default_threads() -> int:
    env = os.environ.get("REACHVOX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"REACHVOX_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _build_parser() -> _Parser:
    p = _Parser(prog="reachvox", description="Voxel reachability maps around a workpiece")
    sub = p.add_subparsers(dest="command", required=True)

    def add_scenario_flags(sp):
        sp.add_argument("--scenario", required=True, help="scenario JSON path")
        sp.add_argument("--steps", help="override schedule, e.g. 30,20,12,10,8 (degrees)")
        sp.add_argument("--voxel-size", type=float, help="override voxel edge length (m)")
        sp.add_argument("--band", type=float, help="override active band (m)")

    sp = sub.add_parser("compute", help="sweep every crane config and write a map set")
    add_scenario_flags(sp)
    sp.add_argument("--out", required=True, help="output .rvox path")
    sp.add_argument("--threads", type=int, help="worker threads (default: hardware parallelism)")
    sp.set_defaults(func=_cmd_compute)

    sp = sub.add_parser("stats", help="print per-config stats of a map set")
    sp.add_argument("--maps", required=True, help=".rvox path")
    sp.set_defaults(func=_cmd_stats)

    sp = sub.add_parser("oracle", help="compare the sweep against the brute-force reference")
    add_scenario_flags(sp)
    sp.add_argument("--threads", type=int, help="worker threads for the production sweep")
    sp.set_defaults(func=_cmd_oracle)

    sp = sub.add_parser("serve", help="serve maps and live IK checks over HTTP")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--maps", required=True)
    sp.add_argument("--port", type=int, default=8080)
    sp.set_defaults(func=_cmd_serve)

    sp = sub.add_parser("ik-check", help="one-shot IK + collision query")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--target", required=True, help="x,y,z in meters")
    sp.add_argument("--rot", type=int, default=0)
    sp.add_argument("--height", type=int, default=0)
    sp.set_defaults(func=_cmd_ik_check)

    return p


def _load_with_overrides(args) -> Scenario:
    scn = load_scenario(args.scenario)
    if getattr(args, "steps", None):
        scn = replace(scn, schedule=tuple(float(s) for s in args.steps.split(",")))
    if getattr(args, "voxel_size", None):
        scn = replace(scn, voxel_size=args.voxel_size)
    if getattr(args, "band", None) is not None:
        scn = replace(scn, band=args.band)
    return scn


def _cmd_compute(args) -> int:
    scn = _load_with_overrides(args)
    threads = args.threads if args.threads else default_threads()
    print(f"computing {scn.crane.config_count} configs with schedule {list(scn.schedule)} "
          f"voxel={scn.voxel_size} band={scn.band} threads={threads}")

    def progress(cfg, rmap):
        active, reachable, frac = map_stats(rmap)
        print(
            f"  rot={cfg.rot_index} height={cfg.height_index}: active={active} "
            f"reachable={reachable} ({frac:.1%}) in {rmap.meta.sweep_seconds:.2f} s"
        )

    maps = scn.precompute(threads=threads, progress=progress)
    nbytes = write_map_set(args.out, scn.crane, maps)
    print(f"wrote {nbytes} bytes to {args.out}")
    return 0


def _cmd_stats(args) -> int:
    crane, maps = read_map_set(args.maps)
    print(f"crane: {crane.rotation_count} rotations x {crane.height_count} heights, "
          f"step {crane.rotation_step_deg} deg, height step {crane.height_step} m")
    print(f"{'rot':>4} {'height':>6} {'active':>8} {'reachable':>9} {'fraction':>8}")
    for rot in range(crane.rotation_count):
        for height in range(crane.height_count):
            active, reachable, frac = map_stats(maps[WorkpieceConfig(rot, height)])
            print(f"{rot:>4} {height:>6} {active:>8} {reachable:>9} {frac:>8.1%}")
    return 0


def _cmd_oracle(args) -> int:
    scn = _load_with_overrides(args)
    threads = args.threads if args.threads else default_threads()
    cfg = WorkpieceConfig(0, 0)
    pose = config_pose(scn.crane, cfg)
    lo, hi = scn.workpiece.transformed(pose).bounds()
    grid = derive_grid(lo, hi, scn.voxel_size, scn.band)
    active = select_active_voxels(grid, scn.workpiece, pose, scn.band)
    scene = scn.scene_for(cfg)

    swept = sweep_reachability(
        scn.robot, scene, active, grid, scn.schedule,
        half_space_restricted=scn.half_space_restricted, threads=threads,
    )
    reference = dense_reference_sweep(
        scn.robot, scene, active, grid, scn.schedule,
        half_space_restricted=scn.half_space_restricted,
    )
    agree = sum(1 for c in swept.status if swept.status[c] == reference.status[c])
    total = len(swept.status)
    pct = agree / total if total else 1.0
    print(f"config rot=0 height=0: {agree}/{total} active voxels agree ({pct:.2%}) "
          f"across {swept.meta.configs_tested} configurations")
    return 0 if pct >= 0.99 else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    scn = load_scenario(args.scenario)
    crane, maps = read_map_set(args.maps)
    if (crane.rotation_count, crane.height_count) != (scn.crane.rotation_count, scn.crane.height_count):
        raise ValueError(
            f"map set is {crane.rotation_count}x{crane.height_count} but scenario wants "
            f"{scn.crane.rotation_count}x{scn.crane.height_count}"
        )
    static = os.environ.get("REACHVOX_STATIC")
    static_dir = Path(static) if static else Path.cwd() / "frontend" / "dist"
    app = create_app(scn, maps, static_dir if static_dir.is_dir() else None)
    if static_dir.is_dir():
        print(f"serving viewer from {static_dir}")
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="warning")
    return 0


def _cmd_ik_check(args) -> int:
    scn = load_scenario(args.scenario)
    try:
        target = [float(v) for v in args.target.split(",")]
    except ValueError:
        raise ValueError(f"--target must be x,y,z, got {args.target!r}")
    if len(target) != 3:
        raise ValueError(f"--target must have 3 components, got {len(target)}")
    cfg = WorkpieceConfig(args.rot, args.height)
    arrays = scn.robot.kernel_arrays()
    seed = np.clip(np.zeros(len(scn.robot.joints)), arrays.limits_lo, arrays.limits_hi)
    result = solve_ik(scn.robot, target, seed, max_iters=300, tolerance=0.005)
    collides = robot_collides(scn.robot, result.joints, scn.scene_for(cfg))
    print(json.dumps({
        "reachable": result.success,
        "collides": bool(collides),
        "joints": [float(v) for v in result.joints],
        "residual": result.residual,
        "iterations": result.iterations,
    }))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(parser.format_usage(), file=sys.stderr, end="")
        print(f"reachvox: error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ValueError, OSError, MapSetParseError) as exc:
        print(f"reachvox: error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
