"""HTTP API serving precomputed map sets plus live IK/collision queries.

Read endpoints are pure functions of the loaded scenario and map set; the
trial-attempt endpoint is the only mutating route and serializes per trial.
Every error body is ``{"code": <http status>, "message": <text>}``.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Mapping, Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .collision import robot_collides
from .kinematics import reach_envelope, robot_to_dict, solve_ik
from .reachability import ReachabilityMap
from .scenario import (
    Scenario,
    Trial,
    TrialStateError,
    WorkpieceConfig,
    submit_attempt,
)

IK_TOLERANCE = 0.005  # m; half the default voxel size so IK and map verdicts agree
IK_MAX_ITERS = 300


class IkCheckRequest(BaseModel):
    target: list[float] = Field(min_length=3, max_length=3)
    rot: int = 0
    height: int = 0


class AttemptRequest(BaseModel):
    rot: int
    height: int


def trial_to_dict(trial: Trial) -> dict:
    return {
        "id": trial.id,
        "difficulty": trial.difficulty.value,
        "maxAttempts": trial.max_attempts,
        "attemptsUsed": trial.attempts_used,
        "outcome": trial.outcome.value,
        "taskPoints": [
            {"position": [float(v) for v in tp.position], "label": tp.label} for tp in trial.task_points
        ],
    }


def create_app(
    scenario: Scenario,
    maps: Mapping[WorkpieceConfig, ReachabilityMap],
    static_dir: Optional[Path] = None,
) -> FastAPI:
    app = FastAPI(title="reachvox", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    crane = scenario.crane
    trials: dict[str, Trial] = {t.id: t for t in scenario.trials}
    locks: dict[str, threading.Lock] = {tid: threading.Lock() for tid in trials}

    def check_config(rot: int, height: int) -> WorkpieceConfig:
        if not (0 <= rot < crane.rotation_count) or not (0 <= height < crane.height_count):
            raise HTTPException(
                400,
                f"config rot={rot} height={height} outside "
                f"{crane.rotation_count}x{crane.height_count}",
            )
        return WorkpieceConfig(rot, height)

    @app.exception_handler(HTTPException)
    async def http_error(_req: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code, content={"code": exc.status_code, "message": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"code": 400, "message": f"malformed request: {exc.errors()}"})

    @app.exception_handler(Exception)
    async def internal_error(_req: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"code": 500, "message": f"internal error: {exc}"})

    @app.get("/api/scenario")
    def get_scenario():
        return {
            "name": scenario.name,
            "crane": {
                "rotationStepDeg": crane.rotation_step_deg,
                "rotationCount": crane.rotation_count,
                "heightCount": crane.height_count,
                "heightStep": crane.height_step,
                "basePose": crane.base_pose.to_dict(),
            },
            "grid": {"voxelSize": scenario.voxel_size, "band": scenario.band},
            "schedule": list(scenario.schedule),
            "halfSpaceRestricted": scenario.half_space_restricted,
            "robot": {**robot_to_dict(scenario.robot), "reachEnvelope": reach_envelope(scenario.robot)},
            "trials": [trial_to_dict(t) for t in scenario.trials],
        }

    @app.get("/api/map")
    def get_map(rot: int = 0, height: int = 0):
        cfg = check_config(rot, height)
        rmap = maps.get(cfg)
        if rmap is None:
            raise HTTPException(404, f"no map stored for rot={rot} height={height}")
        grid = rmap.grid
        return {
            "rot": rot,
            "height": height,
            "origin": [float(v) for v in grid.origin],
            "cellSize": grid.cell_size,
            "dims": list(grid.dims),
            "voxels": [[c[0], c[1], c[2], int(s)] for c, s in sorted(rmap.status.items())],
        }

    @app.post("/api/ik-check")
    def ik_check(body: IkCheckRequest):
        cfg = check_config(body.rot, body.height)
        robot = scenario.robot
        arrays = robot.kernel_arrays()
        seed = np.clip(np.zeros(len(robot.joints)), arrays.limits_lo, arrays.limits_hi)
        result = solve_ik(robot, body.target, seed, max_iters=IK_MAX_ITERS, tolerance=IK_TOLERANCE)
        scene = scenario.scene_for(cfg)
        collides = robot_collides(robot, result.joints, scene)
        return {
            "reachable": result.success,
            "collides": bool(collides),
            "joints": [float(v) for v in result.joints],
            "residual": result.residual,
            "iterations": result.iterations,
        }

    @app.post("/api/trial/{trial_id}/attempt")
    def trial_attempt(trial_id: str, body: AttemptRequest):
        trial = trials.get(trial_id)
        if trial is None:
            raise HTTPException(404, f"unknown trial {trial_id!r}")
        cfg = check_config(body.rot, body.height)
        with locks[trial_id]:
            try:
                trial, evaluation = submit_attempt(trial, maps, crane, cfg)
            except TrialStateError as exc:
                raise HTTPException(409, str(exc)) from exc
        return {
            "trial": trial_to_dict(trial),
            "evaluation": {
                "valid": evaluation.valid,
                "perPoint": [
                    {
                        "label": v.point.label,
                        "position": [float(x) for x in v.point.position],
                        "voxel": list(v.voxel) if v.voxel is not None else None,
                        "status": int(v.status),
                    }
                    for v in evaluation.per_point
                ],
            },
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="viewer")

    return app
