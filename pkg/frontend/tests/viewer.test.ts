// Viewer contract against the live service (annulus scenario, 9x4 crane).

import { describe, expect, it } from "vitest";

import { ApiError, Client } from "../src/api";
import { ArmView } from "../src/arm";
import { forwardKinematics, type Vec3 } from "../src/fk";
import { applyCraneAction, ViewState } from "../src/state";
import { VoxelCloud } from "../src/voxels";
import { BASE } from "./helpers";

const client = new Client(BASE);

describe("voxel rendering", () => {
  it("renders exactly the served voxel count for every config", async () => {
    const scenario = await client.scenario();
    const cloud = new VoxelCloud();
    for (let rot = 0; rot < scenario.crane.rotationCount; rot++) {
      for (let height = 0; height < scenario.crane.heightCount; height++) {
        const map = await client.map(rot, height);
        cloud.render(map);
        expect(cloud.sphereCount).toBe(map.voxels.length);
        expect(map.voxels.length).toBeGreaterThan(0);
      }
    }
  });

  it("uses 0.6 * cellSize sphere radius at 40% opacity, green/red by status", async () => {
    const map = await client.map(0, 0);
    const cloud = new VoxelCloud();
    cloud.render(map);
    const first = cloud.group.children[0] as import("three").Mesh<import("three").SphereGeometry, import("three").MeshLambertMaterial>;
    expect(first.scale.x).toBeCloseTo(0.6 * map.cellSize, 12);
    expect(first.material.opacity).toBeCloseTo(0.4, 12);
    const statuses = new Set(map.voxels.map((v) => v[3]));
    expect(statuses.has(0)).toBe(true);
    expect(statuses.has(1)).toBe(true);
  });

  it("re-renders with the new voxel set when the config changes", async () => {
    const a = await client.map(0, 0);
    const b = await client.map(0, 3); // plate lifted out of the arm plane
    const cloud = new VoxelCloud();
    cloud.render(a);
    const countA = cloud.sphereCount;
    cloud.render(b);
    expect(cloud.sphereCount).toBe(b.voxels.length);
    expect(countA).toBe(a.voxels.length);
  });
});

describe("crane controls", () => {
  it("wraps rotation 8 -> 0 and 0 -> 8 against the live service", async () => {
    const state = new ViewState(client);
    await state.load();
    state.config = { rot: 8, height: 0 };
    expect(await state.craneControl("rotateCW")).toBe(true);
    expect(state.config.rot).toBe(0);
    expect(state.map?.rot).toBe(0); // loaded map matches the current config
    expect(await state.craneControl("rotateCCW")).toBe(true);
    expect(state.config.rot).toBe(8);
    expect(state.map?.rot).toBe(8);
  });

  it("clamps height at the top and bottom with the buttons disabled", async () => {
    const state = new ViewState(client);
    await state.load();
    state.config = { rot: 0, height: 3 };
    expect(state.canRaise()).toBe(false);
    expect(await state.craneControl("raise")).toBe(false);
    expect(state.config.height).toBe(3);
    state.config = { rot: 0, height: 0 };
    expect(state.canLower()).toBe(false);
    expect(await state.craneControl("lower")).toBe(false);
    expect(state.config.height).toBe(0);
  });

  it("never leaves the valid range under arbitrary action sequences", () => {
    const actions = ["rotateCW", "rotateCCW", "raise", "lower"] as const;
    let cfg = { rot: 0, height: 0 };
    let seed = 12345;
    for (let n = 0; n < 500; n++) {
      seed = (seed * 1103515245 + 12345) & 0x7fffffff;
      cfg = applyCraneAction(cfg, actions[seed % 4], 9, 4);
      expect(cfg.rot).toBeGreaterThanOrEqual(0);
      expect(cfg.rot).toBeLessThan(9);
      expect(cfg.height).toBeGreaterThanOrEqual(0);
      expect(cfg.height).toBeLessThan(4);
    }
  });
});

describe("end effector", () => {
  it("client FK mirrors the server's kinematics for ik-check joints", async () => {
    const scenario = await client.scenario();
    const target: Vec3 = [0.45, 0.2, 0.0];
    const verdict = await client.ikCheck(target, 0, 0);
    expect(verdict.reachable).toBe(true);
    const tip = forwardKinematics(scenario.robot, verdict.joints).tooltip;
    const err = Math.hypot(tip[0] - target[0], tip[1] - target[1], tip[2] - target[2]);
    expect(err).toBeLessThanOrEqual(verdict.residual + 1e-6);
  });

  it("poses the arm view from returned joints", async () => {
    const scenario = await client.scenario();
    const arm = new ArmView(scenario.robot);
    expect(arm.capsuleCount).toBeGreaterThan(0); // display rods for capsule-less robots
    const verdict = await client.ikCheck([0.45, 0.2, 0.0], 0, 0);
    const tip = arm.pose(verdict.joints);
    expect(Math.hypot(tip[0] - 0.45, tip[1] - 0.2, tip[2])).toBeLessThanOrEqual(verdict.residual + 1e-6);
  });

  it("reports unreachable beyond the envelope", async () => {
    const scenario = await client.scenario();
    const far = scenario.robot.reachEnvelope + 0.5;
    const verdict = await client.ikCheck([far, 0, 0], 0, 0);
    expect(verdict.reachable).toBe(false);
  });
});

describe("accept loop", () => {
  it("fails the never-valid trial after exactly 8 attempts, counter mirroring the server", async () => {
    const state = new ViewState(client);
    await state.load();
    state.trialIndex = state.scenario!.trials.findIndex((t) => t.id === "corner-out-of-reach");
    expect(state.trialIndex).toBeGreaterThanOrEqual(0);

    for (let attempt = 1; attempt <= 8; attempt++) {
      const before = state.activeTrial!;
      expect(before.outcome).toBe("Pending");
      const outcome = await state.accept();
      // the trial object now held is the server's authoritative response
      const trial = state.scenario!.trials.find((t) => t.id === "corner-out-of-reach")!;
      expect(trial.attemptsUsed).toBe(attempt);
      if (attempt < 8) {
        expect(outcome).toBe("Pending");
        expect(trial.maxAttempts - trial.attemptsUsed).toBe(8 - attempt);
      } else {
        expect(outcome).toBe("Failed");
        expect(trial.outcome).toBe("Failed");
      }
    }

    // a ninth press must be rejected by the server with 409
    await expect(client.attempt("corner-out-of-reach", 0, 0)).rejects.toThrowError(ApiError);
    await client.attempt("corner-out-of-reach", 0, 0).catch((err: ApiError) => {
      expect(err.code).toBe(409);
    });
  });

  it("succeeds on a valid configuration and advances to the next trial", async () => {
    const state = new ViewState(client);
    await state.load();
    state.trialIndex = state.scenario!.trials.findIndex((t) => t.id === "disc-mid");
    const outcome = await state.accept();
    expect(outcome).toBe("Success");
    const trial = state.scenario!.trials.find((t) => t.id === "disc-mid")!;
    expect(trial.outcome).toBe("Success");
    expect(trial.attemptsUsed).toBe(1);
  });

  it("surfaces 404 for unknown trials as a banner", async () => {
    const state = new ViewState(client);
    await state.load();
    state.scenario!.trials.push({
      id: "ghost",
      difficulty: "Easy",
      maxAttempts: 8,
      attemptsUsed: 0,
      outcome: "Pending",
      taskPoints: [],
    });
    state.trialIndex = state.scenario!.trials.length - 1;
    const outcome = await state.accept();
    expect(outcome).toBeNull();
    expect(state.banner).toMatch(/404/);
  });
});

describe("drag throttling", () => {
  it("caps ik-check calls at 10 Hz with latest-wins", async () => {
    const { DragController, MIN_INTERVAL_MS } = await import("../src/drag");
    let clock = 0;
    const calls: Vec3[] = [];
    const fakeState = {
      ikCheck: async (target: Vec3) => {
        calls.push(target);
        return { reachable: true, collides: false, joints: [], residual: 0, iterations: 1 };
      },
    };
    const applied: Vec3[] = [];
    const drag = new DragController(
      fakeState as never,
      (_verdict, target) => applied.push(target),
      () => clock,
    );
    drag.start();
    for (let n = 0; n < 50; n++) {
      drag.move([n, 0, 0]);
      clock += 10; // 100 Hz of pointer events
    }
    await drag.release();
    // 500 ms of movement at a >=100 ms interval: at most 7 sends incl. the final flush
    expect(calls.length).toBeLessThanOrEqual(1 + Math.ceil(500 / MIN_INTERVAL_MS) + 1);
    expect(calls.length).toBeGreaterThanOrEqual(2);
    expect(applied[applied.length - 1][0]).toBe(49); // the final target wins
  });
});
