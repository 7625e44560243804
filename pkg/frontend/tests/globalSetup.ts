// Spawns the real service with the annulus scenario (computing a map set
// first) so the viewer tests run against live HTTP.

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { BASE, waitForService } from "./helpers";

const SCENARIO = fileURLToPath(new URL("../../src/reachvox/data/scenarios/annulus.json", import.meta.url));

let server: ChildProcess | null = null;
let workDir: string | null = null;

function run(args: string[]): Promise<void> {
  return new Promise((res, rej) => {
    const child = spawn("python3", ["-m", "reachvox", ...args], { stdio: ["ignore", "inherit", "inherit"] });
    child.on("exit", (code) => (code === 0 ? res() : rej(new Error(`reachvox ${args[0]} exited ${code}`))));
    child.on("error", rej);
  });
}

export async function setup(): Promise<void> {
  workDir = mkdtempSync(join(tmpdir(), "reachvox-viewer-"));
  const maps = join(workDir, "annulus.rvox");
  // coarse schedule keeps the precompute quick; voxel counts are step-independent
  await run(["compute", "--scenario", SCENARIO, "--out", maps, "--steps", "2,2", "--threads", "2"]);

  server = spawn(
    "python3",
    ["-m", "reachvox", "serve", "--scenario", SCENARIO, "--maps", maps, "--port", "8970"],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  await waitForService(BASE);
}

export async function teardown(): Promise<void> {
  if (server) {
    server.kill("SIGTERM");
    await new Promise((res) => setTimeout(res, 300));
    if (!server.killed) server.kill("SIGKILL");
    server = null;
  }
  if (workDir) {
    rmSync(workDir, { recursive: true, force: true });
    workDir = null;
  }
}
