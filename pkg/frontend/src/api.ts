// Typed client for the reachvox HTTP API.

export interface PoseJson {
  q: [number, number, number, number]; // w, x, y, z
  t: [number, number, number];
}

export interface CapsuleJson {
  a: [number, number, number];
  b: [number, number, number];
  radius: number;
}

export interface JointJson {
  parentTransform: PoseJson;
  axis: [number, number, number];
  limitsDeg: [number, number];
  enumStepDeg: number;
  enumerated: boolean;
}

export interface RobotJson {
  basePose: PoseJson;
  toolOffset: PoseJson;
  joints: JointJson[];
  linkCapsules: CapsuleJson[][];
  reachEnvelope: number;
}

export interface CraneJson {
  rotationStepDeg: number;
  rotationCount: number;
  heightCount: number;
  heightStep: number;
  basePose: PoseJson;
}

export interface TaskPointJson {
  position: [number, number, number];
  label: string;
}

export interface TrialJson {
  id: string;
  difficulty: string;
  maxAttempts: number;
  attemptsUsed: number;
  outcome: "Pending" | "Success" | "Failed";
  taskPoints: TaskPointJson[];
}

export interface ScenarioJson {
  name: string;
  crane: CraneJson;
  grid: { voxelSize: number; band: number };
  schedule: number[];
  halfSpaceRestricted: boolean;
  robot: RobotJson;
  trials: TrialJson[];
}

/** One record per active voxel: [i, j, k, status] with status 1 = Reachable. */
export type VoxelRecord = [number, number, number, number];

export interface MapJson {
  rot: number;
  height: number;
  origin: [number, number, number];
  cellSize: number;
  dims: [number, number, number];
  voxels: VoxelRecord[];
}

export interface IkCheckJson {
  reachable: boolean;
  collides: boolean;
  joints: number[];
  residual: number;
  iterations: number;
}

export interface AttemptJson {
  trial: TrialJson;
  evaluation: {
    valid: boolean;
    perPoint: { label: string; position: number[]; voxel: number[] | null; status: number }[];
  };
}

export class ApiError extends Error {
  constructor(public code: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, init);
  if (!response.ok) {
    let message = `${response.status}`;
    try {
      const body = await response.json();
      if (body && typeof body.message === "string") message = body.message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, message);
  }
  return (await response.json()) as T;
}

export class Client {
  constructor(public base: string = "") {}

  scenario(): Promise<ScenarioJson> {
    return request(this.base, "/api/scenario");
  }

  map(rot: number, height: number): Promise<MapJson> {
    return request(this.base, `/api/map?rot=${rot}&height=${height}`);
  }

  ikCheck(target: [number, number, number], rot: number, height: number): Promise<IkCheckJson> {
    return request(this.base, "/api/ik-check", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ target, rot, height }),
    });
  }

  attempt(trialId: string, rot: number, height: number): Promise<AttemptJson> {
    return request(this.base, `/api/trial/${encodeURIComponent(trialId)}/attempt`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ rot, height }),
    });
  }
}
