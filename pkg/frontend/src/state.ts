// View state: current crane config, the loaded map, the active trial, and the
// last IK verdict. Crane moves keep the config in range by construction
// (rotation wraps, height clamps), and the attempt counter shown is always the
// server's value from the latest response.

import type { Client, IkCheckJson, MapJson, ScenarioJson, TrialJson } from "./api";
import { ApiError } from "./api";

export type CraneAction = "rotateCW" | "rotateCCW" | "raise" | "lower";

export interface WorkpieceConfig {
  rot: number;
  height: number;
}

export function applyCraneAction(cfg: WorkpieceConfig, action: CraneAction, rotationCount: number, heightCount: number): WorkpieceConfig {
  switch (action) {
    case "rotateCW":
      return { rot: (cfg.rot + 1) % rotationCount, height: cfg.height };
    case "rotateCCW":
      return { rot: (cfg.rot + rotationCount - 1) % rotationCount, height: cfg.height };
    case "raise":
      return { rot: cfg.rot, height: Math.min(cfg.height + 1, heightCount - 1) };
    case "lower":
      return { rot: cfg.rot, height: Math.max(cfg.height - 1, 0) };
  }
}

export type Listener = () => void;

export class ViewState {
  scenario: ScenarioJson | null = null;
  config: WorkpieceConfig = { rot: 0, height: 0 };
  map: MapJson | null = null;
  trialIndex = 0;
  armJoints: number[] | null = null;
  lastVerdict: IkCheckJson | null = null;
  banner: string | null = null;
  busy = false;

  private listeners: Listener[] = [];
  private mapEpoch = 0;

  constructor(private client: Client) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  get activeTrial(): TrialJson | null {
    if (!this.scenario) return null;
    return this.scenario.trials[this.trialIndex] ?? null;
  }

  get attemptsRemaining(): number {
    const trial = this.activeTrial;
    return trial ? trial.maxAttempts - trial.attemptsUsed : 0;
  }

  canRaise(): boolean {
    return this.scenario !== null && this.config.height < this.scenario.crane.heightCount - 1;
  }

  canLower(): boolean {
    return this.config.height > 0;
  }

  async load(): Promise<void> {
    this.scenario = await this.client.scenario();
    this.trialIndex = this.scenario.trials.findIndex((t) => t.outcome === "Pending");
    if (this.trialIndex < 0) this.trialIndex = 0;
    await this.fetchMap(this.config);
  }

  /** Fetch the map for cfg; on success the state switches atomically so the
   *  loaded map always corresponds to the current config. */
  private async fetchMap(cfg: WorkpieceConfig): Promise<boolean> {
    const epoch = ++this.mapEpoch;
    try {
      const map = await this.client.map(cfg.rot, cfg.height);
      if (epoch !== this.mapEpoch) return false; // a newer fetch superseded this one
      this.config = cfg;
      this.map = map;
      this.banner = null;
      this.emit();
      return true;
    } catch (err) {
      if (epoch === this.mapEpoch) {
        this.banner = `map fetch failed: ${err instanceof Error ? err.message : err}`;
        this.emit();
      }
      return false;
    }
  }

  async craneControl(action: CraneAction): Promise<boolean> {
    if (!this.scenario) return false;
    const { rotationCount, heightCount } = this.scenario.crane;
    const next = applyCraneAction(this.config, action, rotationCount, heightCount);
    if (next.rot === this.config.rot && next.height === this.config.height) {
      return false; // clamped at a limit; the button should be disabled anyway
    }
    return this.fetchMap(next);
  }

  async ikCheck(target: [number, number, number]): Promise<IkCheckJson | null> {
    try {
      const verdict = await this.client.ikCheck(target, this.config.rot, this.config.height);
      this.lastVerdict = verdict;
      this.armJoints = verdict.joints;
      this.emit();
      return verdict;
    } catch (err) {
      this.banner = `ik-check failed: ${err instanceof Error ? err.message : err}`;
      this.emit();
      return null;
    }
  }

  /** One accept press. Success or exhaustion advances to the next trial. */
  async accept(): Promise<"Success" | "Failed" | "Pending" | null> {
    const trial = this.activeTrial;
    if (!trial || trial.outcome !== "Pending" || !this.scenario) return null;
    try {
      const result = await this.client.attempt(trial.id, this.config.rot, this.config.height);
      this.scenario.trials[this.trialIndex] = result.trial;
      if (result.trial.outcome !== "Pending") {
        const next = this.scenario.trials.findIndex((t) => t.outcome === "Pending");
        if (next >= 0) this.trialIndex = next;
      }
      this.emit();
      return result.trial.outcome;
    } catch (err) {
      if (err instanceof ApiError) {
        this.banner = `attempt rejected (${err.code}): ${err.message}`;
      } else {
        this.banner = `attempt failed: ${err instanceof Error ? err.message : err}`;
      }
      this.emit();
      return null;
    }
  }
}
