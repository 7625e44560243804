// End-effector dragging: while a drag is active, ik-check calls are throttled
// to at most 10 per second with latest-wins dedup (a stale in-flight response
// never overwrites a newer one).

import type { IkCheckJson } from "./api";
import type { ViewState } from "./state";
import type { Vec3 } from "./fk";

export const MIN_INTERVAL_MS = 100; // >= 10 Hz cap

export class DragController {
  private lastSent = 0;
  private pending: Vec3 | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private sequence = 0;
  private applied = 0;
  active = false;

  constructor(
    private state: ViewState,
    private onVerdict: (verdict: IkCheckJson | null, target: Vec3) => void,
    private now: () => number = () => Date.now(),
  ) {}

  start(): void {
    this.active = true;
  }

  /** New drag target from the pointer ray; may coalesce into a later call. */
  move(target: Vec3): void {
    if (!this.active) return;
    this.pending = target;
    const wait = this.lastSent + MIN_INTERVAL_MS - this.now();
    if (wait <= 0) {
      void this.flush();
    } else if (this.timer === null) {
      this.timer = setTimeout(() => void this.flush(), wait);
    }
  }

  /** Drag released: force a final check so the verdict can be pinned. */
  async release(): Promise<void> {
    this.active = false;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.pending) await this.flush(true);
  }

  private async flush(force = false): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    const target = this.pending;
    if (!target) return;
    if (!force && this.now() - this.lastSent < MIN_INTERVAL_MS) return;
    this.pending = null;
    this.lastSent = this.now();
    const ticket = ++this.sequence;
    const verdict = await this.state.ikCheck(target);
    if (ticket > this.applied) {
      this.applied = ticket;
      this.onVerdict(verdict, target);
    }
  }
}
