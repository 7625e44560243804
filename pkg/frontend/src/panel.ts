// Crane control panel and trial side panel (plain DOM).

import type { ViewState } from "./state";

function el<K extends keyof HTMLElementTagNameMap>(tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class Panel {
  readonly root: HTMLElement;
  private configLabel: HTMLElement;
  private rotateCCW: HTMLButtonElement;
  private rotateCW: HTMLButtonElement;
  private raise: HTMLButtonElement;
  private lower: HTMLButtonElement;
  private trialInfo: HTMLElement;
  private attemptsInfo: HTMLElement;
  private acceptButton: HTMLButtonElement;
  private verdictInfo: HTMLElement;
  private bannerBox: HTMLElement;

  constructor(private state: ViewState) {
    this.root = el("div", "panel");

    const craneBox = el("div", "box");
    craneBox.appendChild(el("h2", undefined, "Crane"));
    this.configLabel = el("div", "config");
    const rotRow = el("div", "row");
    this.rotateCCW = el("button", undefined, "⟲ rotate");
    this.rotateCW = el("button", undefined, "rotate ⟳");
    rotRow.append(this.rotateCCW, this.rotateCW);
    const heightRow = el("div", "row");
    this.raise = el("button", undefined, "▲ raise");
    this.lower = el("button", undefined, "▼ lower");
    heightRow.append(this.raise, this.lower);
    craneBox.append(this.configLabel, rotRow, heightRow);

    const trialBox = el("div", "box");
    trialBox.appendChild(el("h2", undefined, "Trial"));
    this.trialInfo = el("div");
    this.attemptsInfo = el("div", "attempts");
    this.acceptButton = el("button", "accept", "Accept configuration");
    trialBox.append(this.trialInfo, this.attemptsInfo, this.acceptButton);

    const verdictBox = el("div", "box");
    verdictBox.appendChild(el("h2", undefined, "End effector"));
    this.verdictInfo = el("div", "verdict", "drag the blue handle to probe reachability");
    verdictBox.appendChild(this.verdictInfo);

    this.bannerBox = el("div", "banner hidden");

    this.root.append(this.bannerBox, craneBox, trialBox, verdictBox);

    this.rotateCW.addEventListener("click", () => void state.craneControl("rotateCW"));
    this.rotateCCW.addEventListener("click", () => void state.craneControl("rotateCCW"));
    this.raise.addEventListener("click", () => void state.craneControl("raise"));
    this.lower.addEventListener("click", () => void state.craneControl("lower"));
    this.acceptButton.addEventListener("click", () => void this.onAccept());

    state.subscribe(() => this.refresh());
    this.refresh();
  }

  private async onAccept(): Promise<void> {
    const outcome = await this.state.accept();
    if (outcome === "Success") this.toast("valid configuration — next trial");
    else if (outcome === "Failed") this.toast("trial failed — next trial");
    else if (outcome === "Pending") this.toast(`not reachable — ${this.state.attemptsRemaining} attempts remaining`);
  }

  pinVerdict(text: string): void {
    this.verdictInfo.textContent = text;
  }

  private toast(text: string): void {
    this.bannerBox.textContent = text;
    this.bannerBox.classList.remove("hidden");
    setTimeout(() => this.bannerBox.classList.add("hidden"), 2500);
  }

  private refresh(): void {
    const scenario = this.state.scenario;
    const cfg = this.state.config;
    this.configLabel.textContent = scenario
      ? `rotation ${cfg.rot * scenario.crane.rotationStepDeg}° (step ${cfg.rot}/${scenario.crane.rotationCount - 1}), height ${cfg.height}/${scenario.crane.heightCount - 1}`
      : "loading…";
    this.raise.disabled = !this.state.canRaise();
    this.lower.disabled = !this.state.canLower();

    const trial = this.state.activeTrial;
    if (trial) {
      this.trialInfo.textContent = `${trial.id} (${trial.difficulty}) — ${trial.taskPoints.length} task point(s) — ${trial.outcome}`;
      this.attemptsInfo.textContent =
        trial.outcome === "Pending"
          ? `${trial.maxAttempts - trial.attemptsUsed} of ${trial.maxAttempts} attempts remaining`
          : `finished after ${trial.attemptsUsed} attempt(s)`;
      this.acceptButton.disabled = trial.outcome !== "Pending";
    } else {
      this.trialInfo.textContent = "no trials";
      this.attemptsInfo.textContent = "";
      this.acceptButton.disabled = true;
    }

    if (this.state.banner) {
      this.bannerBox.textContent = this.state.banner;
      this.bannerBox.classList.remove("hidden");
    }
  }
}
