import { ApiError, type GameApi } from './api.js';
import type { MoveDoc, OutcomeDelta, ViewDoc } from './types.js';

/**
 * One overlay entry: probability of the marker/object ending up at `delta`,
 * formatted for display. `percent` is the only arithmetic the client does
 * with a probability (scaling by 100 and rounding to one decimal).
 */
export interface OverlayEntry {
  delta: OutcomeDelta;
  probability: number;
  percent: string;
}

export interface Overlay {
  action: string;
  entries: OverlayEntry[];
  /** The outcome mass as a percentage (display rounds it to one decimal). */
  totalPercent: number;
}

export function formatPercent(probability: number): string {
  return `${(probability * 100).toFixed(1)}%`;
}

const TERMINAL_LABELS = ['RobotWin', 'HumanWin', 'Draw'];

/**
 * Framework-free view model driving the play-service API.
 *
 * Holds exactly what the server reports (never recomputes game math) and
 * serializes mutating requests: at most one in flight per session.
 */
export class GameViewModel {
  state: ViewDoc | null = null;
  moves: MoveDoc[] = [];
  overlay: Overlay | null = null;
  lastError: string | null = null;
  private sessionId: string | null = null;
  private mutating = false;
  private listeners: Array<() => void> = [];

  constructor(private readonly api: GameApi) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  get isHumanTurn(): boolean {
    return !!this.state && !this.state.terminal && this.state.controller === 'human';
  }

  get isRobotTurn(): boolean {
    return !!this.state && !this.state.terminal && this.state.controller === 'robot';
  }

  /** Result banner from the server's own terminal label, if any. */
  get terminalBanner(): string | null {
    if (!this.state || !this.state.terminal) return null;
    const label = this.state.state.labels.find((l) => TERMINAL_LABELS.includes(l));
    return label ?? (this.state.target_reached ? 'TaskComplete' : 'GameOver');
  }

  get valueReadout(): string {
    return this.state ? this.state.value.toFixed(4) : '-';
  }

  async startGame(scenario: string, seed?: number, formula?: string): Promise<void> {
    this.lastError = null;
    try {
      this.sessionId = await this.api.createSession(scenario, formula, seed);
      this.state = await this.api.view(this.sessionId);
      this.notify();
      // the robot opens when it holds the initial state
      if (this.isRobotTurn) {
        await this.advanceRobot();
      } else {
        await this.loadMoves();
      }
    } catch (err) {
      this.fail(err);
    }
  }

  async refresh(): Promise<void> {
    if (!this.sessionId) return;
    try {
      this.state = await this.api.view(this.sessionId);
      if (this.isHumanTurn) await this.loadMoves();
      this.notify();
    } catch (err) {
      this.fail(err);
    }
  }

  async loadMoves(): Promise<MoveDoc[]> {
    if (!this.sessionId || !this.isHumanTurn) {
      this.moves = [];
      return this.moves;
    }
    const doc = await this.api.moves(this.sessionId);
    this.moves = doc.moves;
    this.notify();
    return this.moves;
  }

  /**
   * Outcome-probability overlay for a candidate move, verbatim from the
   * cached legal-moves document; null when the move is not on offer.
   */
  hoverMove(action: string): Overlay | null {
    const move = this.moves.find((m) => m.action === action);
    if (!move || !this.isHumanTurn) {
      this.overlay = null;
      this.notify();
      return null;
    }
    const entries = move.outcomes.map((o) => ({
      delta: o.delta,
      probability: o.probability,
      percent: formatPercent(o.probability),
    }));
    // total over the raw probabilities; rounding entry-wise first could
    // drift visibly with many outcomes
    const totalPercent = entries.reduce((acc, e) => acc + e.probability, 0) * 100;
    this.overlay = { action: move.action, entries, totalPercent };
    this.notify();
    return this.overlay;
  }

  clearOverlay(): void {
    this.overlay = null;
    this.notify();
  }

  async commitMove(action: string): Promise<void> {
    if (!this.sessionId || !this.isHumanTurn || this.mutating) return;
    if (!this.moves.some((m) => m.action === action)) return; // stale click
    this.mutating = true;
    try {
      const result = await this.api.humanMove(this.sessionId, action);
      this.state = result.view;
      this.overlay = null;
      this.moves = [];
      this.notify();
    } catch (err) {
      this.fail(err);
    } finally {
      this.mutating = false;
    }
  }

  /** Let the robot play its synthesized choice; returns the action taken. */
  async advanceRobot(): Promise<string | null> {
    if (!this.sessionId || !this.isRobotTurn || this.mutating) return null;
    this.mutating = true;
    try {
      const result = await this.api.robotStep(this.sessionId);
      this.state = result.view;
      this.notify();
      if (this.isHumanTurn) await this.loadMoves();
      return result.action;
    } catch (err) {
      this.fail(err);
      return null;
    } finally {
      this.mutating = false;
    }
  }

  private fail(err: unknown): void {
    this.lastError =
      err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    this.notify();
  }
}
