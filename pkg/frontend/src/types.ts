/** JSON documents exchanged with the play service (/api/v1). */

export interface ScenarioInfo {
  id: string;
  kind: string;
  description: string;
  default_formula: string;
}

export interface StateSummary {
  index: number;
  labels: string[];
  board?: number[]; // tic-tac-toe: 9 cells, 0 empty / 1 robot / 2 human
  arrangement?: Record<string, string>; // pick-and-place: object -> location
  counter?: number;
  human_active?: boolean;
}

export interface RobotActionInfo {
  action: string;
  expected_value: number;
}

export interface HistoryEntry {
  actor: 'robot' | 'human';
  action: string;
  from: number;
  to: number;
  delta: OutcomeDelta | null;
  interrupt?: boolean;
}

export interface ViewDoc {
  session_id: string;
  scenario: string;
  formula: string;
  seed: number;
  controller: 'robot' | 'human';
  value: number;
  target_reached: boolean;
  terminal: boolean;
  step: number;
  state: StateSummary;
  history: HistoryEntry[];
  robot_actions?: RobotActionInfo[];
}

export type OutcomeDelta =
  | { cell: number }
  | { object: string; from: string; to: string }
  | null;

export interface OutcomeDoc {
  probability: number;
  state: StateSummary;
  delta: OutcomeDelta;
}

export interface MoveDetail {
  cell?: number;
  object?: string;
  from?: string;
  to?: string;
}

export interface MoveDoc {
  action: string;
  detail: MoveDetail;
  outcomes: OutcomeDoc[];
}

export interface MovesDoc {
  moves: MoveDoc[];
}

export interface StepResult {
  action: string;
  sampled: OutcomeDoc;
  view: ViewDoc;
}

export interface ApiErrorDoc {
  code: string;
  message: string;
  detail: unknown;
}
