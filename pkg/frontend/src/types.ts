/** Mirror of the engine's scenario JSON schema plus client-side validation. */

export type DirectionTag = "increase" | "decrease" | "no_change";

export interface Belief {
  id: string;
  price_now: string;
  direction: DirectionTag;
  p: number;
  price_min: string;
  price_max: string;
}

export interface BudgetRowJson {
  coeffs: number[];
  sense: "<=" | ">=";
  rhs: string;
}

export interface GameInputs {
  groups: { plus: string[]; minus: string[]; zero: string[] };
  budget_rows: BudgetRowJson[];
  probabilities: { p_plus: number; p_minus: number; p_zero: number };
  short_positions?: Record<string, number>;
}

export interface Scenario {
  schema_version: number;
  id?: string;
  name?: string;
  trader_state: {
    cash: string;
    holdings: Record<string, number>;
    leverage: number;
    threshold: number;
  };
  beliefs: Belief[];
  futures: unknown[];
  options: unknown[];
  game_inputs?: GameInputs;
  created_at?: string;
  updated_at?: string;
}

export type ModelTag = "M1P1" | "M1P2" | "M1P4" | "M2Exact" | "M2Bound";

export interface M1Result {
  model: "M1P1" | "M1P2" | "M1P4";
  problem: number;
  mode: string;
  volumes: Record<string, Record<string, number>>;
  expected_welfare_increment: string;
  expected_welfare: string;
  welfare_now: string;
  bound: string;
  solver: string;
}

export interface M2BoundResult {
  model: "M2Bound";
  value: string;
  x: Record<string, number>;
  w: Record<string, string>;
  h: string[];
  pi: string[];
  short_positions: Record<string, number>;
  /** unspent budget per balance row; welfare the game value omits */
  residual_cash: string[];
}

export interface M2ExactResult {
  model: "M2Exact";
  value: string;
  x: Record<string, number>;
  relaxation_bound: string;
  nodes_explored: number;
  short_positions: Record<string, number>;
  residual_cash: string[];
}

export type SolveResult = M1Result | M2BoundResult | M2ExactResult;

export interface SolveRecord {
  id: string;
  scenario_id: string;
  model: ModelTag;
  options: Record<string, unknown>;
  result: SolveResult;
  wall_time_ms: number;
  created_at: string;
}

export interface SegmentPayload {
  index: number;
  offset: number;
  total: number;
  prices: string[];
}

export interface AnswerReply {
  actual: "up" | "not_up";
  actual_price: string;
  correct: boolean;
  answered: number;
  total: number;
  running_frequency: number;
  done: boolean;
  next: SegmentPayload | null;
}

export interface EstimatePayload {
  p_hat: number;
  n_trials: number;
  ci95: [number, number];
  correct: number;
  total: number;
}

/** JSON with recursively sorted keys and compact separators (matches the CLI). */
export function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return `[${value.map(canonicalJson).join(",")}]`;
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${canonicalJson(v)}`);
  return `{${entries.join(",")}}`;
}
