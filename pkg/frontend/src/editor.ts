/** Scenario editor state: field edits, dirty tracking, validation gating. */

import { Belief, DirectionTag, Scenario } from "./types.js";

const DIRECTIONS: DirectionTag[] = ["increase", "decrease", "no_change"];

export function emptyScenario(): Scenario {
  return {
    schema_version: 1,
    trader_state: { cash: "0", holdings: {}, leverage: 0, threshold: 1 },
    beliefs: [],
    futures: [],
    options: [],
  };
}

function isMoney(text: string): boolean {
  return text.trim() !== "" && Number.isFinite(Number(text));
}

export class ScenarioEditor {
  scenario: Scenario = emptyScenario();
  dirty = new Set<string>();
  errors = new Map<string, string>();

  load(scenario: Scenario): void {
    this.scenario = JSON.parse(JSON.stringify(scenario)) as Scenario;
    this.dirty.clear();
    this.errors.clear();
    this.validate();
  }

  toJSON(): Scenario {
    return JSON.parse(JSON.stringify(this.scenario)) as Scenario;
  }

  /** Apply one field edit by dotted path; marks it dirty and revalidates. */
  setField(path: string, value: unknown): void {
    const parts = path.split(".");
    let node: any = this.scenario;
    for (const key of parts.slice(0, -1)) {
      const idx = key.match(/^(\w+)\[(\d+)\]$/);
      node = idx ? node[idx[1]][Number(idx[2])] : node[key];
      if (node === undefined) throw new Error(`no such field: ${path}`);
    }
    const last = parts[parts.length - 1];
    const idx = last.match(/^(\w+)\[(\d+)\]$/);
    if (idx) {
      node[idx[1]][Number(idx[2])] = value;
    } else {
      node[last] = value;
    }
    this.dirty.add(path);
    this.validate();
  }

  addBelief(belief: Belief): void {
    this.scenario.beliefs.push(belief);
    this.dirty.add(`beliefs[${this.scenario.beliefs.length - 1}]`);
    this.validate();
  }

  removeBelief(index: number): void {
    const removed = this.scenario.beliefs.splice(index, 1);
    for (const b of removed) {
      delete this.scenario.trader_state.holdings[b.id];
      const gi = this.scenario.game_inputs;
      if (gi) {
        for (const key of ["plus", "minus", "zero"] as const) {
          gi.groups[key] = gi.groups[key].filter((x) => x !== b.id);
        }
      }
    }
    this.dirty.add("beliefs");
    this.validate();
  }

  /** Record a server-side rejection at its dotted field path. */
  applyServerError(field: string, message: string): void {
    this.errors.set(field || "scenario", message);
  }

  validate(): void {
    this.errors.clear();
    const s = this.scenario;
    if (!isMoney(s.trader_state.cash) || Number(s.trader_state.cash) < 0) {
      this.errors.set("trader_state.cash", "cash must be a nonnegative amount");
    }
    if (!(s.trader_state.leverage >= 0)) {
      this.errors.set("trader_state.leverage", "leverage must be >= 0");
    }
    if (!(s.trader_state.threshold > 0)) {
      this.errors.set("trader_state.threshold", "threshold must be > 0");
    }
    const seen = new Set<string>();
    s.beliefs.forEach((b, i) => {
      const at = (f: string) => `beliefs[${i}].${f}`;
      if (!b.id) this.errors.set(at("id"), "id required");
      if (seen.has(b.id)) this.errors.set(at("id"), `duplicate id ${b.id}`);
      seen.add(b.id);
      if (!DIRECTIONS.includes(b.direction)) {
        this.errors.set(at("direction"), "direction must be increase/decrease/no_change");
      }
      if (!(b.p > 0 && b.p <= 1)) this.errors.set(at("p"), "p must be in (0, 1]");
      for (const f of ["price_now", "price_min", "price_max"] as const) {
        if (!isMoney(b[f]) || Number(b[f]) < 0) {
          this.errors.set(at(f), `${f} must be a nonnegative amount`);
        }
      }
      const lo = Number(b.price_min);
      const hi = Number(b.price_max);
      const now = Number(b.price_now);
      if (isFinite(lo) && isFinite(hi) && isFinite(now) && !(lo <= now && now <= hi)) {
        this.errors.set(at("price_now"), "price_now must lie in [price_min, price_max]");
      }
    });
    const gi = s.game_inputs;
    if (gi) {
      for (const key of ["plus", "minus", "zero"] as const) {
        for (const iid of gi.groups[key]) {
          if (!seen.has(iid)) {
            this.errors.set(`game_inputs.groups.${key}`, `unknown instrument ${iid}`);
          }
        }
      }
      const counts = new Map<string, number>();
      for (const key of ["plus", "minus", "zero"] as const) {
        for (const iid of gi.groups[key]) counts.set(iid, (counts.get(iid) ?? 0) + 1);
      }
      for (const [iid, c] of counts) {
        if (c > 1) this.errors.set("game_inputs.groups", `${iid} appears in two groups`);
      }
      for (const [k, p] of Object.entries(gi.probabilities)) {
        if (!(p > 0 && p <= 1)) {
          this.errors.set(`game_inputs.probabilities.${k}`, "probability must be in (0, 1]");
        }
      }
    }
  }

  errorAt(path: string): string | undefined {
    return this.errors.get(path);
  }

  /** Solving is allowed only once every validation passes. */
  get canSolve(): boolean {
    return this.errors.size === 0;
  }

  get canSolveGame(): boolean {
    const gi = this.scenario.game_inputs;
    const populated =
      !!gi && gi.groups.plus.length + gi.groups.minus.length + gi.groups.zero.length > 0;
    return this.canSolve && populated;
  }
}
