/** What-if history: the last solves per scenario, newest first. */

import { SolveRecord } from "./types.js";

export const HISTORY_LIMIT = 20;

export class SolveHistory {
  private byScenario = new Map<string, SolveRecord[]>();

  push(record: SolveRecord): void {
    const list = this.byScenario.get(record.scenario_id) ?? [];
    list.unshift(record);
    if (list.length > HISTORY_LIMIT) list.length = HISTORY_LIMIT;
    this.byScenario.set(record.scenario_id, list);
  }

  entries(scenarioId: string): SolveRecord[] {
    return [...(this.byScenario.get(scenarioId) ?? [])];
  }

  latest(scenarioId: string): SolveRecord | undefined {
    return this.byScenario.get(scenarioId)?.[0];
  }

  clear(scenarioId: string): void {
    this.byScenario.delete(scenarioId);
  }
}
