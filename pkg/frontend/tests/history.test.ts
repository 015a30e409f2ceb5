import { describe, expect, it } from "vitest";

import { HISTORY_LIMIT, SolveHistory } from "../src/history.js";
import { SolveRecord } from "../src/types.js";

function record(i: number, scenarioId = "s1"): SolveRecord {
  return {
    id: `r${i}`,
    scenario_id: scenarioId,
    model: "M2Bound",
    options: {},
    result: {
      model: "M2Bound",
      value: String(i),
      x: {},
      w: {},
      h: [],
      pi: [],
      short_positions: {},
      residual_cash: [],
    },
    wall_time_ms: 1,
    created_at: "",
  };
}

describe("SolveHistory", () => {
  it("keeps newest first", () => {
    const h = new SolveHistory();
    h.push(record(1));
    h.push(record(2));
    expect(h.entries("s1").map((r) => r.id)).toEqual(["r2", "r1"]);
    expect(h.latest("s1")?.id).toBe("r2");
  });

  it("caps at the history limit", () => {
    const h = new SolveHistory();
    for (let i = 0; i < HISTORY_LIMIT + 7; i += 1) h.push(record(i));
    const entries = h.entries("s1");
    expect(entries).toHaveLength(HISTORY_LIMIT);
    expect(entries[0].id).toBe(`r${HISTORY_LIMIT + 6}`);
  });

  it("separates scenarios", () => {
    const h = new SolveHistory();
    h.push(record(1, "a"));
    h.push(record(2, "b"));
    expect(h.entries("a")).toHaveLength(1);
    expect(h.entries("b")).toHaveLength(1);
    h.clear("a");
    expect(h.entries("a")).toHaveLength(0);
  });
});
