/** Built-in demo scenario: the two-security game worked example. */

import { Scenario } from "./types.js";

export function demoScenario(): Scenario {
  return {
    schema_version: 1,
    id: "section6",
    name: "Two-security game (worked example)",
    trader_state: { cash: "10000", holdings: {}, leverage: 0.5, threshold: 1.0 },
    beliefs: [
      {
        id: "sec1",
        price_now: "100",
        direction: "increase",
        p: 0.6,
        price_min: "75",
        price_max: "115",
      },
      {
        id: "sec2",
        price_now: "50",
        direction: "decrease",
        p: 0.7,
        price_min: "35",
        price_max: "65",
      },
    ],
    futures: [],
    options: [],
    game_inputs: {
      groups: { plus: ["sec1"], minus: ["sec2"], zero: [] },
      budget_rows: [],
      probabilities: { p_plus: 0.6, p_minus: 0.7, p_zero: 0.5 },
      short_positions: { sec2: 100 },
    },
  };
}

/** Deterministic demo walk for the prediction game. */
export function demoWalk(n: number, seed: number): number[] {
  let a = seed >>> 0;
  const rand = () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
  const prices = [100];
  for (let i = 1; i < n; i += 1) {
    const next = prices[i - 1] + (rand() < 0.5 ? -1 : 1);
    prices.push(Math.max(next, 1));
  }
  return prices;
}
