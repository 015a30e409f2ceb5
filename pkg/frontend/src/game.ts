/** Prediction game controller: one segment at a time, answers via the API.
 *
 * The server only ever sends the visible segment; the successor price shows
 * up in the answer reply, after the call has been committed.
 */

import { EngineApi } from "./api.js";
import { AnswerReply, EstimatePayload, SegmentPayload } from "./types.js";

export interface GameConfig {
  prices: number[];
  length: number;
  trials: number;
  seed: number;
}

export class PredictionGame {
  sessionId: string | null = null;
  current: SegmentPayload | null = null;
  answered = 0;
  correct = 0;
  finished = false;
  reveals: AnswerReply[] = [];

  constructor(private api: EngineApi) {}

  async open(config: GameConfig): Promise<SegmentPayload | null> {
    const res = await this.api.openAbilitySession(config);
    this.sessionId = res.id;
    this.current = res.segment;
    this.answered = 0;
    this.correct = 0;
    this.finished = res.segment === null;
    this.reveals = [];
    this.assertNoLookahead(config.length);
    return this.current;
  }

  /** The visible segment must not leak the point being predicted. */
  private assertNoLookahead(length: number): void {
    if (this.current && this.current.prices.length !== length) {
      throw new Error(
        `segment leaks data: got ${this.current.prices.length} points for length ${length}`,
      );
    }
  }

  get runningFrequency(): number {
    return this.answered === 0 ? 0 : this.correct / this.answered;
  }

  async answer(prediction: "up" | "not_up"): Promise<AnswerReply> {
    if (!this.sessionId || this.finished) {
      throw new Error("no open session");
    }
    const expectedLength = this.current?.prices.length ?? 0;
    const reply = await this.api.answer(this.sessionId, prediction);
    this.reveals.push(reply);
    this.answered = reply.answered;
    if (reply.correct) this.correct += 1;
    if (Math.abs(this.runningFrequency - reply.running_frequency) > 1e-9) {
      throw new Error("client frequency drifted from server estimate");
    }
    this.current = reply.next;
    this.finished = reply.done;
    if (this.current && this.current.prices.length !== expectedLength) {
      throw new Error("segment length changed mid-session");
    }
    return reply;
  }

  async estimate(): Promise<EstimatePayload> {
    if (!this.sessionId) throw new Error("no open session");
    return this.api.estimate(this.sessionId);
  }
}

/** Deterministic 32-bit generator for scripted bots. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Scripted player: owns the uploaded series, so it can read the true next
 * direction from its copy (the server never sends it pre-answer) and calls
 * it correctly with probability p.
 */
export async function runScriptedBot(
  game: PredictionGame,
  config: GameConfig,
  p: number,
): Promise<EstimatePayload> {
  const rand = mulberry32(config.seed ^ 0x9e3779b9);
  await game.open(config);
  while (!game.finished && game.current) {
    const seg = game.current;
    const end = seg.offset + seg.prices.length - 1;
    const truth = config.prices[end + 1] > config.prices[end] ? "up" : "not_up";
    const flip = rand() < p;
    const call = flip ? truth : truth === "up" ? "not_up" : "up";
    const reply = await game.answer(call as "up" | "not_up");
    if (reply.correct !== (call === reply.actual)) {
      throw new Error("server scored the answer inconsistently");
    }
  }
  return game.estimate();
}
