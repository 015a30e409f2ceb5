/** DOM wiring for the trader console. */

import { ApiError, EngineApi } from "./api.js";
import { renderPriceChart, renderStrategyBars } from "./charts.js";
import { ScenarioEditor } from "./editor.js";
import { demoScenario, demoWalk } from "./fixture.js";
import { PredictionGame } from "./game.js";
import { SolveHistory } from "./history.js";
import {
  Belief,
  M1Result,
  M2BoundResult,
  M2ExactResult,
  ModelTag,
  Scenario,
  SolveRecord,
  SolveResult,
} from "./types.js";

const api = new EngineApi("");
const editor = new ScenarioEditor();
const history = new SolveHistory();
const game = new PredictionGame(api);

let solving = false;
const solveQueue: ModelTag[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fieldInput(path: string, value: string | number, type = "text"): string {
  const err = editor.errorAt(path);
  return `
    <label class="field ${err ? "invalid" : ""}" data-for="${path}">
      <span>${path.split(".").pop()}</span>
      <input data-path="${path}" type="${type}" value="${String(value)}" />
      ${err ? `<em class="error">${err}</em>` : ""}
    </label>`;
}

function beliefRow(b: Belief, i: number): string {
  const gi = editor.scenario.game_inputs;
  const group = gi
    ? gi.groups.plus.includes(b.id)
      ? "plus"
      : gi.groups.minus.includes(b.id)
        ? "minus"
        : gi.groups.zero.includes(b.id)
          ? "zero"
          : ""
    : "";
  return `
    <div class="belief" data-index="${i}">
      <strong>${b.id}</strong>
      ${fieldInput(`beliefs[${i}].price_now`, b.price_now)}
      ${fieldInput(`beliefs[${i}].price_min`, b.price_min)}
      ${fieldInput(`beliefs[${i}].price_max`, b.price_max)}
      ${fieldInput(`beliefs[${i}].p`, b.p, "number")}
      <label class="field"><span>direction</span>
        <select data-path="beliefs[${i}].direction">
          ${["increase", "decrease", "no_change"]
            .map((d) => `<option value="${d}" ${d === b.direction ? "selected" : ""}>${d}</option>`)
            .join("")}
        </select>
      </label>
      <label class="field"><span>game group</span>
        <select data-group="${b.id}">
          ${["", "plus", "minus", "zero"]
            .map((g) => `<option value="${g}" ${g === group ? "selected" : ""}>${g || "(none)"}</option>`)
            .join("")}
        </select>
      </label>
      <canvas class="box-chart" data-belief="${i}" width="260" height="90"></canvas>
      <button data-remove="${i}">remove</button>
    </div>`;
}

function renderEditor(): void {
  const s = editor.scenario;
  el("scenario-name").textContent = s.name ?? s.id ?? "(unsaved scenario)";
  el("trader-fields").innerHTML = [
    fieldInput("trader_state.cash", s.trader_state.cash),
    fieldInput("trader_state.leverage", s.trader_state.leverage, "number"),
    fieldInput("trader_state.threshold", s.trader_state.threshold, "number"),
  ].join("");
  el("beliefs").innerHTML = s.beliefs.map(beliefRow).join("");

  for (const input of document.querySelectorAll<HTMLInputElement>("[data-path]")) {
    input.onchange = () => {
      const numeric = input.type === "number";
      editor.setField(input.dataset.path!, numeric ? Number(input.value) : input.value);
      renderEditor();
    };
  }
  for (const select of document.querySelectorAll<HTMLSelectElement>("[data-group]")) {
    select.onchange = () => {
      setGroup(select.dataset.group!, select.value as "" | "plus" | "minus" | "zero");
      renderEditor();
    };
  }
  for (const btn of document.querySelectorAll<HTMLButtonElement>("[data-remove]")) {
    btn.onclick = () => {
      editor.removeBelief(Number(btn.dataset.remove));
      renderEditor();
    };
  }
  for (const canvas of document.querySelectorAll<HTMLCanvasElement>(".box-chart")) {
    const i = Number(canvas.dataset.belief);
    const b = s.beliefs[i];
    renderPriceChart(canvas, {
      prices: [Number(b.price_now)],
      band: { min: Number(b.price_min), max: Number(b.price_max) },
      onBandEdit: (which, value) => {
        editor.setField(`beliefs[${i}].price_${which}`, String(value));
        renderEditor();
      },
    });
  }

  const gate = editor.canSolve;
  for (const btn of document.querySelectorAll<HTMLButtonElement>(".solve-btn")) {
    const model = btn.dataset.model as ModelTag;
    btn.disabled = !gate || (model.startsWith("M2") && !editor.canSolveGame);
  }
  el("validation-summary").textContent = gate
    ? ""
    : [...editor.errors.entries()].map(([k, v]) => `${k}: ${v}`).join(" | ");
}

function setGroup(id: string, group: "" | "plus" | "minus" | "zero"): void {
  const s = editor.scenario;
  if (!s.game_inputs) {
    s.game_inputs = {
      groups: { plus: [], minus: [], zero: [] },
      budget_rows: [],
      probabilities: { p_plus: 0.6, p_minus: 0.6, p_zero: 0.5 },
    };
  }
  for (const key of ["plus", "minus", "zero"] as const) {
    s.game_inputs.groups[key] = s.game_inputs.groups[key].filter((x) => x !== id);
  }
  if (group) s.game_inputs.groups[group].push(id);
  editor.dirty.add("game_inputs.groups");
  editor.validate();
}

/** Strategy panel: render the API response fields verbatim. */
function renderResult(record: SolveRecord): void {
  const result = record.result;
  const lines: string[] = [];
  const bars: { label: string; volume: number; kind: "buy" | "short" }[] = [];
  if (result.model.startsWith("M1")) {
    const r = result as M1Result;
    lines.push(`model ${r.model} (${r.solver})`);
    for (const [role, vols] of Object.entries(r.volumes)) {
      for (const [iid, v] of Object.entries(vols)) {
        lines.push(`${role} ${iid}: ${v}`);
        bars.push({
          label: `${role} ${iid}`,
          volume: v,
          kind: role.includes("buy") ? "buy" : "short",
        });
      }
    }
    lines.push(`expected welfare increment: ${r.expected_welfare_increment}`);
    lines.push(`expected welfare: ${r.expected_welfare}`);
    lines.push(`bound: ${r.bound}`);
  } else {
    const r = result as M2BoundResult | M2ExactResult;
    lines.push(`model ${r.model}`);
    for (const [iid, v] of Object.entries(r.x)) {
      lines.push(`buy ${iid}: ${v}`);
      bars.push({ label: `buy ${iid}`, volume: v, kind: "buy" });
    }
    for (const [iid, v] of Object.entries(r.short_positions ?? {})) {
      lines.push(`short ${iid}: ${v}`);
      bars.push({ label: `short ${iid}`, volume: v, kind: "short" });
    }
    lines.push(`expected value: ${r.value}`);
    for (const slack of r.residual_cash ?? []) {
      lines.push(`residual cash: ${slack}`);
    }
  }
  lines.push(`wall time: ${record.wall_time_ms.toFixed(1)} ms`);
  el("result-panel").innerHTML = lines.map((l) => `<div>${l}</div>`).join("");
  renderStrategyBars(el<HTMLCanvasElement>("strategy-bars"), bars);
}

function renderHistory(scenarioId: string): void {
  const rows = history.entries(scenarioId).map((rec) => {
    const value =
      "value" in rec.result
        ? rec.result.value
        : (rec.result as M1Result).expected_welfare_increment;
    return `<li>${rec.model} -> ${value}</li>`;
  });
  el("history-list").innerHTML = rows.join("");
}

async function persistScenario(): Promise<Scenario> {
  const saved = await api.saveScenario(editor.toJSON());
  editor.load(saved);
  renderEditor();
  return saved;
}

async function solve(model: ModelTag): Promise<void> {
  if (solving) {
    solveQueue.push(model); // one in-flight solve per scenario; later requests wait
    return;
  }
  solving = true;
  try {
    const saved = await persistScenario();
    const record = await api.solve(saved.id!, model, model.startsWith("M1") ? { mode: "exact" } : {});
    history.push(record);
    renderResult(record);
    renderHistory(record.scenario_id);
    el("banner").textContent = "";
  } catch (err) {
    if (err instanceof ApiError && err.kind === "validation") {
      editor.applyServerError(err.field, err.message);
      renderEditor();
    } else {
      el("banner").innerHTML =
        `request failed: ${err instanceof Error ? err.message : String(err)} ` +
        `<button id="retry" data-model="${model}">retry</button>`;
      el<HTMLButtonElement>("retry").onclick = () => void solve(model);
    }
  } finally {
    solving = false;
    const queued = solveQueue.shift();
    if (queued) void solve(queued);
  }
}

// ---------------------------------------------------------------------------
// prediction game view
// ---------------------------------------------------------------------------

const GAME_LENGTH = 30;

function renderGame(): void {
  const seg = game.current;
  const status = el("game-status");
  if (game.finished) {
    status.textContent = "session finished";
    void game.estimate().then((est) => {
      el("game-estimate").textContent =
        `estimate: ${est.p_hat.toFixed(3)} over ${est.n_trials} trials, ` +
        `95% CI [${est.ci95[0].toFixed(3)}, ${est.ci95[1].toFixed(3)}]`;
    });
    return;
  }
  if (!seg) {
    status.textContent = "no session";
    return;
  }
  status.textContent = `segment ${seg.index + 1}/${seg.total}, running frequency ${game.runningFrequency.toFixed(3)}`;
  renderPriceChart(el<HTMLCanvasElement>("game-chart"), {
    prices: seg.prices.map(Number),
  });
}

async function startGame(): Promise<void> {
  const prices = demoWalk(400, 20240809);
  await game.open({ prices, length: GAME_LENGTH, trials: 25, seed: 7 });
  el("game-estimate").textContent = "";
  renderGame();
}

async function answerGame(call: "up" | "not_up"): Promise<void> {
  const reply = await game.answer(call);
  el("game-reveal").textContent =
    `actual: ${reply.actual} at ${reply.actual_price} (${reply.correct ? "correct" : "wrong"})`;
  renderGame();
}

// ---------------------------------------------------------------------------
// bootstrap
// ---------------------------------------------------------------------------

export function boot(): void {
  editor.load(demoScenario());
  renderEditor();
  el<HTMLButtonElement>("load-demo").onclick = () => {
    editor.load(demoScenario());
    renderEditor();
  };
  el<HTMLButtonElement>("save-scenario").onclick = () => void persistScenario();
  for (const btn of document.querySelectorAll<HTMLButtonElement>(".solve-btn")) {
    btn.onclick = () => void solve(btn.dataset.model as ModelTag);
  }
  el<HTMLButtonElement>("game-start").onclick = () => void startGame();
  el<HTMLButtonElement>("game-up").onclick = () => void answerGame("up");
  el<HTMLButtonElement>("game-down").onclick = () => void answerGame("not_up");

  void api
    .listScenarios()
    .then((scenarios) => {
      if (scenarios.length > 0) {
        editor.load(scenarios[scenarios.length - 1]);
        renderEditor();
        renderHistory(editor.scenario.id ?? "");
      }
    })
    .catch(() => {
      el("banner").textContent = "engine API unreachable; editing offline";
    });
}

if (typeof document !== "undefined" && document.getElementById("app-root")) {
  boot();
}
