"""HTTP API over the scenario store, solver dispatch, and ability sessions."""

from __future__ import annotations

import threading
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .ability import TimeSeries, direction_of, estimate_ability, sample_segments
from .errors import (
    EmptyExchangePolyhedron,
    EngineError,
    IncompatibleBudget,
    InfeasibleProblem,
    MissingInputs,
    NotFound,
    NumericalFailure,
    RepairFailure,
    TraderPolyhedronInfeasible,
    ValidationError,
)
from .runner import run_model
from .schema import money_str
from .store import ScenarioStore

INFEASIBLE_ERRORS = (InfeasibleProblem, EmptyExchangePolyhedron,
                     IncompatibleBudget, TraderPolyhedronInfeasible)


class AbilitySession:
    def __init__(self, series: TimeSeries, length: int, trials: int, seed: int):
        self.id = uuid.uuid4().hex
        self.series = series
        self.length = length
        self.offsets = [int(o) for o in sample_segments(series, length, trials, seed)]
        self.answers: list[bool] = []
        self.lock = threading.Lock()

    @property
    def done(self) -> bool:
        return len(self.answers) >= len(self.offsets)

    def segment_payload(self) -> dict | None:
        """The next unanswered segment; its successor price stays hidden."""
        if self.done:
            return None
        idx = len(self.answers)
        off = self.offsets[idx]
        prices = self.series.prices[off:off + self.length]
        return {
            "index": idx,
            "offset": off,
            "total": len(self.offsets),
            "prices": [money_str(p) for p in prices],
        }

    def answer(self, prediction: str) -> dict:
        if prediction not in ("up", "not_up"):
            raise ValidationError("prediction must be 'up' or 'not_up'",
                                  field="prediction")
        with self.lock:
            if self.done:
                raise ValidationError("session already finished", field="prediction")
            off = self.offsets[len(self.answers)]
            end = off + self.length - 1
            actual = direction_of(self.series.prices[end], self.series.prices[end + 1])
            correct = prediction == actual
            self.answers.append(correct)
            return {
                "actual": actual,
                "actual_price": money_str(self.series.prices[end + 1]),
                "correct": correct,
                "answered": len(self.answers),
                "total": len(self.offsets),
                "running_frequency": sum(self.answers) / len(self.answers),
                "done": self.done,
                "next": self.segment_payload(),
            }

    def estimate_payload(self) -> dict:
        if not self.answers:
            raise ValidationError("no answers recorded yet", field="")
        k = sum(self.answers)
        n = len(self.answers)

        class _R:  # estimate_ability only reads .correct
            def __init__(self, c):
                self.correct = c

        est = estimate_ability([_R(c) for c in self.answers])
        return {"p_hat": est.p_hat, "n_trials": est.n_trials,
                "ci95": [est.ci95[0], est.ci95[1]], "correct": k, "total": n}


def create_app(store_path: str, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="traderdesk engine")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    store = ScenarioStore(store_path)
    app.state.store = store
    app.state.sessions: dict[str, AbilitySession] = {}
    app.state.sessions_lock = threading.Lock()

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        if isinstance(exc, ValidationError):
            return JSONResponse(status_code=400, content={
                "error": {"type": "validation", "field": exc.field, "message": str(exc)}})
        if isinstance(exc, NotFound):
            return JSONResponse(status_code=404, content={
                "error": {"type": "not_found", "message": str(exc)}})
        if isinstance(exc, MissingInputs):
            return JSONResponse(status_code=422, content={
                "error": {"type": "missing_inputs", "section": exc.section,
                          "message": str(exc)}})
        if isinstance(exc, INFEASIBLE_ERRORS):
            row = getattr(exc, "row", None)
            return JSONResponse(status_code=422, content={
                "error": {"type": "infeasible", "row": row, "message": str(exc)}})
        if isinstance(exc, (NumericalFailure, RepairFailure)):
            return JSONResponse(status_code=500, content={
                "error": {"type": "solver_failure", "message": str(exc)}})
        return JSONResponse(status_code=500, content={
            "error": {"type": "engine_error", "message": str(exc)}})

    # -- scenarios ----------------------------------------------------------

    @app.post("/api/scenarios")
    async def create_scenario(payload: dict):
        return store.save_scenario(payload)

    @app.get("/api/scenarios")
    async def list_scenarios():
        return store.list_scenarios()

    @app.get("/api/scenarios/{scenario_id}")
    async def get_scenario(scenario_id: str):
        return store.load_scenario(scenario_id)

    @app.delete("/api/scenarios/{scenario_id}")
    async def delete_scenario(scenario_id: str):
        store.delete_scenario(scenario_id)
        return {"deleted": scenario_id}

    @app.post("/api/scenarios/{scenario_id}/solve")
    def solve_scenario(scenario_id: str, body: dict):
        scenario = store.load_scenario(scenario_id)
        model = body.get("model", "")
        options = body.get("options") or {}
        started = time.perf_counter()
        result = run_model(scenario, model, options)
        wall_ms = (time.perf_counter() - started) * 1000.0
        record = store.save_solve({
            "scenario_id": scenario_id,
            "model": model,
            "options": options,
            "result": result,
            "wall_time_ms": wall_ms,
        })
        return record

    @app.get("/api/solves/{solve_id}")
    async def get_solve(solve_id: str):
        return store.load_solve(solve_id)

    @app.get("/api/scenarios/{scenario_id}/solves")
    async def list_solves(scenario_id: str):
        return store.list_solves(scenario_id)

    # -- ability sessions ---------------------------------------------------

    @app.post("/api/ability/sessions")
    async def open_session(body: dict):
        prices = body.get("prices")
        if not prices or len(prices) < 3:
            raise ValidationError("prices: need at least 3 points", field="prices")
        try:
            values = [float(p) for p in prices]
        except (TypeError, ValueError):
            raise ValidationError("prices: must be numbers", field="prices")
        timestamps = body.get("timestamps") or list(range(len(values)))
        try:
            series = TimeSeries(np.array(timestamps, dtype=float),
                                np.array(values))
        except ValueError as exc:
            raise ValidationError(f"prices: {exc}", field="prices")
        length = int(body.get("length", 20))
        trials = int(body.get("trials", 20))
        seed = int(body.get("seed", 0))
        session = AbilitySession(series, length, trials, seed)
        with app.state.sessions_lock:
            app.state.sessions[session.id] = session
        return {"id": session.id, "length": length, "trials": len(session.offsets),
                "segment": session.segment_payload()}

    def _session(session_id: str) -> AbilitySession:
        with app.state.sessions_lock:
            session = app.state.sessions.get(session_id)
        if session is None:
            raise NotFound(f"ability session {session_id!r} not found")
        return session

    @app.post("/api/ability/sessions/{session_id}/answer")
    async def answer(session_id: str, body: dict):
        return _session(session_id).answer(body.get("prediction", ""))

    @app.get("/api/ability/sessions/{session_id}/estimate")
    async def estimate(session_id: str):
        return _session(session_id).estimate_payload()

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
