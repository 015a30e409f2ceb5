"""The ``engine`` command-line interface.

Exit codes: 0 success, 2 validation error, 3 infeasible problem,
4 solver failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .ability import (
    TimeSeries,
    bernoulli_predictor,
    estimate_ability,
    run_bernoulli_trials,
    run_segment_trials,
    simulate_trading,
)
from .errors import (
    EmptyExchangePolyhedron,
    EngineError,
    IncompatibleBudget,
    InfeasibleProblem,
    LengthTooLong,
    MissingInputs,
    NoTrials,
    NotFound,
    NumericalFailure,
    RepairFailure,
    TraderPolyhedronInfeasible,
    ValidationError,
)
from .runner import run_model
from .schema import canonical_json, money_str, validate_scenario

EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4

_INFEASIBLE = (InfeasibleProblem, EmptyExchangePolyhedron, IncompatibleBudget,
               TraderPolyhedronInfeasible)
_VALIDATION = (ValidationError, MissingInputs, NotFound, LengthTooLong, NoTrials)
_SOLVER = (NumericalFailure, RepairFailure)


def _fail(exc: EngineError) -> "click.exceptions.Exit":
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, _VALIDATION):
        sys.exit(EXIT_VALIDATION)
    if isinstance(exc, _INFEASIBLE):
        sys.exit(EXIT_INFEASIBLE)
    sys.exit(EXIT_SOLVER)


def _load_scenario(path: str) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot read scenario {path}: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    return validate_scenario(payload)


def _emit_result(result: dict, as_json: bool, report_dir: str | None):
    if as_json:
        click.echo(canonical_json(result))
    else:
        if result["model"].startswith("M1"):
            click.echo(f"{result['model']} solved ({result['solver']}):")
            for role, vols in result["volumes"].items():
                for iid, v in vols.items():
                    click.echo(f"  {role} {iid}: {v}")
            click.echo(f"  expected welfare increment: "
                       f"{result['expected_welfare_increment']}")
            click.echo(f"  relaxation bound: {result['bound']}")
        else:
            click.echo(f"{result['model']} solved:")
            for iid, v in result["x"].items():
                click.echo(f"  buy {iid}: {v}")
            for iid, v in result.get("short_positions", {}).items():
                click.echo(f"  short {iid}: {v}")
            click.echo(f"  guaranteed value: {result['value']}")
    if report_dir:
        from .report import write_strategy_report

        paths = write_strategy_report(result, report_dir)
        click.echo(f"report written: {', '.join(str(p) for p in paths)}", err=True)


@click.group()
def main():
    """Decision-support engine for price-taking traders."""


@main.command("solve-m1")
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--problem", type=click.Choice(["1", "2", "4"]), default="2",
              show_default=True)
@click.option("--mode", type=click.Choice(["exact", "rounded"]), default="exact",
              show_default=True)
@click.option("--json", "as_json", is_flag=True, help="print canonical result JSON")
@click.option("--report", "report_dir", type=click.Path(), default=None,
              help="write strategy.csv and strategy.png to this directory")
def solve_m1(scenario_path, problem, mode, as_json, report_dir):
    """Solve one of the expectation-model integer programs."""
    try:
        scenario = _load_scenario(scenario_path)
        result = run_model(scenario, f"M1P{problem}", {"mode": mode})
    except EngineError as exc:
        _fail(exc)
    _emit_result(result, as_json, report_dir)


@main.command("solve-m2")
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--bound", "variant", flag_value="bound", default=True,
              help="relaxed-game saddle point (upper bound)")
@click.option("--exact", "variant", flag_value="exact",
              help="integer maximin via mixed programming")
@click.option("--json", "as_json", is_flag=True, help="print canonical result JSON")
@click.option("--report", "report_dir", type=click.Path(), default=None)
def solve_m2(scenario_path, variant, as_json, report_dir):
    """Solve the trader-vs-exchange game."""
    try:
        scenario = _load_scenario(scenario_path)
        result = run_model(scenario, "M2Bound" if variant == "bound" else "M2Exact")
    except EngineError as exc:
        _fail(exc)
    _emit_result(result, as_json, report_dir)


@main.group()
def ability():
    """Divination-ability testing tools."""


@ability.command("estimate")
@click.option("--series", "series_path", required=True, type=click.Path())
@click.option("--length", type=int, required=True, help="segment length")
@click.option("--trials", type=int, required=True, help="number of segments")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--bot", "bot_p", type=float, default=None,
              help="answer with a synthetic diviner of this hit probability")
@click.option("--exact-ci", is_flag=True, help="exact binomial interval")
@click.option("--json", "as_json", is_flag=True)
def ability_estimate(series_path, length, trials, seed, bot_p, exact_ci, as_json):
    """Run segment trials and estimate the hit probability.

    Without --bot, each sampled segment's tail is shown and you are asked for
    an up/not-up call; the next point then scores the answer.
    """
    try:
        series = TimeSeries.from_csv(series_path)
        if bot_p is not None:
            records = run_bernoulli_trials(series, length, trials, seed, bot_p)
        else:
            def ask(window):
                tail = ", ".join(f"{p:g}" for p in window[-8:])
                click.echo(f"segment tail: ... {tail}")
                answer = click.prompt("will the next point rise? [u]p / [n]ot-up",
                                      type=click.Choice(["u", "n"]))
                return "up" if answer == "u" else "not_up"

            records = run_segment_trials(series, length, trials, seed, ask)
        est = estimate_ability(records, method="exact" if exact_ci else "normal")
    except EngineError as exc:
        _fail(exc)
    payload = {"p_hat": est.p_hat, "n_trials": est.n_trials,
               "ci95": [est.ci95[0], est.ci95[1]]}
    if as_json:
        click.echo(canonical_json(payload))
    else:
        click.echo(f"correct-call frequency: {est.p_hat:.4f} over {est.n_trials} trials")
        click.echo(f"95% interval: [{est.ci95[0]:.4f}, {est.ci95[1]:.4f}]")


@ability.command("simulate")
@click.option("--series", "series_path", required=True, type=click.Path())
@click.option("--p", "p", type=float, required=True,
              help="synthetic diviner hit probability")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--size", type=int, default=1, show_default=True,
              help="shares per step")
@click.option("--costs", type=float, default=0.0, show_default=True,
              help="per-trade cost")
@click.option("--json", "as_json", is_flag=True)
@click.option("--report", "report_dir", type=click.Path(), default=None,
              help="write pnl_trace.csv and pnl_trace.png to this directory")
def ability_simulate(series_path, p, seed, size, costs, as_json, report_dir):
    """Simulate trading with a synthetic diviner and report the P&L trace."""
    try:
        series = TimeSeries.from_csv(series_path)
        predictor = bernoulli_predictor(series, p=p, seed=seed)
        run = simulate_trading(series, predictor, sizing=lambda t: size, costs=costs)
    except EngineError as exc:
        _fail(exc)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    payload = {"steps": run.n_steps, "total_pnl": money_str(run.total),
               "hit_rate": run.hit_rate}
    if as_json:
        click.echo(canonical_json(payload))
    else:
        click.echo(f"steps: {run.n_steps}")
        click.echo(f"total P&L: {run.total:.2f}")
        click.echo(f"hit rate: {run.hit_rate:.3f}")
    if report_dir:
        from .report import write_simulation_report

        paths = write_simulation_report(run, report_dir)
        click.echo(f"report written: {', '.join(str(p) for p in paths)}", err=True)


@main.command()
@click.option("--port", type=int, default=8787, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_path", type=click.Path(), default="engine-store.jsonl",
              show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="serve a built frontend from this directory under /ui")
def serve(port, host, store_path, ui_dir):
    """Run the HTTP API."""
    import uvicorn

    from .service import create_app

    app = create_app(store_path, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
