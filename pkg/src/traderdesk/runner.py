"""Model dispatch: scenario dict in, deterministic result dict out.

The CLI and the HTTP API both call :func:`run_model` and serialize with
``canonical_json``, so the two surfaces emit byte-identical results.
"""

from __future__ import annotations

from typing import Mapping

from .errors import MissingInputs, ValidationError
from .expectations import classify_positive
from .model1 import (
    EXACT,
    ROUNDED,
    build_problem1,
    build_problem2,
    build_problem4,
    solve_model1,
)
from .model2 import solve_maximin_exact, solve_maximin_upper_bound
from .schema import (
    MODELS,
    beliefs_of,
    futures_of,
    game_of,
    money_str,
    options_of,
    trader_state_of,
)


def _m1_result(model: str, problem: int, mode: str, result) -> dict:
    return {
        "model": model,
        "problem": problem,
        "mode": mode,
        "volumes": {role: dict(sorted(vols.items()))
                    for role, vols in sorted(result.volumes.items())},
        "expected_welfare_increment": money_str(result.expected_welfare_increment),
        "expected_welfare": money_str(result.expected_welfare),
        "welfare_now": money_str(result.expected_welfare
                                 - result.expected_welfare_increment),
        "bound": money_str(result.bound),
        "solver": result.solver,
    }


def run_model(scenario: Mapping, model: str, options: Mapping | None = None) -> dict:
    """Solve ``scenario`` under ``model``; result dicts are deterministic."""
    options = dict(options or {})
    if model not in MODELS:
        raise ValidationError(f"model must be one of {MODELS}, got {model!r}",
                              field="model")

    if model.startswith("M1"):
        mode = options.get("mode", EXACT)
        if mode not in (EXACT, ROUNDED):
            raise ValidationError(f"options.mode must be exact or rounded, got {mode!r}",
                                  field="options.mode")
        state = trader_state_of(scenario)
        beliefs = beliefs_of(scenario)
        held = state.holdings
        if model == "M1P1":
            partition = classify_positive(beliefs, held=held)
            inst = build_problem1(state, beliefs, partition)
            problem = 1
        elif model == "M1P2":
            partition = classify_positive(beliefs, held=held)
            inst = build_problem2(state, beliefs, partition)
            problem = 2
        else:
            inst = build_problem4(state, beliefs, futures_of(scenario),
                                  options_of(scenario))
            problem = 4
        result = solve_model1(inst, mode)
        return _m1_result(model, problem, mode, result)

    game = game_of(scenario)
    shorts = (scenario.get("game_inputs") or {}).get("short_positions") or {}
    if model == "M2Bound":
        saddle = solve_maximin_upper_bound(game)
        return {
            "model": "M2Bound",
            "value": money_str(saddle.value),
            "x": {lbl: int(round(v)) if abs(v - round(v)) < 1e-6 else float(v)
                  for lbl, v in zip(game.x_labels, saddle.x_star)},
            "w": {lbl: money_str(v)
                  for lbl, v in zip(game.w_labels, saddle.w_star.w)},
            "h": [money_str(v) for v in saddle.h_star],
            "pi": [money_str(v) for v in saddle.pi_star],
            "short_positions": dict(sorted(shorts.items())),
            "residual_cash": _budget_slacks(game, saddle.x_star),
        }
    result = solve_maximin_exact(game)
    return {
        "model": "M2Exact",
        "value": money_str(result.value),
        "x": {lbl: int(round(v)) for lbl, v in zip(game.x_labels, result.x_star)},
        "relaxation_bound": money_str(result.relaxation_bound),
        "nodes_explored": result.nodes_explored,
        "short_positions": dict(sorted(shorts.items())),
        "residual_cash": _budget_slacks(game, result.x_star),
    }


def _budget_slacks(game, x) -> list[str]:
    """Unspent budget per balance row: cash the game value does not count.

    The payoff tracks only the chosen volumes' mark-to-market, so leftover
    cash is reported alongside it for the full welfare picture.
    """
    slacks = []
    for i in range(game.n_x, game.trader_matrix.shape[0]):
        slack = float(game.trader_matrix[i] @ x - game.trader_rhs[i])
        slacks.append(money_str(slack))
    return slacks


def required_sections(scenario: Mapping, model: str):
    """Raise MissingInputs early when the model's section is absent."""
    if model.startswith("M2") and not scenario.get("game_inputs"):
        raise MissingInputs("scenario has no game_inputs section",
                            section="game_inputs")
