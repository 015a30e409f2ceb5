"""Scenario JSON schema: validation, normalization, and domain conversion.

Money fields travel as decimal strings so fixtures never pick up float
round-trip noise; numbers are accepted on input and canonicalized on save.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from .errors import MissingInputs, ValidationError
from .expectations import (
    Direction,
    FuturesSpec,
    OptionKind,
    OptionsSpec,
    SecurityBelief,
    Side,
)
from .model1 import TraderState
from .model2 import BudgetRow, GameSpec, PriceBox, build_game, build_game_with_holdings

SCHEMA_VERSION = 1

MODELS = ("M1P1", "M1P2", "M1P4", "M2Exact", "M2Bound")

_DIRECTIONS = {d.value for d in Direction}
_SIDES = {s.value for s in Side}
_KINDS = {k.value for k in OptionKind}


def money_str(x: float) -> str:
    """Canonical decimal string for a float amount.

    12 significant digits: far beyond money resolution, well inside solver
    tolerances, and free of float repr noise.
    """
    f = float(x)
    if f == 0.0:
        return "0"
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    text = f"{f:.12g}"
    return text[:-2] if text.endswith(".0") else text


def canonical_json(payload: Any) -> str:
    """Deterministic JSON text; the CLI and API both emit exactly this."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _money(value, fieldpath: str, allow_negative: bool = False) -> str:
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{fieldpath}: not a number: {value!r}", field=fieldpath)
    if not allow_negative and f < 0:
        raise ValidationError(f"{fieldpath}: must be nonnegative, got {value}",
                              field=fieldpath)
    if isinstance(value, str):
        return value
    return money_str(f)


def money_value(text) -> float:
    return float(text)


def _number(value, fieldpath: str, lo=None, hi=None) -> float:
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{fieldpath}: not a number: {value!r}", field=fieldpath)
    if lo is not None and f < lo:
        raise ValidationError(f"{fieldpath}: must be >= {lo}, got {f}", field=fieldpath)
    if hi is not None and f > hi:
        raise ValidationError(f"{fieldpath}: must be <= {hi}, got {f}", field=fieldpath)
    return f


def _int(value, fieldpath: str, lo=0) -> int:
    try:
        i = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{fieldpath}: not an integer: {value!r}", field=fieldpath)
    if i < lo:
        raise ValidationError(f"{fieldpath}: must be >= {lo}, got {i}", field=fieldpath)
    return i


def _belief_fields(entry: Mapping, path: str) -> dict:
    if "id" not in entry:
        raise ValidationError(f"{path}.id: required", field=f"{path}.id")
    direction = entry.get("direction")
    if direction not in _DIRECTIONS:
        raise ValidationError(
            f"{path}.direction: must be one of {sorted(_DIRECTIONS)}, got {direction!r}",
            field=f"{path}.direction")
    out = {
        "id": str(entry["id"]),
        "direction": direction,
        "p": _number(entry.get("p"), f"{path}.p", lo=1e-12, hi=1.0),
        "price_min": _money(entry.get("price_min"), f"{path}.price_min"),
        "price_max": _money(entry.get("price_max"), f"{path}.price_max"),
    }
    if float(out["price_min"]) > float(out["price_max"]):
        raise ValidationError(f"{path}.price_min: exceeds price_max",
                              field=f"{path}.price_min")
    return out


def validate_scenario(payload: Mapping) -> dict:
    """Check a scenario payload and return its normalized form."""
    if not isinstance(payload, Mapping):
        raise ValidationError("scenario must be an object", field="")
    version = payload.get("schema_version", SCHEMA_VERSION)
    if int(version) != SCHEMA_VERSION:
        raise ValidationError(f"schema_version: unsupported {version}",
                              field="schema_version")
    out: dict = {"schema_version": SCHEMA_VERSION}
    if "id" in payload and payload["id"] is not None:
        out["id"] = str(payload["id"])
    if payload.get("name"):
        out["name"] = str(payload["name"])

    ts = payload.get("trader_state") or {}
    holdings = {}
    for key, vol in (ts.get("holdings") or {}).items():
        holdings[str(key)] = _int(vol, f"trader_state.holdings.{key}")
    out["trader_state"] = {
        "cash": _money(ts.get("cash", 0), "trader_state.cash"),
        "holdings": holdings,
        "leverage": _number(ts.get("leverage", 0.0), "trader_state.leverage", lo=0.0),
        "threshold": _number(ts.get("threshold", 1.0), "trader_state.threshold",
                             lo=1e-12),
    }

    beliefs = []
    seen = set()
    for i, entry in enumerate(payload.get("beliefs") or []):
        path = f"beliefs[{i}]"
        b = _belief_fields(entry, path)
        b["price_now"] = _money(entry.get("price_now"), f"{path}.price_now")
        if not (float(b["price_min"]) <= float(b["price_now"]) <= float(b["price_max"])):
            raise ValidationError(f"{path}.price_now: outside [price_min, price_max]",
                                  field=f"{path}.price_now")
        if b["id"] in seen:
            raise ValidationError(f"{path}.id: duplicate {b['id']!r}", field=f"{path}.id")
        seen.add(b["id"])
        beliefs.append(b)
    out["beliefs"] = beliefs

    futures = []
    for i, entry in enumerate(payload.get("futures") or []):
        path = f"futures[{i}]"
        f = _belief_fields(entry, path)
        f["strike_basis"] = _money(entry.get("strike_basis"), f"{path}.strike_basis")
        f["carry_cost"] = _money(entry.get("carry_cost", 0), f"{path}.carry_cost")
        side = entry.get("side", "buy")
        if side not in _SIDES:
            raise ValidationError(f"{path}.side: must be buy or sell, got {side!r}",
                                  field=f"{path}.side")
        f["side"] = side
        f["held_volume"] = _int(entry.get("held_volume", 0), f"{path}.held_volume")
        threshold = float(f["strike_basis"]) + float(f["carry_cost"])
        f["price_now"] = _money(entry.get("price_now", money_str(threshold)),
                                f"{path}.price_now")
        if f["id"] in seen:
            raise ValidationError(f"{path}.id: duplicate {f['id']!r}", field=f"{path}.id")
        seen.add(f["id"])
        futures.append(f)
    out["futures"] = futures

    options = []
    for i, entry in enumerate(payload.get("options") or []):
        path = f"options[{i}]"
        o = _belief_fields(entry, path)
        o["strike"] = _money(entry.get("strike"), f"{path}.strike")
        o["premium"] = _money(entry.get("premium", 0), f"{path}.premium")
        kind = entry.get("kind", "call")
        if kind not in _KINDS:
            raise ValidationError(f"{path}.kind: must be call or put, got {kind!r}",
                                  field=f"{path}.kind")
        o["kind"] = kind
        o["held_volume"] = _int(entry.get("held_volume", 0), f"{path}.held_volume")
        threshold = float(o["strike"]) + float(o["premium"])
        o["price_now"] = _money(entry.get("price_now", money_str(threshold)),
                                f"{path}.price_now")
        if o["id"] in seen:
            raise ValidationError(f"{path}.id: duplicate {o['id']!r}", field=f"{path}.id")
        seen.add(o["id"])
        options.append(o)
    out["options"] = options

    gi = payload.get("game_inputs")
    if gi:
        groups = gi.get("groups") or {}
        norm_groups = {}
        for key in ("plus", "minus", "zero"):
            ids = [str(x) for x in (groups.get(key) or [])]
            for iid in ids:
                if iid not in seen:
                    raise ValidationError(
                        f"game_inputs.groups.{key}: unknown instrument {iid!r}",
                        field=f"game_inputs.groups.{key}")
            norm_groups[key] = ids
        rows = []
        for i, row in enumerate(gi.get("budget_rows") or []):
            sense = row.get("sense", "<=")
            if sense not in ("<=", ">="):
                raise ValidationError(
                    f"game_inputs.budget_rows[{i}].sense: must be <= or >=",
                    field=f"game_inputs.budget_rows[{i}].sense")
            coeffs = [_number(c, f"game_inputs.budget_rows[{i}].coeffs") for c in
                      (row.get("coeffs") or [])]
            rows.append({
                "coeffs": coeffs,
                "sense": sense,
                "rhs": _money(row.get("rhs"), f"game_inputs.budget_rows[{i}].rhs",
                              allow_negative=True),
            })
        probs = gi.get("probabilities") or {}
        norm_probs = {
            "p_plus": _number(probs.get("p_plus", 0.6), "game_inputs.probabilities.p_plus",
                              lo=1e-12, hi=1.0),
            "p_minus": _number(probs.get("p_minus", 0.6),
                               "game_inputs.probabilities.p_minus", lo=1e-12, hi=1.0),
            "p_zero": _number(probs.get("p_zero", 0.5), "game_inputs.probabilities.p_zero",
                              lo=1e-12, hi=1.0),
        }
        shorts = {}
        for key, vol in (gi.get("short_positions") or {}).items():
            shorts[str(key)] = _int(vol, f"game_inputs.short_positions.{key}")
        out["game_inputs"] = {
            "groups": norm_groups,
            "budget_rows": rows,
            "probabilities": norm_probs,
        }
        if shorts:
            out["game_inputs"]["short_positions"] = shorts
    return out


# ---------------------------------------------------------------------------
# Domain conversion
# ---------------------------------------------------------------------------

def trader_state_of(scenario: Mapping) -> TraderState:
    ts = scenario["trader_state"]
    return TraderState(
        cash=money_value(ts["cash"]),
        holdings=ts["holdings"],
        leverage=ts["leverage"],
        threshold=ts["threshold"],
    )


def beliefs_of(scenario: Mapping) -> list[SecurityBelief]:
    return [
        SecurityBelief(
            instrument_id=b["id"],
            price_now=money_value(b["price_now"]),
            direction=Direction(b["direction"]),
            p=b["p"],
            price_min=money_value(b["price_min"]),
            price_max=money_value(b["price_max"]),
        )
        for b in scenario["beliefs"]
    ]


def futures_of(scenario: Mapping) -> list[FuturesSpec]:
    out = []
    for f in scenario["futures"]:
        belief = SecurityBelief(
            instrument_id=f["id"],
            price_now=money_value(f["price_now"]),
            direction=Direction(f["direction"]),
            p=f["p"],
            price_min=money_value(f["price_min"]),
            price_max=money_value(f["price_max"]),
        )
        out.append(FuturesSpec(
            strike_basis=money_value(f["strike_basis"]),
            carry_cost=money_value(f["carry_cost"]),
            side=Side(f["side"]),
            belief=belief,
            held_volume=f["held_volume"],
        ))
    return out


def options_of(scenario: Mapping) -> list[OptionsSpec]:
    out = []
    for o in scenario["options"]:
        belief = SecurityBelief(
            instrument_id=o["id"],
            price_now=money_value(o["price_now"]),
            direction=Direction(o["direction"]),
            p=o["p"],
            price_min=money_value(o["price_min"]),
            price_max=money_value(o["price_max"]),
        )
        out.append(OptionsSpec(
            strike=money_value(o["strike"]),
            premium=money_value(o["premium"]),
            kind=OptionKind(o["kind"]),
            belief=belief,
            held_volume=o["held_volume"],
        ))
    return out


def game_of(scenario: Mapping) -> GameSpec:
    """Build the securities game from ``game_inputs``.

    When no budget rows are given, the default cash balance applies: spending
    at current prices cannot exceed cash times (1 + leverage), the borrowed
    half being the short-sale capacity the leverage rate allows.
    """
    gi = scenario.get("game_inputs")
    if not gi:
        raise MissingInputs("scenario has no game_inputs section", section="game_inputs")
    by_id = {b["id"]: b for b in scenario["beliefs"]}
    groups = {}
    for key in ("plus", "minus", "zero"):
        boxes = []
        for iid in gi["groups"].get(key, []):
            if iid not in by_id:
                raise MissingInputs(
                    f"game group references {iid!r} with no security belief",
                    section="beliefs")
            b = by_id[iid]
            boxes.append(PriceBox(
                instrument_id=iid,
                anchor=money_value(b["price_now"]),
                low=money_value(b["price_min"]),
                high=money_value(b["price_max"]),
            ))
        groups[key] = boxes

    x_ids = [box.instrument_id for key in ("plus", "minus", "zero")
             for box in groups[key]]
    rows = []
    for row in gi.get("budget_rows") or []:
        coeffs = row["coeffs"]
        if len(coeffs) != len(x_ids):
            raise MissingInputs(
                f"budget row has {len(coeffs)} coefficients for {len(x_ids)} "
                "game instruments", section="game_inputs.budget_rows")
        rows.append(BudgetRow(coeffs=tuple(coeffs), rhs=money_value(row["rhs"]),
                              sense=row["sense"]))
    if not rows:
        st = scenario["trader_state"]
        cash = money_value(st["cash"])
        budget = cash * (1.0 + st["leverage"])
        prices = tuple(money_value(by_id[iid]["price_now"]) for iid in x_ids)
        rows = [BudgetRow(coeffs=prices, rhs=budget, sense="<=")]

    probs = gi["probabilities"]
    holdings = {k: v for k, v in scenario["trader_state"]["holdings"].items()
                if k in set(x_ids) and v > 0}
    if holdings:
        return build_game_with_holdings(groups["plus"], groups["minus"], groups["zero"],
                                        rows, holdings, p_plus=probs["p_plus"],
                                        p_minus=probs["p_minus"], p_zero=probs["p_zero"])
    return build_game(groups["plus"], groups["minus"], groups["zero"], rows,
                      p_plus=probs["p_plus"], p_minus=probs["p_minus"],
                      p_zero=probs["p_zero"])
