"""Expected-value integer programs for portfolio rebalancing.

Three builders assemble LinearProgram instances from a trader state and
beliefs:

* ``build_problem1`` — rebalance the existing portfolio along the trader's
  intuition sets: buys in the up set, sells and short borrows in the down set,
  per-security sale caps.
* ``build_problem2`` — full re-optimization over the positive-expectation hat
  sets: buy anything promising, force-sell every held non-hat security, borrow
  the rest short.  No sale caps exist here by construction.
* ``build_problem4`` — problem 2 extended with futures and options volumes;
  derivative cash flows enter the welfare and leverage rows exactly as the
  rebalancing model prescribes.

All three share two rows: the welfare threshold (expected next-moment welfare
must stay above ``threshold`` times today's welfare) and the leverage cap on
borrowed value.  Objective constants (the hold terms) are carried on the
instance so reported increments match the expected welfare change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    InconsistentPartition,
    InfeasibleProblem,
    MissingBelief,
    NumericalFailure,
)
from .expectations import (
    FuturesSpec,
    OptionsSpec,
    Partition,
    SecurityBelief,
    Side,
    classify_positive,
    expected_price,
    futures_per_unit,
    option_per_unit,
)
from .lp_solver import LinearProgram, solve_lp
from .milp import ROUND_DOWN, IntegerMask, relax_and_round, solve_milp

EXACT = "exact"
ROUNDED = "rounded"

ROLE_BUY = "buy"
ROLE_SELL = "sell"
ROLE_BORROW = "borrow"
ROLE_FUTURES_BUY = "futures_buy"
ROLE_FUTURES_BORROW = "futures_borrow"
ROLE_OPTION_BUY = "option_buy"
ROLE_OPTION_BORROW = "option_borrow"

WELFARE_ROW = "welfare_threshold"
LEVERAGE_ROW = "leverage"


@dataclass(frozen=True)
class TraderState:
    """Cash, holdings, leverage multiplier and welfare threshold at moment t."""

    cash: float
    holdings: Mapping[str, int] = field(default_factory=dict)
    leverage: float = 0.0
    threshold: float = 1.0

    def __post_init__(self):
        if self.cash < 0:
            raise InfeasibleProblem("cash must be nonnegative")
        if self.threshold <= 0:
            raise InfeasibleProblem("threshold must be positive")
        if self.leverage < 0:
            raise InfeasibleProblem("leverage must be nonnegative")
        clean = {k: int(v) for k, v in dict(self.holdings).items() if int(v) != 0}
        if any(v < 0 for v in clean.values()):
            raise InfeasibleProblem("holdings must be nonnegative")
        object.__setattr__(self, "holdings", clean)

    def welfare(self, price_of: Mapping[str, float]) -> float:
        total = self.cash
        for iid, v in self.holdings.items():
            if iid not in price_of:
                raise MissingBelief(f"no price for held instrument {iid!r}")
            total += v * price_of[iid]
        return total


@dataclass(frozen=True)
class VarRole:
    role: str
    instrument_id: str


@dataclass
class ProblemInstance:
    lp: LinearProgram
    mask: IntegerMask
    variable_map: tuple[VarRole, ...]
    row_labels: tuple[str, ...]
    objective_constant: float
    provenance: int  # 1 | 2 | 4
    welfare_now: float

    def coefficient(self, role: str, instrument_id: str) -> float:
        for j, vr in enumerate(self.variable_map):
            if vr.role == role and vr.instrument_id == instrument_id:
                return float(self.lp.objective[j])
        raise KeyError(f"no variable {role}:{instrument_id}")

    def row(self, label: str) -> tuple[np.ndarray, str, float]:
        i = self.row_labels.index(label)
        return (self.lp.constraint_matrix[i], self.lp.constraint_senses[i],
                float(self.lp.rhs[i]))


@dataclass
class StrategyResult:
    volumes: dict[str, dict[str, int]]
    expected_welfare_increment: float
    expected_welfare: float
    solver: str
    bound: float
    objective_value: float
    nodes_explored: int = 0


def _belief_index(beliefs: Sequence[SecurityBelief]) -> dict[str, SecurityBelief]:
    return {b.instrument_id: b for b in beliefs}


def _require_beliefs(ids, index, where):
    missing = [i for i in ids if i not in index]
    if missing:
        raise MissingBelief(f"{where}: no belief for {missing}")


def build_problem1(state: TraderState, beliefs: Sequence[SecurityBelief],
                   partition: Partition, cash_discount: float = 1.0) -> ProblemInstance:
    """Rebalancing program over the trader's intuition partition."""
    index = _belief_index(beliefs)
    _require_beliefs(partition.all_ids, index, "problem 1 partition")
    _require_beliefs(state.holdings, index, "problem 1 holdings")
    if not set(state.holdings) <= set(partition.all_ids):
        raise InconsistentPartition("every held security must appear in the partition")

    d = cash_discount
    ms = {i: expected_price(index[i]) for i in partition.all_ids}
    s = {i: index[i].price_now for i in partition.all_ids}
    v = {i: state.holdings.get(i, 0) for i in partition.all_ids}
    welfare_now = state.welfare({i: s[i] for i in state.holdings})

    variables = (
        [VarRole(ROLE_BUY, i) for i in partition.plus]
        + [VarRole(ROLE_SELL, i) for i in partition.minus]
        + [VarRole(ROLE_BORROW, i) for i in partition.minus]
    )
    n = len(variables)
    obj = np.zeros(n)
    welfare = np.zeros(n)
    lever = np.zeros(n)
    for j, vr in enumerate(variables):
        i = vr.instrument_id
        if vr.role == ROLE_BUY:
            obj[j] = ms[i] - s[i]
            welfare[j] = ms[i] - d * s[i]
            lever[j] = s[i]
        elif vr.role == ROLE_SELL:
            obj[j] = s[i] - ms[i]
            welfare[j] = d * s[i] - ms[i]
            lever[j] = -s[i]
        else:  # borrow
            obj[j] = s[i] - ms[i]
            welfare[j] = d * s[i] - ms[i]
            lever[j] = s[i]
    constant = sum(v[i] * (ms[i] - s[i]) for i in partition.all_ids)
    welfare_const = d * state.cash + sum(v[i] * ms[i] for i in partition.all_ids)

    rows = [welfare, lever]
    senses = [">=", "<="]
    rhs = [state.threshold * welfare_now - welfare_const,
           state.leverage * welfare_now + state.cash]
    labels = [WELFARE_ROW, LEVERAGE_ROW]
    for i in partition.minus:
        cap = np.zeros(n)
        cap[variables.index(VarRole(ROLE_SELL, i))] = 1.0
        rows.append(cap)
        senses.append("<=")
        rhs.append(float(v[i]))
        labels.append(f"short_cap:{i}")

    lp = LinearProgram(objective=obj, constraint_matrix=np.array(rows).reshape(len(rows), n),
                       constraint_senses=tuple(senses), rhs=np.array(rhs))
    return ProblemInstance(lp, IntegerMask.all_integer(n), tuple(variables),
                           tuple(labels), float(constant), 1, welfare_now)


def build_problem2(state: TraderState, beliefs: Sequence[SecurityBelief],
                   partition: Partition, cash_discount: float = 1.0) -> ProblemInstance:
    """Hat-set re-optimization: buy hats, force-sell non-hat holdings, borrow the rest."""
    index = _belief_index(beliefs)
    _require_beliefs(partition.all_ids, index, "problem 2 partition")
    _require_beliefs(state.holdings, index, "problem 2 holdings")

    d = cash_discount
    ms = {i: expected_price(index[i]) for i in partition.all_ids}
    s = {i: index[i].price_now for i in partition.all_ids}
    welfare_now = state.welfare({i: s[i] for i in state.holdings})

    hold = [i for i in partition.hold if state.holdings.get(i, 0) > 0]
    forced_sale = [i for i in partition.sell if state.holdings.get(i, 0) > 0]

    buys = list(partition.all_hat)
    borrows = list(partition.non_hat)
    variables = ([VarRole(ROLE_BUY, i) for i in buys]
                 + [VarRole(ROLE_BORROW, i) for i in borrows])
    n = len(variables)
    obj = np.zeros(n)
    welfare = np.zeros(n)
    lever = np.zeros(n)
    for j, vr in enumerate(variables):
        i = vr.instrument_id
        if vr.role == ROLE_BUY:
            obj[j] = ms[i] - s[i]
            welfare[j] = ms[i] - d * s[i]
            lever[j] = s[i]
        else:
            obj[j] = s[i] - ms[i]
            welfare[j] = d * s[i] - ms[i]
            lever[j] = s[i]

    constant = sum(state.holdings[i] * (ms[i] - s[i]) for i in hold)
    welfare_const = (d * state.cash
                     + sum(state.holdings[i] * ms[i] for i in hold)
                     + d * sum(state.holdings[i] * s[i] for i in forced_sale))
    sale_cash = sum(state.holdings[i] * s[i] for i in forced_sale)

    rows = [welfare, lever]
    senses = (">=", "<=")
    rhs = np.array([state.threshold * welfare_now - welfare_const,
                    state.leverage * welfare_now + state.cash + sale_cash])
    lp = LinearProgram(objective=obj,
                       constraint_matrix=np.array(rows).reshape(2, n),
                       constraint_senses=senses, rhs=rhs)
    return ProblemInstance(lp, IntegerMask.all_integer(n), tuple(variables),
                           (WELFARE_ROW, LEVERAGE_ROW), float(constant), 2, welfare_now)


def _plain_per_unit(threshold_parts: tuple[float, float], belief: SecurityBelief) -> float:
    """Buy-side threshold-anchored price expectation minus the threshold.

    Used for derivative short borrows, where the premium floor of an option
    buyer does not apply: the borrower repays at the plain market expectation.
    """
    k, c = threshold_parts
    probe = FuturesSpec(k, c, Side.BUY, belief)
    return futures_per_unit(probe)


def build_problem4(state: TraderState, beliefs: Sequence[SecurityBelief],
                   futures: Sequence[FuturesSpec] = (),
                   options: Sequence[OptionsSpec] = (),
                   cash_discount: float = 1.0) -> ProblemInstance:
    """Securities-plus-derivatives program; reduces to problem 2 when both lists are empty."""
    sec_partition = classify_positive(beliefs, held=state.holdings)
    base = build_problem2(state, beliefs, sec_partition, cash_discount)
    if not futures and not options:
        return base

    d = cash_discount
    fut_by_id = {f.instrument_id: f for f in futures}
    opt_by_id = {o.instrument_id: o for o in options}
    fut_part = classify_positive(list(futures),
                                 held={f.instrument_id: f.held_volume for f in futures})
    opt_part = classify_positive(list(options),
                                 held={o.instrument_id: o.held_volume for o in options})

    variables = list(base.variable_map)
    obj = list(base.lp.objective)
    welfare = list(base.lp.constraint_matrix[0])
    lever = list(base.lp.constraint_matrix[1])

    def extend(part, by_id, buy_role, borrow_role, per_unit, parts_of):
        for i in part.all_hat:
            spec = by_id[i]
            h = spec.threshold
            phi = per_unit(spec)
            variables.append(VarRole(buy_role, i))
            obj.append(phi)
            welfare.append(phi + (1.0 - d) * h)
            lever.append(h)
        for i in part.non_hat:
            spec = by_id[i]
            h = spec.threshold
            phi_plain = _plain_per_unit(parts_of(spec), spec.belief)
            variables.append(VarRole(borrow_role, i))
            obj.append(-phi_plain)
            welfare.append(-phi_plain + (d - 1.0) * h)
            lever.append(h)

    extend(fut_part, fut_by_id, ROLE_FUTURES_BUY, ROLE_FUTURES_BORROW,
           futures_per_unit, lambda f: (f.strike_basis, f.carry_cost))
    extend(opt_part, opt_by_id, ROLE_OPTION_BUY, ROLE_OPTION_BORROW,
           option_per_unit, lambda o: (o.strike, o.premium))

    # Held derivative constants: hold terms accrue expectation against the
    # contract threshold; non-hat holdings are sold (proceeds at market price
    # in the welfare row, threshold-priced cash in the leverage row).
    constant = base.objective_constant
    welfare_const_extra = 0.0
    lever_cash_extra = 0.0
    deriv_mark_to_market = 0.0
    for part, by_id in ((fut_part, fut_by_id), (opt_part, opt_by_id)):
        for i, vol in part.held.items():
            if vol <= 0:
                continue
            spec = by_id[i]
            deriv_mark_to_market += vol * spec.belief.price_now
            if i in part.hold:
                ms_held = expected_price(spec.belief)
                constant += vol * (ms_held - spec.threshold)
                welfare_const_extra += vol * ms_held
            else:
                welfare_const_extra += d * vol * spec.belief.price_now
                lever_cash_extra += vol * spec.threshold

    welfare_now = base.welfare_now + deriv_mark_to_market
    n = len(variables)
    sec_rhs_welfare = base.lp.rhs[0]
    sec_rhs_lever = base.lp.rhs[1]
    # Re-derive the rhs with derivative welfare included.
    rhs_welfare = (sec_rhs_welfare
                   + state.threshold * deriv_mark_to_market
                   - welfare_const_extra)
    rhs_lever = (sec_rhs_lever
                 + state.leverage * deriv_mark_to_market
                 + lever_cash_extra)
    lp = LinearProgram(objective=np.array(obj),
                       constraint_matrix=np.array([welfare, lever]).reshape(2, n),
                       constraint_senses=(">=", "<="),
                       rhs=np.array([rhs_welfare, rhs_lever]))
    return ProblemInstance(lp, IntegerMask.all_integer(n), tuple(variables),
                           (WELFARE_ROW, LEVERAGE_ROW), float(constant), 4, welfare_now)


def _diagnose_infeasibility(inst: ProblemInstance) -> str:
    """Name the row whose removal restores feasibility, if unique."""
    lp = inst.lp
    for label in (WELFARE_ROW, LEVERAGE_ROW):
        drop = inst.row_labels.index(label)
        keep = [i for i in range(lp.n_rows) if i != drop]
        probe = LinearProgram(
            objective=np.zeros(lp.n_vars),
            constraint_matrix=lp.constraint_matrix[keep],
            constraint_senses=tuple(lp.constraint_senses[i] for i in keep),
            rhs=lp.rhs[keep],
            var_lower=lp.var_lower,
            var_upper=lp.var_upper,
        )
        if solve_lp(probe).is_optimal:
            return label
    return "multiple"


def solve_model1(inst: ProblemInstance, mode: str = EXACT) -> StrategyResult:
    """Solve a built instance exactly or by relax-and-round."""
    if mode not in (EXACT, ROUNDED):
        raise ValueError(f"mode must be {EXACT!r} or {ROUNDED!r}")
    if inst.lp.n_vars == 0:
        for i, sense in enumerate(inst.lp.constraint_senses):
            r = -inst.lp.rhs[i]
            ok = (sense == "<=" and r <= 1e-6) or (sense == ">=" and r >= -1e-6) \
                or (sense == "=" and abs(r) <= 1e-6)
            if not ok:
                raise InfeasibleProblem(
                    f"problem {inst.provenance} infeasible (row: {inst.row_labels[i]})",
                    row=inst.row_labels[i])
        return StrategyResult(volumes={}, expected_welfare_increment=inst.objective_constant,
                              expected_welfare=inst.welfare_now + inst.objective_constant,
                              solver=mode, bound=inst.objective_constant,
                              objective_value=inst.objective_constant)
    if mode == EXACT:
        out = solve_milp(inst.lp, inst.mask)
    else:
        out = relax_and_round(inst.lp, inst.mask, ROUND_DOWN)
    if out.status == "infeasible":
        row = _diagnose_infeasibility(inst)
        raise InfeasibleProblem(f"problem {inst.provenance} infeasible (row: {row})", row=row)
    if out.status == "unbounded":
        raise NumericalFailure(f"problem {inst.provenance} is unbounded")
    if out.solution is None:
        raise NumericalFailure(f"solver returned no point (status {out.status})")

    x = out.solution
    value = float(inst.lp.objective @ x)
    if abs(value - out.objective_value) > 1e-6 * max(1.0, abs(value)):
        raise NumericalFailure("objective re-evaluation disagrees with solver value")
    volumes: dict[str, dict[str, int]] = {}
    for j, vr in enumerate(inst.variable_map):
        vol = int(round(x[j]))
        if vol:
            volumes.setdefault(vr.role, {})[vr.instrument_id] = vol
    increment = value + inst.objective_constant
    return StrategyResult(
        volumes=volumes,
        expected_welfare_increment=increment,
        expected_welfare=inst.welfare_now + increment,
        solver=mode,
        bound=float(out.bound) + inst.objective_constant,
        objective_value=value,
        nodes_explored=out.nodes_explored,
    )
