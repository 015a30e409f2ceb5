"""Integer layer: branch-and-bound over LP relaxations plus relax-and-round.

Branching is most-fractional, node selection best-bound, both with
deterministic tie-breaking, so identical inputs explore identical trees.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, RepairFailure
from .lp_solver import LinearProgram, LpOutcome, solve_lp

INTEGRALITY_TOL = 1e-6
DEFAULT_NODE_LIMIT = 100_000

ROUND_DOWN = "round_down"
NEAREST = "nearest"


@dataclass(frozen=True)
class IntegerMask:
    """Per-variable integrality flags."""

    flags: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple(bool(f) for f in self.flags))

    @classmethod
    def all_integer(cls, n: int) -> "IntegerMask":
        return cls((True,) * n)

    @classmethod
    def none(cls, n: int) -> "IntegerMask":
        return cls((False,) * n)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(np.array(self.flags))

    def __len__(self) -> int:
        return len(self.flags)


@dataclass
class MilpOutcome:
    status: str  # optimal | infeasible | unbounded | gap_limit
    solution: np.ndarray | None = None
    objective_value: float | None = None
    bound: float = np.nan
    nodes_explored: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


def _check_mask(lp: LinearProgram, mask: IntegerMask):
    if len(mask) != lp.n_vars:
        raise DimensionMismatch(f"mask has {len(mask)} flags for {lp.n_vars} variables")


def _snap(solution: np.ndarray, mask: IntegerMask) -> np.ndarray:
    x = solution.copy()
    idx = mask.indices
    x[idx] = np.round(x[idx])
    # keep -0.0 out of reported solutions
    x[x == 0.0] = 0.0
    return x


def _fractional_index(solution: np.ndarray, mask: IntegerMask) -> int | None:
    """Masked variable whose fractional part is closest to 1/2, ties lowest."""
    idx = mask.indices
    if idx.size == 0:
        return None
    frac = np.abs(solution[idx] - np.round(solution[idx]))
    worst = np.max(frac)
    if worst <= INTEGRALITY_TOL:
        return None
    return int(idx[np.argmax(frac)])


def _lex_smaller(a: np.ndarray, b: np.ndarray) -> bool:
    for u, v in zip(a, b):
        if u < v - 1e-12:
            return True
        if u > v + 1e-12:
            return False
    return False


def solve_milp(lp: LinearProgram, mask: IntegerMask,
               node_limit: int = DEFAULT_NODE_LIMIT) -> MilpOutcome:
    """Global optimum over integer-feasible points by branch and bound."""
    _check_mask(lp, mask)
    maximize = lp.sense == "max"
    sign = 1.0 if maximize else -1.0

    root = solve_lp(lp)
    if root.status == "infeasible":
        return MilpOutcome("infeasible", nodes_explored=1)
    if root.status == "unbounded":
        return MilpOutcome("unbounded", nodes_explored=1)

    counter = 0
    heap: list[tuple[float, int, LinearProgram, LpOutcome]] = []
    heapq.heappush(heap, (-sign * root.objective_value, counter, lp, root))
    incumbent: np.ndarray | None = None
    incumbent_value: float | None = None
    nodes = 0

    while heap:
        neg_bound, _, node_lp, node_out = heapq.heappop(heap)
        bound = -neg_bound * sign
        nodes += 1
        if incumbent_value is not None and sign * bound <= sign * incumbent_value + 1e-9:
            break  # best-bound order: nothing left can improve
        if nodes > node_limit:
            return MilpOutcome("gap_limit", solution=incumbent,
                               objective_value=incumbent_value, bound=bound,
                               nodes_explored=nodes)
        branch_j = _fractional_index(node_out.primal, mask)
        if branch_j is None:
            x = _snap(node_out.primal, mask)
            value = float(lp.objective @ x)
            better = incumbent_value is None or sign * value > sign * incumbent_value + 1e-9
            tie = (incumbent_value is not None
                   and abs(value - incumbent_value) <= 1e-9
                   and _lex_smaller(x, incumbent))
            if better or tie:
                incumbent, incumbent_value = x, value
            continue
        v = node_out.primal[branch_j]
        down = np.floor(v)
        for lower_j, upper_j in ((None, down), (down + 1.0, None)):
            lo = node_lp.var_lower.copy()
            hi = node_lp.var_upper.copy()
            if lower_j is not None:
                lo[branch_j] = max(lo[branch_j], lower_j)
            if upper_j is not None:
                hi[branch_j] = min(hi[branch_j], upper_j)
            if lo[branch_j] > hi[branch_j]:
                continue
            child = node_lp.with_bounds(lower=lo, upper=hi)
            child_out = solve_lp(child)
            if child_out.status != "optimal":
                continue
            if (incumbent_value is not None
                    and sign * child_out.objective_value <= sign * incumbent_value + 1e-9):
                continue
            counter += 1
            heapq.heappush(heap, (-sign * child_out.objective_value, counter,
                                  child, child_out))

    if incumbent is None:
        return MilpOutcome("infeasible", nodes_explored=nodes)
    return MilpOutcome("optimal", solution=incumbent, objective_value=incumbent_value,
                       bound=incumbent_value, nodes_explored=nodes)


def _violations(lp: LinearProgram, x: np.ndarray) -> np.ndarray:
    """Per-row violation amounts (0 when satisfied)."""
    lhs = lp.constraint_matrix @ x if lp.n_rows else np.zeros(0)
    out = np.zeros(lp.n_rows)
    for i, s in enumerate(lp.constraint_senses):
        r = lhs[i] - lp.rhs[i]
        if s == "<=":
            out[i] = max(0.0, r)
        elif s == ">=":
            out[i] = max(0.0, -r)
        else:
            out[i] = abs(r)
    return out


def relax_and_round(lp: LinearProgram, mask: IntegerMask,
                    policy: str = ROUND_DOWN) -> MilpOutcome:
    """Solve the LP relaxation, round masked variables, then repair greedily.

    Repair decrements rounded variables, smallest objective loss first (ties by
    lowest index), until every constraint holds.  The relaxation optimum is
    reported as ``bound`` so callers can judge the gap.
    """
    _check_mask(lp, mask)
    if policy not in (ROUND_DOWN, NEAREST):
        raise ValueError(f"unknown rounding policy {policy!r}")
    relaxed = solve_lp(lp)
    if relaxed.status != "optimal":
        return MilpOutcome(relaxed.status, nodes_explored=1)

    x = relaxed.primal.copy()
    idx = mask.indices
    if policy == ROUND_DOWN:
        x[idx] = np.floor(x[idx] + INTEGRALITY_TOL)
    else:
        x[idx] = np.floor(x[idx] + 0.5)
    x[idx] = np.clip(x[idx], np.ceil(lp.var_lower[idx] - INTEGRALITY_TOL),
                     np.floor(lp.var_upper[idx] + INTEGRALITY_TOL))

    sign = 1.0 if lp.sense == "max" else -1.0
    floors = np.where(np.isfinite(lp.var_lower[idx]), lp.var_lower[idx], 0.0)
    guard = int(np.sum(np.maximum(x[idx] - floors, 0.0))) + len(idx) + 1
    for _ in range(max(guard, 1)):
        viol = _violations(lp, x)
        total = float(np.sum(viol))
        if total <= 1e-6:
            break
        best_j, best_loss = None, None
        for j in idx:
            if x[j] <= lp.var_lower[j] + INTEGRALITY_TOL:
                continue
            trial = x.copy()
            trial[j] -= 1.0
            new_total = float(np.sum(_violations(lp, trial)))
            if new_total >= total - 1e-9:
                continue
            loss = sign * lp.objective[j]
            if best_loss is None or loss < best_loss - 1e-12:
                best_j, best_loss = j, loss
        if best_j is None:
            raise RepairFailure("no decrement reduces constraint violation")
        x[best_j] -= 1.0
    else:
        raise RepairFailure("repair did not converge within its step budget")

    value = float(lp.objective @ x)
    bound = float(relaxed.objective_value)
    status = "optimal" if sign * (bound - value) <= 1e-6 else "gap_limit"
    return MilpOutcome(status, solution=x, objective_value=value, bound=bound,
                       nodes_explored=1)
