"""Dense two-phase primal simplex with duality certificates.

Solves ``max/min <c, x>`` subject to per-row senses (<=, >=, =) and variable
bounds.  Everything else in the package sits on top of :func:`solve_lp`.

Conventions
-----------
* The dual vector returned for row ``i`` is the nonnegative multiplier of the
  row after mechanical conversion to a canonical one-sided form: ``<=`` rows
  for maximization problems, ``>=`` rows for minimization problems (equality
  rows keep a free-signed multiplier).  With that convention, for an optimal
  pair ``<c, x> == <b~, y>`` where ``b~`` is the converted rhs.
* Duals are reported for the original rows only; rows synthesized from finite
  variable upper bounds stay internal.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, NumericalFailure

FEASIBILITY_TOL = 1e-6
OPTIMALITY_TOL = 1e-6
PIVOT_TOL = 1e-9
REDUCED_COST_TOL = 1e-9
BLAND_TRIGGER = 50

LESS = "<="
GREATER = ">="
EQUAL = "="
_SENSES = (LESS, GREATER, EQUAL)


def _as_float_array(x, ndim: int) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != ndim:
        if ndim == 2 and arr.size == 0:
            arr = arr.reshape((0, 0))
        else:
            raise DimensionMismatch(f"expected {ndim}-d array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """A dense LP: optimize <objective, x> over senses/rhs rows and box bounds."""

    objective: np.ndarray
    constraint_matrix: np.ndarray
    constraint_senses: tuple[str, ...]
    rhs: np.ndarray
    var_lower: np.ndarray = None
    var_upper: np.ndarray = None
    sense: str = "max"

    def __post_init__(self):
        c = _as_float_array(self.objective, 1)
        a = _as_float_array(self.constraint_matrix, 2)
        b = _as_float_array(self.rhs, 1)
        if a.shape == (0, 0) and len(b) == 0:
            a = a.reshape((0, len(c)))
        senses = tuple(self.constraint_senses)
        n = len(c)
        lo = np.zeros(n) if self.var_lower is None else _as_float_array(self.var_lower, 1)
        hi = np.full(n, np.inf) if self.var_upper is None else _as_float_array(self.var_upper, 1)
        if a.shape[0] != len(b) or a.shape[0] != len(senses):
            raise DimensionMismatch(
                f"rows mismatch: matrix {a.shape[0]}, rhs {len(b)}, senses {len(senses)}"
            )
        if a.shape[1] != n or len(lo) != n or len(hi) != n:
            raise DimensionMismatch(
                f"cols mismatch: matrix {a.shape[1]}, objective {n}, bounds {len(lo)}/{len(hi)}"
            )
        for s in senses:
            if s not in _SENSES:
                raise DimensionMismatch(f"unknown sense {s!r}")
        if self.sense not in ("max", "min"):
            raise DimensionMismatch(f"sense must be 'max' or 'min', got {self.sense!r}")
        if np.any(lo > hi + 1e-12):
            raise DimensionMismatch("var_lower exceeds var_upper")
        for name, val in (("objective", c), ("constraint_matrix", a), ("rhs", b),
                          ("var_lower", lo), ("var_upper", hi)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "constraint_senses", senses)

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    def with_bounds(self, lower=None, upper=None) -> "LinearProgram":
        return replace(
            self,
            var_lower=self.var_lower if lower is None else lower,
            var_upper=self.var_upper if upper is None else upper,
        )


@dataclass
class LpOutcome:
    status: str  # optimal | infeasible | unbounded
    primal: np.ndarray | None = None
    dual: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0
    certificate: np.ndarray | None = None  # Farkas vector or unbounded ray

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _simplex_loop(T, basis, cost, cap, barred, start_iter=0):
    """Run primal simplex on tableau ``T`` in place; maximization.

    Returns (status, iterations, ray_column_or_None).  Dantzig entering rule
    with ties to the lowest index; switches to Bland's rule after
    ``BLAND_TRIGGER`` consecutive degenerate pivots.
    """
    m = T.shape[0]
    ncols = T.shape[1] - 1
    iterations = start_iter
    degenerate_run = 0
    bland = False
    while True:
        if iterations >= cap:
            return "iteration_limit", iterations, None
        cb = cost[basis]
        reduced = cost - cb @ T[:, :ncols]
        if barred:
            reduced[list(barred)] = -np.inf
        candidates = np.flatnonzero(reduced > REDUCED_COST_TOL)
        if candidates.size == 0:
            return "optimal", iterations, None
        if bland:
            j = int(candidates[0])
        else:
            j = int(candidates[np.argmax(reduced[candidates])])
        col = T[:, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded", iterations, j
        ratios = T[rows, -1] / col[rows]
        best = np.min(ratios)
        tied = rows[ratios <= best + 1e-12]
        if bland:
            i = int(tied[np.argmin(basis[tied])])
        else:
            i = int(tied[0])
        if best <= 1e-12:
            degenerate_run += 1
            if degenerate_run >= BLAND_TRIGGER:
                bland = True
        else:
            degenerate_run = 0
            bland = False
        piv = T[i, j]
        T[i, :] /= piv
        for r in range(m):
            if r != i and T[r, j] != 0.0:
                T[r, :] -= T[r, j] * T[i, :]
        basis[i] = j
        iterations += 1


class _Canonical:
    """The LP rewritten as max over x' >= 0 with shifted/split variables."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        n = lp.n_vars
        c = lp.objective if lp.sense == "max" else -lp.objective
        lo, hi = lp.var_lower, lp.var_upper

        # Variable rewrite: x = shift + S x', one or two x' columns per x.
        cols = []  # (orig index, sign)
        shift = np.zeros(n)
        for j in range(n):
            if np.isfinite(lo[j]):
                shift[j] = lo[j]
                cols.append((j, 1.0))
            elif np.isfinite(hi[j]):
                shift[j] = hi[j]
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        self.cols = cols
        self.shift = shift
        nprime = len(cols)
        A = np.zeros((lp.n_rows, nprime))
        cprime = np.zeros(nprime)
        for k, (j, s) in enumerate(cols):
            A[:, k] = s * lp.constraint_matrix[:, j]
            cprime[k] = s * c[j]
        b = lp.rhs - lp.constraint_matrix @ shift
        senses = list(lp.constraint_senses)

        # Finite residual upper bounds become synthetic <= rows.
        extra_rows = []
        for k, (j, s) in enumerate(cols):
            if s > 0 and np.isfinite(hi[j]) and np.isfinite(lo[j]):
                row = np.zeros(nprime)
                row[k] = 1.0
                extra_rows.append((row, hi[j] - lo[j]))
        if extra_rows:
            A = np.vstack([A] + [r for r, _ in extra_rows])
            b = np.concatenate([b, [rb for _, rb in extra_rows]])
            senses += [LESS] * len(extra_rows)

        self.A, self.b, self.senses, self.c = A, b, senses, cprime
        self.objective_shift = float(c @ shift)
        self.n_original_rows = lp.n_rows

    def restore(self, xprime: np.ndarray) -> np.ndarray:
        x = self.shift.copy()
        for k, (j, s) in enumerate(self.cols):
            x[j] += s * xprime[k]
        return x

    def restore_ray(self, dprime: np.ndarray) -> np.ndarray:
        d = np.zeros(self.lp.n_vars)
        for k, (j, s) in enumerate(self.cols):
            d[j] += s * dprime[k]
        return d


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Two-phase simplex.  Returns status, primal/dual vectors, value."""
    canon = _Canonical(lp)
    A, b, senses, c = canon.A, canon.b.copy(), list(canon.senses), canon.c
    m, n = A.shape
    if n == 0:
        ok = all(
            (s == LESS and 0.0 <= bi + FEASIBILITY_TOL)
            or (s == GREATER and 0.0 >= bi - FEASIBILITY_TOL)
            or (s == EQUAL and abs(bi) <= FEASIBILITY_TOL)
            for s, bi in zip(senses, b)
        )
        if not ok:
            return LpOutcome(status=INFEASIBLE)
        return LpOutcome(OPTIMAL, primal=canon.shift.copy(), dual=np.zeros(lp.n_rows),
                         objective_value=float(lp.objective @ canon.shift))

    A = A.copy()
    sigma = np.ones(m)
    for i in range(m):
        if b[i] < 0:
            A[i] *= -1.0
            b[i] *= -1.0
            sigma[i] = -1.0
            senses[i] = {LESS: GREATER, GREATER: LESS, EQUAL: EQUAL}[senses[i]]

    slack_col, art_col = {}, {}
    ncols = n
    for i, s in enumerate(senses):
        if s in (LESS, GREATER):
            slack_col[i] = ncols
            ncols += 1
    for i, s in enumerate(senses):
        if s in (GREATER, EQUAL):
            art_col[i] = ncols
            ncols += 1

    T = np.zeros((m, ncols + 1))
    T[:, :n] = A
    T[:, -1] = b
    basis = np.zeros(m, dtype=int)
    id_col = np.zeros(m, dtype=int)  # column holding +e_i in the initial tableau
    for i, s in enumerate(senses):
        if s == LESS:
            T[i, slack_col[i]] = 1.0
            basis[i] = slack_col[i]
            id_col[i] = slack_col[i]
        elif s == GREATER:
            T[i, slack_col[i]] = -1.0
            T[i, art_col[i]] = 1.0
            basis[i] = art_col[i]
            id_col[i] = art_col[i]
        else:
            T[i, art_col[i]] = 1.0
            basis[i] = art_col[i]
            id_col[i] = art_col[i]

    cap = 50 * (m + ncols)
    artificials = frozenset(art_col.values())
    iterations = 0

    if artificials:
        cost1 = np.zeros(ncols)
        for j in artificials:
            cost1[j] = -1.0
        status, iterations, _ = _simplex_loop(T, basis, cost1, cap, frozenset())
        if status == "iteration_limit":
            raise NumericalFailure("phase-1 simplex exceeded its iteration cap")
        phase1_value = float(cost1[basis] @ T[:, -1])
        if phase1_value < -FEASIBILITY_TOL:
            y1 = np.array([cost1[basis] @ T[:, id_col[i]] for i in range(m)])
            cert = sigma[: canon.n_original_rows] * y1[: canon.n_original_rows]
            return LpOutcome(INFEASIBLE, iterations=iterations, certificate=cert)
        # Drive leftover artificials out of the basis; drop redundant rows.
        drop_rows = []
        for i in range(m):
            if basis[i] in artificials:
                pivot_j = -1
                for j in range(ncols):
                    if j not in artificials and abs(T[i, j]) > PIVOT_TOL:
                        pivot_j = j
                        break
                if pivot_j < 0:
                    drop_rows.append(i)
                    continue
                piv = T[i, pivot_j]
                T[i, :] /= piv
                for r in range(m):
                    if r != i and T[r, pivot_j] != 0.0:
                        T[r, :] -= T[r, pivot_j] * T[i, :]
                basis[i] = pivot_j
        if drop_rows:
            keep = [i for i in range(m) if i not in drop_rows]
            T = T[keep]
            basis = basis[keep]
            # id_col/sigma rows for dropped constraints keep zero duals
            kept_id = id_col[keep]
            dropped = set(drop_rows)
        else:
            kept_id = id_col
            dropped = set()
    else:
        kept_id = id_col
        dropped = set()

    cost2 = np.zeros(ncols)
    cost2[:n] = c
    status, iterations, ray_j = _simplex_loop(T, basis, cost2, cap, artificials, iterations)
    if status == "iteration_limit":
        raise NumericalFailure("phase-2 simplex exceeded its iteration cap")
    if status == "unbounded":
        dprime = np.zeros(ncols)
        dprime[ray_j] = 1.0
        for r in range(T.shape[0]):
            dprime[basis[r]] = -T[r, ray_j]
        ray = canon.restore_ray(dprime[:n])
        return LpOutcome(UNBOUNDED, iterations=iterations, certificate=ray)

    xprime = np.zeros(ncols)
    xprime[basis] = T[:, -1]
    primal = canon.restore(xprime[:n])

    # Duals for the surviving canonical rows, then mapped to original rows.
    y_can = np.zeros(m)
    cb = cost2[basis]
    live = [i for i in range(m) if i not in dropped]
    for pos, i in enumerate(live):
        y_can[i] = float(cb @ T[:, kept_id[pos]])
    dual = np.zeros(lp.n_rows)
    for i in range(canon.n_original_rows):
        s_orig = lp.constraint_senses[i]
        if s_orig == GREATER:
            dual[i] = -sigma[i] * y_can[i]
        else:
            dual[i] = sigma[i] * y_can[i]
    value = float(lp.objective @ primal)
    return LpOutcome(OPTIMAL, primal=primal, dual=dual,
                     objective_value=value, iterations=iterations)


def _converted_rows(lp: LinearProgram):
    """Rows converted to the canonical one-sided form for lp.sense.

    For max LPs every row becomes ``a~ x <= b~``; for min LPs ``a~ x >= b~``.
    Equality rows pass through unconverted (free multiplier).
    Returns (A_tilde, b_tilde, is_equality mask).
    """
    a = lp.constraint_matrix.copy()
    b = lp.rhs.copy()
    eq = np.array([s == EQUAL for s in lp.constraint_senses])
    flip_to = LESS if lp.sense == "max" else GREATER
    for i, s in enumerate(lp.constraint_senses):
        if s != EQUAL and s != flip_to:
            a[i] *= -1.0
            b[i] *= -1.0
    return a, b, eq


def _require_plain_bounds(lp: LinearProgram, op: str):
    if np.any(lp.var_lower != 0.0) or np.any(np.isfinite(lp.var_upper)):
        raise DimensionMismatch(
            f"{op} is defined for LPs with bounds [0, inf); fold bounds into rows first"
        )


def check_duality_certificate(lp: LinearProgram, primal, dual) -> bool:
    """True iff primal feasible, dual feasible, and objectives agree to 1e-6."""
    x = _as_float_array(primal, 1)
    y = _as_float_array(dual, 1)
    if len(x) != lp.n_vars or len(y) != lp.n_rows:
        raise DimensionMismatch(
            f"primal len {len(x)} vs {lp.n_vars} vars; dual len {len(y)} vs {lp.n_rows} rows"
        )
    _require_plain_bounds(lp, "check_duality_certificate")
    tol = FEASIBILITY_TOL
    if np.any(x < -tol):
        return False
    lhs = lp.constraint_matrix @ x
    for i, s in enumerate(lp.constraint_senses):
        r = lhs[i] - lp.rhs[i]
        if s == LESS and r > tol:
            return False
        if s == GREATER and r < -tol:
            return False
        if s == EQUAL and abs(r) > tol:
            return False
    a_t, b_t, eq = _converted_rows(lp)
    if np.any(y[~eq] < -tol):
        return False
    dual_lhs = a_t.T @ y
    if lp.sense == "max":
        if np.any(dual_lhs < lp.objective - tol):
            return False
    else:
        if np.any(dual_lhs > lp.objective + tol):
            return False
    gap = float(lp.objective @ x) - float(b_t @ y)
    return abs(gap) <= tol


def build_dual(lp: LinearProgram) -> LinearProgram:
    """Mechanical dual under the module convention.

    ``max <c,x> : Ax <= b, x >= 0``  pairs with  ``min <b,y> : A'y >= c, y >= 0``;
    >=/= rows are converted first (equality rows yield free dual variables).
    Finite upper bounds are folded into synthetic rows before pairing.
    """
    if np.any(lp.var_lower != 0.0):
        raise DimensionMismatch("build_dual requires var_lower == 0")
    work = lp
    if np.any(np.isfinite(lp.var_upper)):
        rows = [lp.constraint_matrix]
        rhs = [lp.rhs]
        senses = list(lp.constraint_senses)
        for j in np.flatnonzero(np.isfinite(lp.var_upper)):
            row = np.zeros(lp.n_vars)
            row[j] = 1.0
            rows.append(row.reshape(1, -1))
            rhs.append(np.array([lp.var_upper[j]]))
            senses.append(LESS)
        work = LinearProgram(
            objective=lp.objective,
            constraint_matrix=np.vstack(rows),
            constraint_senses=tuple(senses),
            rhs=np.concatenate(rhs),
            sense=lp.sense,
        )
    a_t, b_t, eq = _converted_rows(work)
    m = work.n_rows
    lo = np.zeros(m)
    lo[eq] = -np.inf
    if work.sense == "max":
        return LinearProgram(
            objective=b_t,
            constraint_matrix=a_t.T,
            constraint_senses=tuple(GREATER for _ in range(work.n_vars)),
            rhs=work.objective,
            var_lower=lo,
            sense="min",
        )
    return LinearProgram(
        objective=b_t,
        constraint_matrix=a_t.T,
        constraint_senses=tuple(LESS for _ in range(work.n_vars)),
        rhs=work.objective,
        var_lower=lo,
        sense="max",
    )


def solve_dual_pair(primal: LinearProgram) -> tuple[LpOutcome, LpOutcome]:
    """Solve ``primal`` and its mechanically-built dual."""
    dual_lp = build_dual(primal)
    out_p = solve_lp(primal)
    out_d = solve_lp(dual_lp)
    if out_p.is_optimal and out_d.is_optimal:
        gap = abs(out_p.objective_value - out_d.objective_value)
        if gap > OPTIMALITY_TOL * max(1.0, abs(out_p.objective_value)):
            raise NumericalFailure(f"strong duality violated: gap {gap:g}")
    return out_p, out_d


def refine_lexicographic(lp: LinearProgram, value: float) -> np.ndarray:
    """Lexicographically smallest optimal solution of ``lp``.

    Pins the objective at its optimal ``value``, then minimizes each
    coordinate in turn, pinning it before moving on.  Equality pins carry
    float-level noise only, which the simplex feasibility tolerance absorbs.
    Used to pick a canonical vertex when a problem has several optima.
    """
    n = lp.n_vars
    rows = [lp.constraint_matrix, lp.objective.reshape(1, -1)]
    senses = list(lp.constraint_senses) + [EQUAL]
    rhs = list(lp.rhs) + [value]
    result = np.zeros(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        sub = LinearProgram(
            objective=e,
            constraint_matrix=np.vstack(rows),
            constraint_senses=tuple(senses),
            rhs=np.array(rhs),
            var_lower=lp.var_lower,
            var_upper=lp.var_upper,
            sense="min",
        )
        out = solve_lp(sub)
        if not out.is_optimal:
            raise NumericalFailure(f"lexicographic refinement step {j} failed: {out.status}")
        result[j] = out.primal[j]
        rows.append(e.reshape(1, -1))
        senses.append(EQUAL)
        rhs.append(result[j])
    return result


def to_mps(lp: LinearProgram, name: str = "LP") -> str:
    """MPS-format text for cross-checking against external solvers."""
    lines = [f"NAME          {name}"]
    lines.append("OBJSENSE")
    lines.append(f"    {'MAX' if lp.sense == 'max' else 'MIN'}")
    lines.append("ROWS")
    lines.append(" N  OBJ")
    tag = {LESS: "L", GREATER: "G", EQUAL: "E"}
    for i, s in enumerate(lp.constraint_senses):
        lines.append(f" {tag[s]}  R{i}")
    lines.append("COLUMNS")
    for j in range(lp.n_vars):
        if lp.objective[j] != 0.0:
            lines.append(f"    X{j}  OBJ  {lp.objective[j]:.17g}")
        for i in range(lp.n_rows):
            a = lp.constraint_matrix[i, j]
            if a != 0.0:
                lines.append(f"    X{j}  R{i}  {a:.17g}")
    lines.append("RHS")
    for i in range(lp.n_rows):
        if lp.rhs[i] != 0.0:
            lines.append(f"    RHS  R{i}  {lp.rhs[i]:.17g}")
    lines.append("BOUNDS")
    for j in range(lp.n_vars):
        lo, hi = lp.var_lower[j], lp.var_upper[j]
        if lo == 0.0 and not np.isfinite(hi):
            continue
        if not np.isfinite(lo):
            lines.append(f" MI BND  X{j}")
        elif lo != 0.0:
            lines.append(f" LO BND  X{j}  {lo:.17g}")
        if np.isfinite(hi):
            lines.append(f" UP BND  X{j}  {hi:.17g}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"
