"""Antagonistic trader-vs-exchange games on polyhedra.

The trader picks integer volumes ``x`` from ``{x >= 0 : B x >= d}``; the
exchange answers with a price scenario ``w`` from ``{w >= 0 : A w >= b}``.
Each instrument contributes a pair of ``w`` components: the price if the
trader called the direction right (``y``) and if she called it wrong (``z``),
and the payoff matrix ``D`` spreads the group probability over that pair, so
the payoff ``<x, D w> - <K, x> + <q, w>`` is the expected mark-to-market of
the chosen volumes (``K`` carries derivative purchase costs, ``q`` carries
holdings kept through the move).

Two solvers:

* :func:`solve_maximin_exact` — the true integer maximin, rewritten as a mixed
  program ``max <b, z> - <K, x>`` over ``B x >= d``, ``z A <= x D + q`` with
  ``x`` integral.
* :func:`solve_maximin_upper_bound` — the relaxed game's saddle point from the
  dual LP pair; its value bounds the exact maximin from above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyExchangePolyhedron,
    IncompatibleBudget,
    NumericalFailure,
    TraderPolyhedronInfeasible,
)
from .lp_solver import LinearProgram, refine_lexicographic, solve_lp
from .milp import IntegerMask, solve_milp

GAP_TOL = 1e-6


def _complement(p: float) -> float:
    """Correctly-rounded 1 - p for a decimal-intended probability.

    ``1.0 - 0.7`` is one ulp away from the double nearest 0.3; going through
    the shortest decimal representation rounds exactly once.
    """
    return float(Fraction(1) - Fraction(repr(float(p))))


@dataclass(frozen=True)
class PriceBox:
    """Price area of one instrument inside a game group.

    ``anchor`` splits the box into the correct-forecast and wrong-forecast
    halves; for securities it is the current price, for derivatives it
    defaults to the contract threshold.  Explicit ``y``/``z`` intervals
    override the group convention.
    """

    instrument_id: str
    anchor: float
    low: float
    high: float
    y_interval: tuple[float, float] | None = None
    z_interval: tuple[float, float] | None = None

    def __post_init__(self):
        if not (self.low <= self.anchor <= self.high):
            raise DimensionMismatch(
                f"{self.instrument_id}: anchor {self.anchor} outside "
                f"[{self.low}, {self.high}]"
            )


@dataclass(frozen=True)
class BudgetRow:
    """One linear balance constraint on the trader's volume vector."""

    coeffs: tuple[float, ...]
    rhs: float
    sense: str = "<="

    def normalized(self) -> tuple[np.ndarray, float]:
        """As a >=-row of the trader polyhedron."""
        c = np.asarray(self.coeffs, dtype=float)
        if self.sense == "<=":
            return -c, -float(self.rhs)
        if self.sense == ">=":
            return c, float(self.rhs)
        raise DimensionMismatch(f"budget sense must be <= or >=, got {self.sense!r}")


@dataclass(frozen=True)
class GameSpec:
    trader_matrix: np.ndarray      # B, rows >= d
    trader_rhs: np.ndarray
    exchange_matrix: np.ndarray    # A, rows >= b
    exchange_rhs: np.ndarray
    payoff_matrix: np.ndarray      # D, n x 2n
    offset_q: np.ndarray           # exchange-space holdings offset
    cost_k: np.ndarray             # trader-space purchase costs
    integer_mask: IntegerMask
    x_labels: tuple[str, ...]
    w_labels: tuple[str, ...]
    w_lower: np.ndarray            # box hints (match exchange rows by construction)
    w_upper: np.ndarray
    group_sizes: tuple[int, int, int]
    probabilities: Mapping[str, float] = field(default_factory=dict)

    @property
    def n_x(self) -> int:
        return len(self.x_labels)

    @property
    def n_w(self) -> int:
        return len(self.w_labels)


@dataclass
class ExchangeScenario:
    """One price vector the exchange may play, split into y/z components."""

    w: np.ndarray
    labels: tuple[str, ...] = ()

    def component(self, label: str) -> float:
        return float(self.w[self.labels.index(label)])

    def as_dict(self) -> dict[str, float]:
        return {lbl: float(v) for lbl, v in zip(self.labels, self.w)}


@dataclass
class SaddlePointResult:
    x_star: np.ndarray
    w_star: ExchangeScenario
    h_star: np.ndarray
    pi_star: np.ndarray
    value: float


@dataclass
class MaximinResult:
    x_star: np.ndarray
    z_star: np.ndarray
    value: float
    relaxation_bound: float
    nodes_explored: int = 0


def _default_intervals(box: PriceBox, group: str) -> tuple[tuple[float, float],
                                                           tuple[float, float]]:
    if group == "plus":
        y = (box.anchor, box.high)
        z = (box.low, box.anchor)
    else:  # minus and zero share the falling-correct convention
        y = (box.low, box.anchor)
        z = (box.anchor, box.high)
    return (box.y_interval or y), (box.z_interval or z)


def _feasible(matrix: np.ndarray, rhs: np.ndarray) -> bool:
    n = matrix.shape[1]
    probe = LinearProgram(
        objective=np.zeros(n),
        constraint_matrix=matrix,
        constraint_senses=(">=",) * matrix.shape[0],
        rhs=rhs,
    )
    return solve_lp(probe).is_optimal


def _assemble(plus: Sequence[PriceBox], minus: Sequence[PriceBox],
              zero: Sequence[PriceBox], budget_rows: Sequence[BudgetRow],
              p_plus: float, p_minus: float, p_zero: float,
              holdings: Mapping[str, int] | None,
              cost_of: Mapping[str, float] | None = None,
              label_prefix: str = "") -> GameSpec:
    groups = (("plus", list(plus), p_plus), ("minus", list(minus), p_minus),
              ("zero", list(zero), p_zero))
    for name, boxes, p in groups:
        if boxes and not (0.0 < p <= 1.0):
            raise DimensionMismatch(f"probability for {name} group must be in (0,1], got {p}")

    x_labels: list[str] = []
    w_labels: list[str] = []
    w_lo: list[float] = []
    w_hi: list[float] = []
    d_rows: list[np.ndarray] = []
    q: list[float] = []
    holdings = dict(holdings or {})

    # w layout: per group, the y block then the z block.
    offsets = []
    pos = 0
    for _, boxes, _ in groups:
        offsets.append(pos)
        pos += 2 * len(boxes)
    n_w = pos

    for g, (name, boxes, p) in enumerate(groups):
        base = offsets[g]
        size = len(boxes)
        comp = _complement(p) if boxes else 0.0
        for k, box in enumerate(boxes):
            y_iv, z_iv = _default_intervals(box, name)
            x_labels.append(label_prefix + box.instrument_id)
            w_labels.append(f"y{'+' if name == 'plus' else '-' if name == 'minus' else '0'}:"
                            f"{box.instrument_id}")
            w_lo.append(y_iv[0])
            w_hi.append(y_iv[1])
            row = np.zeros(n_w)
            row[base + k] = p
            row[base + size + k] = comp
            d_rows.append(row)
            q.append(p * holdings.get(box.instrument_id, 0))
        for box in boxes:
            w_labels.append(f"z{'+' if name == 'plus' else '-' if name == 'minus' else '0'}:"
                            f"{box.instrument_id}")
            _, z_iv = _default_intervals(box, name)
            w_lo.append(z_iv[0])
            w_hi.append(z_iv[1])
            q.append(comp * holdings.get(box.instrument_id, 0))

    n_x = len(x_labels)
    d_mat = np.array(d_rows).reshape(n_x, n_w)

    # exchange rows: lower then upper bound per w component, in w order
    a_rows, b_vals = [], []
    for j in range(n_w):
        row = np.zeros(n_w)
        row[j] = 1.0
        a_rows.append(row.copy())
        b_vals.append(w_lo[j])
        a_rows.append(-row)
        b_vals.append(-w_hi[j])
    a_mat = np.array(a_rows).reshape(2 * n_w, n_w)
    b_vec = np.array(b_vals)

    # trader polyhedron: identity rows then normalized budget rows
    b_rows = [np.eye(n_x)]
    d_vals = [np.zeros(n_x)]
    for brow in budget_rows:
        coeffs, rhs = brow.normalized()
        if len(coeffs) != n_x:
            raise DimensionMismatch(
                f"budget row has {len(coeffs)} coefficients for {n_x} volumes")
        b_rows.append(coeffs.reshape(1, -1))
        d_vals.append(np.array([rhs]))
    b_mat = np.vstack(b_rows)
    d_vec = np.concatenate(d_vals)

    cost = np.array([(cost_of or {}).get(lbl, 0.0) for lbl in x_labels])

    spec = GameSpec(
        trader_matrix=b_mat,
        trader_rhs=d_vec,
        exchange_matrix=a_mat,
        exchange_rhs=b_vec,
        payoff_matrix=d_mat,
        offset_q=np.array(q),
        cost_k=cost,
        integer_mask=IntegerMask.all_integer(n_x),
        x_labels=tuple(x_labels),
        w_labels=tuple(w_labels),
        w_lower=np.array(w_lo),
        w_upper=np.array(w_hi),
        group_sizes=(len(plus), len(minus), len(zero)),
        probabilities={"p_plus": p_plus, "p_minus": p_minus, "p_zero": p_zero},
    )
    if np.any(spec.w_lower > spec.w_upper + 1e-12):
        raise EmptyExchangePolyhedron("a price interval is empty")
    if not _feasible(spec.exchange_matrix, spec.exchange_rhs):
        raise EmptyExchangePolyhedron("exchange polyhedron is empty")
    if not _feasible(spec.trader_matrix, spec.trader_rhs):
        raise IncompatibleBudget("budget rows admit no feasible volume vector")
    return spec


def build_game(plus: Sequence[PriceBox], minus: Sequence[PriceBox],
               zero: Sequence[PriceBox], budget_rows: Sequence[BudgetRow],
               p_plus: float = 0.6, p_minus: float = 0.6,
               p_zero: float = 0.5) -> GameSpec:
    """Securities game without holdings (new-portfolio situation)."""
    return _assemble(plus, minus, zero, budget_rows, p_plus, p_minus, p_zero, None)


def build_game_with_holdings(plus: Sequence[PriceBox], minus: Sequence[PriceBox],
                             zero: Sequence[PriceBox], budget_rows: Sequence[BudgetRow],
                             holdings: Mapping[str, int],
                             p_plus: float = 0.6, p_minus: float = 0.6,
                             p_zero: float = 0.5) -> GameSpec:
    """Securities game with kept holdings entering through the offset vector."""
    if any(v < 0 for v in holdings.values()):
        raise DimensionMismatch("holdings must be nonnegative")
    return _assemble(plus, minus, zero, budget_rows, p_plus, p_minus, p_zero, holdings)


@dataclass(frozen=True)
class DerivativeClass:
    """One derivative class (futures or options) for the combined game.

    ``costs`` maps instrument id to its purchase price (strike basis plus
    carry for futures, strike plus premium for options).
    """

    plus: tuple[PriceBox, ...] = ()
    minus: tuple[PriceBox, ...] = ()
    zero: tuple[PriceBox, ...] = ()
    costs: Mapping[str, float] = field(default_factory=dict)
    p_plus: float = 0.6
    p_minus: float = 0.6
    p_zero: float = 0.5
    holdings: Mapping[str, int] = field(default_factory=dict)


def build_derivative_game(securities: DerivativeClass | None,
                          futures: DerivativeClass | None,
                          options: DerivativeClass | None,
                          budget_rows: Sequence[BudgetRow]) -> GameSpec:
    """Block-diagonal game over securities, futures and options together.

    Budget rows span the concatenated volume vector, so one cash balance can
    bind all three classes at once.
    """
    classes = [c for c in (securities, futures, options) if c is not None
               and (c.plus or c.minus or c.zero)]
    if not classes:
        raise DimensionMismatch("at least one instrument class must be nonempty")

    specs = []
    for cls in classes:
        specs.append(_assemble(cls.plus, cls.minus, cls.zero, [],
                               cls.p_plus, cls.p_minus, cls.p_zero,
                               cls.holdings, cost_of=cls.costs))

    x_labels = tuple(lbl for s in specs for lbl in s.x_labels)
    w_labels = tuple(lbl for s in specs for lbl in s.w_labels)
    n_x = len(x_labels)
    n_w = len(w_labels)

    d_mat = np.zeros((n_x, n_w))
    r0 = c0 = 0
    for s in specs:
        d_mat[r0:r0 + s.n_x, c0:c0 + s.n_w] = s.payoff_matrix
        r0 += s.n_x
        c0 += s.n_w
    q = np.concatenate([s.offset_q for s in specs])
    cost = np.concatenate([s.cost_k for s in specs])
    w_lo = np.concatenate([s.w_lower for s in specs])
    w_hi = np.concatenate([s.w_upper for s in specs])

    a_rows, b_vals = [], []
    for j in range(n_w):
        row = np.zeros(n_w)
        row[j] = 1.0
        a_rows.append(row.copy())
        b_vals.append(w_lo[j])
        a_rows.append(-row)
        b_vals.append(-w_hi[j])

    b_rows = [np.eye(n_x)]
    d_vals = [np.zeros(n_x)]
    for brow in budget_rows:
        coeffs, rhs = brow.normalized()
        if len(coeffs) != n_x:
            raise DimensionMismatch(
                f"budget row has {len(coeffs)} coefficients for {n_x} volumes")
        b_rows.append(coeffs.reshape(1, -1))
        d_vals.append(np.array([rhs]))

    sizes = tuple(int(sum(s.group_sizes[i] for s in specs)) for i in range(3))
    spec = GameSpec(
        trader_matrix=np.vstack(b_rows),
        trader_rhs=np.concatenate(d_vals),
        exchange_matrix=np.array(a_rows).reshape(2 * n_w, n_w),
        exchange_rhs=np.array(b_vals),
        payoff_matrix=d_mat,
        offset_q=q,
        cost_k=cost,
        integer_mask=IntegerMask.all_integer(n_x),
        x_labels=x_labels,
        w_labels=w_labels,
        w_lower=w_lo,
        w_upper=w_hi,
        group_sizes=sizes,
        probabilities={},
    )
    if not _feasible(spec.trader_matrix, spec.trader_rhs):
        raise IncompatibleBudget("budget rows admit no feasible volume vector")
    return spec


def evaluate_payoff(g: GameSpec, x, w) -> float:
    x = np.asarray(x, dtype=float)
    w_vec = w.w if isinstance(w, ExchangeScenario) else np.asarray(w, dtype=float)
    if len(x) != g.n_x or len(w_vec) != g.n_w:
        raise DimensionMismatch(
            f"payoff got x of {len(x)} (need {g.n_x}) and w of {len(w_vec)} (need {g.n_w})")
    return float(x @ g.payoff_matrix @ w_vec - g.cost_k @ x + g.offset_q @ w_vec)


def inner_minimum(g: GameSpec, x) -> tuple[float, np.ndarray]:
    """Exchange's best reply to ``x``: min over the price polyhedron.

    Uses the closed-form box minimum (the exchange rows are interval rows by
    construction); the returned value includes the ``-<K, x>`` term.
    """
    x = np.asarray(x, dtype=float)
    coeffs = g.payoff_matrix.T @ x + g.offset_q
    w = np.where(coeffs >= 0.0, g.w_lower, g.w_upper)
    value = float(coeffs @ w - g.cost_k @ x)
    return value, w


def _exact_milp(g: GameSpec) -> tuple[LinearProgram, IntegerMask]:
    """max <b, z> - <K, x> st B x >= d, z A <= x D + q, x integer, (x, z) >= 0."""
    n, m_b = g.n_x, g.trader_matrix.shape[0]
    m_a = g.exchange_matrix.shape[0]
    n_w = g.n_w
    nvars = n + m_a
    obj = np.concatenate([-g.cost_k, g.exchange_rhs])
    rows, senses, rhs = [], [], []
    for i in range(m_b):
        row = np.zeros(nvars)
        row[:n] = g.trader_matrix[i]
        rows.append(row)
        senses.append(">=")
        rhs.append(g.trader_rhs[i])
    for j in range(n_w):
        row = np.zeros(nvars)
        row[:n] = -g.payoff_matrix[:, j]
        row[n:] = g.exchange_matrix[:, j]
        rows.append(row)
        senses.append("<=")
        rhs.append(g.offset_q[j])
    lp = LinearProgram(objective=obj, constraint_matrix=np.array(rows),
                       constraint_senses=tuple(senses), rhs=np.array(rhs))
    mask = IntegerMask(tuple(g.integer_mask.flags) + (False,) * m_a)
    return lp, mask


def solve_maximin_exact(g: GameSpec) -> MaximinResult:
    """The trader's guaranteed value over integer volume vectors."""
    if not _feasible(g.trader_matrix, g.trader_rhs):
        raise TraderPolyhedronInfeasible("trader polyhedron is empty")
    if not _feasible(g.exchange_matrix, g.exchange_rhs):
        raise EmptyExchangePolyhedron("exchange polyhedron is empty")
    lp, mask = _exact_milp(g)
    relaxed = solve_lp(lp)
    if not relaxed.is_optimal:
        raise NumericalFailure(f"maximin relaxation came back {relaxed.status}")
    out = solve_milp(lp, mask)
    if out.status == "infeasible":
        raise TraderPolyhedronInfeasible("no integer-feasible volume vector")
    if not out.is_optimal:
        raise NumericalFailure(f"mixed program came back {out.status}")
    x = out.solution[: g.n_x]
    z = out.solution[g.n_x:]
    value = float(out.objective_value)
    certified, _ = inner_minimum(g, x)
    if abs(certified - value) > GAP_TOL * max(1.0, abs(value)):
        raise NumericalFailure(
            f"inner evaluation {certified:.9g} disagrees with maximin value {value:.9g}")
    return MaximinResult(x_star=x, z_star=z, value=value,
                         relaxation_bound=float(relaxed.objective_value),
                         nodes_explored=out.nodes_explored)


def upper_bound_lp_pair(g: GameSpec) -> tuple[LinearProgram, LinearProgram]:
    """The dual LP pair whose common value is the relaxed game's saddle value.

    Primal (vars h then x):  max <b, h> - <K, x>
        st  B x >= d,  (h A)_j - (x D)_j <= q_j,  (h, x) >= 0
    Dual (vars w then tau):  min <q, w> + <-d, tau>
        st  (tau B)_i + (D w)_i <= K_i,  A w >= b,  (w, tau) >= 0
    """
    n, n_w = g.n_x, g.n_w
    m_a, m_b = g.exchange_matrix.shape[0], g.trader_matrix.shape[0]

    nv = m_a + n
    obj = np.concatenate([g.exchange_rhs, -g.cost_k])
    rows, senses, rhs = [], [], []
    for i in range(m_b):
        row = np.zeros(nv)
        row[m_a:] = g.trader_matrix[i]
        rows.append(row)
        senses.append(">=")
        rhs.append(g.trader_rhs[i])
    for j in range(n_w):
        row = np.zeros(nv)
        row[:m_a] = g.exchange_matrix[:, j]
        row[m_a:] = -g.payoff_matrix[:, j]
        rows.append(row)
        senses.append("<=")
        rhs.append(g.offset_q[j])
    primal = LinearProgram(objective=obj, constraint_matrix=np.array(rows),
                           constraint_senses=tuple(senses), rhs=np.array(rhs))

    nv2 = n_w + m_b
    obj2 = np.concatenate([g.offset_q, -g.trader_rhs])
    rows2, senses2, rhs2 = [], [], []
    for i in range(n):
        row = np.zeros(nv2)
        row[:n_w] = g.payoff_matrix[i]
        row[n_w:] = g.trader_matrix[:, i]
        rows2.append(row)
        senses2.append("<=")
        rhs2.append(g.cost_k[i])
    for i in range(m_a):
        row = np.zeros(nv2)
        row[:n_w] = g.exchange_matrix[i]
        rows2.append(row)
        senses2.append(">=")
        rhs2.append(g.exchange_rhs[i])
    dual = LinearProgram(objective=obj2, constraint_matrix=np.array(rows2),
                         constraint_senses=tuple(senses2), rhs=np.array(rhs2),
                         sense="min")
    return primal, dual


def solve_maximin_upper_bound(g: GameSpec) -> SaddlePointResult:
    """Saddle point of the relaxed game via the dual LP pair."""
    if not _feasible(g.trader_matrix, g.trader_rhs):
        raise TraderPolyhedronInfeasible("trader polyhedron is empty")
    if not _feasible(g.exchange_matrix, g.exchange_rhs):
        raise EmptyExchangePolyhedron("exchange polyhedron is empty")
    primal, dual = upper_bound_lp_pair(g)
    out_p = solve_lp(primal)
    if not out_p.is_optimal:
        raise NumericalFailure(f"saddle primal came back {out_p.status}")
    out_d = solve_lp(dual)
    if not out_d.is_optimal:
        raise NumericalFailure(f"saddle dual came back {out_d.status}")
    gap = abs(out_p.objective_value - out_d.objective_value)
    if gap > GAP_TOL * max(1.0, abs(out_p.objective_value)):
        raise NumericalFailure(f"dual pair disagrees by {gap:.3g}")

    m_a = g.exchange_matrix.shape[0]
    sol_p = refine_lexicographic(primal, out_p.objective_value)
    sol_d = refine_lexicographic(dual, out_d.objective_value)
    h = sol_p[:m_a]
    x = sol_p[m_a:]
    w = sol_d[: g.n_w]
    pi = sol_d[g.n_w:]
    value = float(out_p.objective_value)
    direct = float(g.exchange_rhs @ h - g.cost_k @ x)
    cross = float(g.offset_q @ w - g.trader_rhs @ pi)
    if abs(direct - cross) > GAP_TOL * max(1.0, abs(value)):
        raise NumericalFailure(
            f"saddle identity broken: <b,h>-<K,x> = {direct:.9g} vs <q,w>+<-d,pi> = {cross:.9g}")
    return SaddlePointResult(
        x_star=x,
        w_star=ExchangeScenario(w=w, labels=g.w_labels),
        h_star=h,
        pi_star=pi,
        value=value,
    )
