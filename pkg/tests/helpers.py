"""Shared construction helpers for the game tests and acceptance suite."""

import numpy as np

from traderdesk.model2 import BudgetRow, GameSpec, PriceBox, build_game, build_game_with_holdings


def section6_game() -> GameSpec:
    """The two-security worked example: cash 10000, leverage 0.5."""
    plus = [PriceBox("sec1", anchor=100.0, low=75.0, high=115.0)]
    minus = [PriceBox("sec2", anchor=50.0, low=35.0, high=65.0)]
    budget = [BudgetRow(coeffs=(100.0, 50.0), rhs=15000.0, sense="<=")]
    return build_game(plus, minus, [], budget, p_plus=0.6, p_minus=0.7)


def random_game(rng: np.random.Generator, with_holdings: bool = False) -> GameSpec:
    """Small random game with a bounded budget so the lattice stays tiny."""
    n_plus = int(rng.integers(1, 3))
    n_minus = int(rng.integers(0, 2))
    n_zero = int(rng.integers(0, 2))
    if n_plus + n_minus + n_zero == 0:
        n_plus = 1

    def boxes(prefix, count):
        out = []
        for i in range(count):
            anchor = float(rng.integers(5, 20))
            lo = anchor - float(rng.integers(1, 5))
            hi = anchor + float(rng.integers(1, 5))
            out.append(PriceBox(f"{prefix}{i}", anchor=anchor, low=lo, high=hi))
        return out

    plus = boxes("p", n_plus)
    minus = boxes("m", n_minus)
    zero = boxes("z", n_zero)
    all_boxes = plus + minus + zero
    prices = [b.anchor for b in all_boxes]
    budget = [BudgetRow(coeffs=tuple(prices),
                        rhs=float(rng.integers(30, 80)), sense="<=")]
    p_plus = float(rng.uniform(0.55, 0.95))
    p_minus = float(rng.uniform(0.55, 0.95))
    if with_holdings:
        holdings = {b.instrument_id: int(rng.integers(0, 4)) for b in all_boxes}
        return build_game_with_holdings(plus, minus, zero, budget, holdings,
                                        p_plus=p_plus, p_minus=p_minus)
    return build_game(plus, minus, zero, budget, p_plus=p_plus, p_minus=p_minus)


def sample_feasible_x(g: GameSpec, rng: np.random.Generator, n: int) -> list[np.ndarray]:
    """Uniform-ish feasible points of the relaxed trader polyhedron."""
    caps = np.full(g.n_x, 50.0)
    b, d = g.trader_matrix, g.trader_rhs
    for i in range(b.shape[0]):
        row = b[i]
        neg = row < 0
        if neg.any() and d[i] < 0:
            for j in np.flatnonzero(neg):
                caps[j] = min(caps[j], -d[i] / -row[j])
    out = []
    tries = 0
    while len(out) < n and tries < 50 * n:
        tries += 1
        x = rng.uniform(0.0, caps)
        if np.all(b @ x >= d - 1e-9):
            out.append(x)
    return out


def sample_feasible_w(g: GameSpec, rng: np.random.Generator, n: int) -> list[np.ndarray]:
    return [rng.uniform(g.w_lower, g.w_upper) for _ in range(n)]
