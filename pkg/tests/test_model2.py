import numpy as np
import pytest

from traderdesk.errors import (
    DimensionMismatch,
    EmptyExchangePolyhedron,
    IncompatibleBudget,
)
from traderdesk.lp_solver import solve_lp
from traderdesk.model2 import (
    BudgetRow,
    DerivativeClass,
    PriceBox,
    build_derivative_game,
    build_game,
    build_game_with_holdings,
    evaluate_payoff,
    inner_minimum,
    solve_maximin_exact,
    solve_maximin_upper_bound,
    upper_bound_lp_pair,
)

from helpers import random_game, sample_feasible_w, sample_feasible_x, section6_game
from oracles import box_inner_min, maximin_by_enumeration


class TestBuildGame:
    def test_section6_matrices_exactly(self):
        g = section6_game()
        np.testing.assert_array_equal(
            g.trader_matrix, [[1.0, 0.0], [0.0, 1.0], [-100.0, -50.0]])
        np.testing.assert_array_equal(g.trader_rhs, [0.0, 0.0, -15000.0])
        np.testing.assert_array_equal(
            g.payoff_matrix, [[0.6, 0.4, 0.0, 0.0], [0.0, 0.0, 0.7, 0.3]])
        expected_a = np.zeros((8, 4))
        for j in range(4):
            expected_a[2 * j, j] = 1.0
            expected_a[2 * j + 1, j] = -1.0
        np.testing.assert_array_equal(g.exchange_matrix, expected_a)
        np.testing.assert_array_equal(
            g.exchange_rhs, [100.0, -115.0, 75.0, -100.0, 35.0, -50.0, 50.0, -65.0])
        np.testing.assert_array_equal(g.offset_q, np.zeros(4))
        np.testing.assert_array_equal(g.cost_k, np.zeros(2))

    def test_certainty_degenerates_to_y_column(self):
        g = build_game([PriceBox("a", 10.0, 8.0, 12.0)], [], [], [], p_plus=1.0)
        np.testing.assert_array_equal(g.payoff_matrix, [[1.0, 0.0]])

    def test_three_group_block_structure(self):
        g = build_game(
            [PriceBox("a", 10, 8, 12), PriceBox("b", 20, 15, 25)],
            [PriceBox("c", 30, 25, 35)],
            [PriceBox("d", 40, 35, 45)],
            [], p_plus=0.6, p_minus=0.7)
        d = g.payoff_matrix
        assert d.shape == (4, 8)
        np.testing.assert_allclose(d.sum(axis=1), np.ones(4))
        # each row has exactly two nonzeros inside its group columns
        blocks = {0: (0, 4), 1: (0, 4), 2: (4, 6), 3: (6, 8)}
        for i in range(4):
            nz = np.flatnonzero(d[i])
            assert len(nz) == 2
            lo, hi = blocks[i]
            assert np.all((nz >= lo) & (nz < hi))

    def test_empty_interval_rejected(self):
        with pytest.raises(DimensionMismatch):
            PriceBox("bad", anchor=5.0, low=6.0, high=7.0)

    def test_incompatible_budget_rejected(self):
        with pytest.raises(IncompatibleBudget):
            build_game([PriceBox("a", 10, 8, 12)], [], [],
                       [BudgetRow(coeffs=(1.0,), rhs=1.0, sense=">="),
                        BudgetRow(coeffs=(1.0,), rhs=0.5, sense="<=")],
                       p_plus=0.6)


class TestHoldingsOffset:
    def test_zero_holdings_identical(self):
        plus = [PriceBox("a", 10, 8, 12)]
        g0 = build_game(plus, [], [], [], p_plus=0.6)
        g1 = build_game_with_holdings(plus, [], [], [], {"a": 0}, p_plus=0.6)
        np.testing.assert_array_equal(g0.offset_q, g1.offset_q)

    def test_plus_holdings_split_by_probability(self):
        g = build_game_with_holdings([PriceBox("a", 10, 8, 12)], [], [],
                                     [], {"a": 10}, p_plus=0.6)
        np.testing.assert_allclose(g.offset_q, [6.0, 4.0])

    def test_zero_group_holdings_symmetric(self):
        g = build_game_with_holdings([], [], [PriceBox("n", 10, 8, 12)],
                                     [], {"n": 8})
        np.testing.assert_allclose(g.offset_q, [4.0, 4.0])


class TestDerivativeGame:
    def test_reduces_to_securities_game(self):
        plus = (PriceBox("a", 10, 8, 12),)
        sec = DerivativeClass(plus=plus, p_plus=0.6, holdings={"a": 3})
        g = build_derivative_game(sec, None, None,
                                  [BudgetRow(coeffs=(10.0,), rhs=100.0)])
        ref = build_game_with_holdings(list(plus), [], [],
                                       [BudgetRow(coeffs=(10.0,), rhs=100.0)],
                                       {"a": 3}, p_plus=0.6)
        np.testing.assert_array_equal(g.payoff_matrix, ref.payoff_matrix)
        np.testing.assert_array_equal(g.offset_q, ref.offset_q)
        np.testing.assert_array_equal(g.trader_matrix, ref.trader_matrix)

    def test_futures_block_and_cost(self):
        fut = DerivativeClass(plus=(PriceBox("f", 100.0, 80.0, 120.0),),
                              costs={"f": 100.0}, p_plus=0.6)
        g = build_derivative_game(None, fut, None,
                                  [BudgetRow(coeffs=(100.0,), rhs=1000.0)])
        np.testing.assert_allclose(g.payoff_matrix, [[0.6, 0.4]])
        np.testing.assert_allclose(g.cost_k, [100.0])

    def test_mixed_game_matches_enumeration(self):
        sec = DerivativeClass(plus=(PriceBox("s", 10.0, 8.0, 13.0),), p_plus=0.7)
        fut = DerivativeClass(plus=(PriceBox("f", 20.0, 16.0, 30.0),),
                              costs={"f": 20.0}, p_plus=0.6)
        budget = [BudgetRow(coeffs=(10.0, 20.0), rhs=60.0)]
        g = build_derivative_game(sec, fut, None, budget)
        result = solve_maximin_exact(g)
        oracle_val, oracle_x = maximin_by_enumeration(
            g.payoff_matrix, g.cost_k, g.offset_q, g.w_lower, g.w_upper,
            [10.0, 20.0], 60.0)
        assert result.value == pytest.approx(oracle_val, abs=1e-9)


class TestPayoffEvaluation:
    def test_section6_payoff(self):
        g = section6_game()
        value = evaluate_payoff(g, [150.0, 0.0], [100.0, 75.0, 35.0, 50.0])
        assert value == pytest.approx(13500.0)

    def test_zero_volumes(self):
        g = section6_game()
        assert evaluate_payoff(g, [0.0, 0.0], [100.0, 75.0, 35.0, 50.0]) == 0.0

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(2718)
        g = random_game(rng, with_holdings=True)
        x = rng.uniform(0, 3, size=g.n_x)
        w = rng.uniform(g.w_lower, g.w_upper)
        naive = 0.0
        for i in range(g.n_x):
            for j in range(g.n_w):
                naive += x[i] * g.payoff_matrix[i, j] * w[j]
        naive -= float(g.cost_k @ x)
        naive += float(g.offset_q @ w)
        assert evaluate_payoff(g, x, w) == pytest.approx(naive, abs=1e-9)

    def test_dimension_mismatch(self):
        g = section6_game()
        with pytest.raises(DimensionMismatch):
            evaluate_payoff(g, [1.0], [100.0, 75.0, 35.0, 50.0])

    def test_inner_minimum_matches_box_oracle(self):
        rng = np.random.default_rng(11)
        g = random_game(rng, with_holdings=True)
        for _ in range(10):
            x = rng.integers(0, 3, size=g.n_x).astype(float)
            val, w = inner_minimum(g, x)
            coeffs = g.payoff_matrix.T @ x + g.offset_q
            oracle = box_inner_min(coeffs, g.w_lower, g.w_upper) - float(g.cost_k @ x)
            assert val == pytest.approx(oracle, abs=1e-9)
            assert evaluate_payoff(g, x, w) == pytest.approx(val, abs=1e-9)


class TestExactMaximin:
    def test_section6_exact(self):
        result = solve_maximin_exact(section6_game())
        np.testing.assert_allclose(result.x_star, [150.0, 0.0], atol=1e-6)
        assert result.value == pytest.approx(13500.0, abs=1e-6)
        assert result.value <= result.relaxation_bound + 1e-6

    def test_zero_budget_forces_zero(self):
        g = build_game([PriceBox("a", 10, 8, 12)], [], [],
                       [BudgetRow(coeffs=(10.0,), rhs=0.0)], p_plus=0.6)
        result = solve_maximin_exact(g)
        assert result.value == pytest.approx(0.0, abs=1e-9)

    def test_two_security_toy_matches_brute_force(self):
        g = build_game([PriceBox("a", 10.0, 9.0, 12.0)],
                       [PriceBox("b", 5.0, 3.0, 6.0)], [],
                       [BudgetRow(coeffs=(10.0, 5.0), rhs=15.0)],
                       p_plus=0.7, p_minus=0.8)
        result = solve_maximin_exact(g)
        oracle_val, _ = maximin_by_enumeration(
            g.payoff_matrix, g.cost_k, g.offset_q, g.w_lower, g.w_upper,
            [10.0, 5.0], 15.0)
        assert result.value == pytest.approx(oracle_val, abs=1e-9)

    def test_random_games_match_enumeration(self):
        rng = np.random.default_rng(909)
        for _ in range(15):
            g = random_game(rng, with_holdings=bool(rng.integers(0, 2)))
            result = solve_maximin_exact(g)
            prices = -g.trader_matrix[-1]  # budget row is the last >= row
            budget = -g.trader_rhs[-1]
            oracle_val, _ = maximin_by_enumeration(
                g.payoff_matrix, g.cost_k, g.offset_q, g.w_lower, g.w_upper,
                prices, budget)
            assert result.value == pytest.approx(oracle_val, abs=1e-7)


class TestUpperBound:
    def test_section6_full_reproduction(self):
        result = solve_maximin_upper_bound(section6_game())
        assert result.value == pytest.approx(13500.0, abs=1e-6)
        np.testing.assert_allclose(result.x_star, [150.0, 0.0], atol=1e-6)
        np.testing.assert_allclose(result.h_star, [90, 0, 60, 0, 0, 0, 0, 0], atol=1e-6)
        np.testing.assert_allclose(result.pi_star, [0.0, 0.0, 0.9], atol=1e-6)
        np.testing.assert_allclose(result.w_star.w, [100.0, 75.0, 35.0, 50.0], atol=1e-6)

    def test_pair_values_match_mechanical_duality(self):
        primal, dual = upper_bound_lp_pair(section6_game())
        assert solve_lp(primal).objective_value == pytest.approx(13500.0, abs=1e-6)
        assert solve_lp(dual).objective_value == pytest.approx(13500.0, abs=1e-6)

    def test_budget_zero_with_holdings_decouples(self):
        g = build_game_with_holdings([PriceBox("a", 10, 8, 12)], [], [],
                                     [BudgetRow(coeffs=(10.0,), rhs=0.0)],
                                     {"a": 5}, p_plus=0.6)
        result = solve_maximin_upper_bound(g)
        # payoff reduces to <q, w>; worst case puts both components low
        expected = box_inner_min(g.offset_q, g.w_lower, g.w_upper)
        assert result.value == pytest.approx(expected, abs=1e-6)

    def test_ordering_and_saddle_on_random_games(self):
        rng = np.random.default_rng(135)
        for _ in range(10):
            g = random_game(rng, with_holdings=bool(rng.integers(0, 2)))
            exact = solve_maximin_exact(g)
            bound = solve_maximin_upper_bound(g)
            assert exact.value <= bound.value + 1e-6
            for w in sample_feasible_w(g, rng, 25):
                assert evaluate_payoff(g, bound.x_star, w) >= bound.value - 1e-6
            for x in sample_feasible_x(g, rng, 25):
                assert evaluate_payoff(g, x, bound.w_star) <= bound.value + 1e-6

    def test_dual_pair_identity(self):
        rng = np.random.default_rng(777)
        for _ in range(5):
            g = random_game(rng, with_holdings=True)
            r = solve_maximin_upper_bound(g)
            lhs = float(g.exchange_rhs @ r.h_star - g.cost_k @ r.x_star)
            rhs = float(g.offset_q @ r.w_star.w - g.trader_rhs @ r.pi_star)
            assert lhs == pytest.approx(rhs, abs=1e-6)
            assert r.value == pytest.approx(lhs, abs=1e-6)

    def test_empty_exchange_polyhedron_raises(self):
        with pytest.raises(EmptyExchangePolyhedron):
            build_game([PriceBox("a", 10, 8, 12,
                                 y_interval=(12.0, 11.0))], [], [], [],
                       p_plus=0.6)
