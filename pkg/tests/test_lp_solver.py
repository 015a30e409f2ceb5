import numpy as np
import pytest

from traderdesk.errors import DimensionMismatch
from traderdesk.lp_solver import (
    LinearProgram,
    build_dual,
    check_duality_certificate,
    refine_lexicographic,
    solve_dual_pair,
    solve_lp,
    to_mps,
)

from oracles import lp_feasible_vertices, lp_vertex_value


def simple_box_lp():
    # max x s.t. x <= 5, x >= 0
    return LinearProgram(
        objective=[1.0],
        constraint_matrix=[[1.0]],
        constraint_senses=("<=",),
        rhs=[5.0],
    )


def section6_primal():
    """Problem-(6)-shaped LP: vars (h1..h8, x1, x2)."""
    n = 10
    a = np.zeros((7, n))
    senses = []
    rhs = np.zeros(7)
    # trader-polyhedron rows on x
    a[0, 8] = 1.0
    a[1, 9] = 1.0
    a[2, 8], a[2, 9] = -100.0, -50.0
    rhs[2] = -15000.0
    senses += [">=", ">=", ">="]
    # coupling rows h_a - h_b - d*x <= 0
    coupling = [(0, 1, 8, 0.6), (2, 3, 8, 0.4), (4, 5, 9, 0.7), (6, 7, 9, 0.3)]
    for r, (ha, hb, xj, dcoef) in enumerate(coupling, start=3):
        a[r, ha] = 1.0
        a[r, hb] = -1.0
        a[r, xj] = -dcoef
        senses.append("<=")
    c = np.zeros(n)
    c[:8] = [100.0, -115.0, 75.0, -100.0, 35.0, -50.0, 50.0, -65.0]
    return LinearProgram(objective=c, constraint_matrix=a,
                         constraint_senses=tuple(senses), rhs=rhs)


def section7_primal():
    """Problem-(7)-shaped LP: vars (u1, u2, u3, y1+, z1+, y2-, z2-)."""
    n = 7
    rows, senses, rhs = [], [], []
    r = np.zeros(n)
    r[0], r[2], r[3], r[4] = 1.0, -100.0, 0.6, 0.4
    rows.append(r)
    senses.append("<=")
    rhs.append(0.0)
    r = np.zeros(n)
    r[1], r[2], r[5], r[6] = 1.0, -50.0, 0.7, 0.3
    rows.append(r)
    senses.append("<=")
    rhs.append(0.0)
    intervals = [(3, 100.0, 115.0), (4, 75.0, 100.0), (5, 35.0, 50.0), (6, 50.0, 65.0)]
    for j, lo, hi in intervals:
        r = np.zeros(n)
        r[j] = 1.0
        rows.append(r.copy())
        senses.append(">=")
        rhs.append(lo)
        rows.append(-r)
        senses.append(">=")
        rhs.append(-hi)
    c = np.zeros(n)
    c[2] = 15000.0
    return LinearProgram(objective=c, constraint_matrix=np.array(rows),
                         constraint_senses=tuple(senses), rhs=np.array(rhs),
                         sense="min")


def random_bounded_lp(rng, n=None, m=None):
    """Feasible (x=0) and bounded (box row) random max LP."""
    n = n or int(rng.integers(2, 6))
    m = m or int(rng.integers(1, 5))
    a = rng.integers(-2, 4, size=(m, n)).astype(float)
    b = rng.integers(1, 8, size=m).astype(float)
    box = np.ones(n)
    a = np.vstack([a, box])
    b = np.concatenate([b, [float(rng.integers(4, 10))]])
    c = rng.integers(-3, 5, size=n).astype(float)
    return LinearProgram(objective=c, constraint_matrix=a,
                         constraint_senses=("<=",) * (m + 1), rhs=b)


class TestSolveLp:
    def test_single_variable_bound(self):
        out = solve_lp(simple_box_lp())
        assert out.status == "optimal"
        assert out.primal[0] == pytest.approx(5.0, abs=1e-9)
        assert out.objective_value == pytest.approx(5.0, abs=1e-9)

    def test_problem7_value_and_u3(self):
        out = solve_lp(section7_primal())
        assert out.status == "optimal"
        assert out.objective_value == pytest.approx(13500.0, abs=1e-6)
        assert out.primal[2] == pytest.approx(0.9, abs=1e-9)

    def test_problem6_value(self):
        out = solve_lp(section6_primal())
        assert out.status == "optimal"
        assert out.objective_value == pytest.approx(13500.0, abs=1e-6)
        np.testing.assert_allclose(out.primal[:8], [90, 0, 60, 0, 0, 0, 0, 0], atol=1e-6)
        np.testing.assert_allclose(out.primal[8:], [150, 0], atol=1e-6)

    def test_matches_vertex_oracle_on_random_lps(self):
        rng = np.random.default_rng(20240803)
        for _ in range(60):
            lp = random_bounded_lp(rng)
            out = solve_lp(lp)
            assert out.status == "optimal"
            oracle, _ = lp_vertex_value(lp.objective, lp.constraint_matrix, lp.rhs)
            assert oracle is not None
            assert out.objective_value == pytest.approx(oracle, abs=1e-9)

    def test_infeasible_with_certificate(self):
        lp = LinearProgram(
            objective=[1.0],
            constraint_matrix=[[1.0], [1.0]],
            constraint_senses=(">=", "<="),
            rhs=[1.0, 0.0],
        )
        out = solve_lp(lp)
        assert out.status == "infeasible"
        assert out.certificate is not None

    def test_unbounded_with_ray(self):
        lp = LinearProgram(
            objective=[1.0, 0.0],
            constraint_matrix=[[0.0, 1.0]],
            constraint_senses=("<=",),
            rhs=[1.0],
        )
        out = solve_lp(lp)
        assert out.status == "unbounded"
        ray = out.certificate
        assert ray is not None
        assert float(lp.objective @ ray) > 0

    def test_variable_bounds_respected(self):
        lp = LinearProgram(
            objective=[1.0, 1.0],
            constraint_matrix=[[1.0, 1.0]],
            constraint_senses=("<=",),
            rhs=[100.0],
            var_lower=[2.0, 0.0],
            var_upper=[4.0, 3.0],
        )
        out = solve_lp(lp)
        assert out.status == "optimal"
        np.testing.assert_allclose(out.primal, [4.0, 3.0], atol=1e-9)

    def test_free_variable_split(self):
        lp = LinearProgram(
            objective=[1.0],
            constraint_matrix=[[1.0]],
            constraint_senses=(">=",),
            rhs=[-7.0],
            var_lower=[-np.inf],
            sense="min",
        )
        out = solve_lp(lp)
        assert out.status == "optimal"
        assert out.primal[0] == pytest.approx(-7.0, abs=1e-9)

    def test_equality_rows(self):
        lp = LinearProgram(
            objective=[3.0, 1.0],
            constraint_matrix=[[1.0, 1.0], [1.0, -1.0]],
            constraint_senses=("=", "<="),
            rhs=[4.0, 1.0],
        )
        out = solve_lp(lp)
        assert out.status == "optimal"
        np.testing.assert_allclose(out.primal, [2.5, 1.5], atol=1e-9)

    def test_determinism_bitwise(self):
        rng = np.random.default_rng(7)
        lp = random_bounded_lp(rng)
        a = solve_lp(lp)
        b = solve_lp(lp)
        assert a.status == b.status
        assert a.objective_value == b.objective_value
        assert np.array_equal(a.primal, b.primal)
        assert np.array_equal(a.dual, b.dual)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            LinearProgram(objective=[1.0, 2.0], constraint_matrix=[[1.0]],
                          constraint_senses=("<=",), rhs=[1.0])

    def test_zero_variable_lp(self):
        lp = LinearProgram(objective=np.zeros(0),
                           constraint_matrix=np.zeros((0, 0)),
                           constraint_senses=(), rhs=np.zeros(0))
        out = solve_lp(lp)
        assert out.status == "optimal"
        assert out.objective_value == 0.0


class TestDuality:
    def test_dual_pair_on_section6(self):
        out_p, out_d = solve_dual_pair(section6_primal())
        assert out_p.status == "optimal" and out_d.status == "optimal"
        assert out_p.objective_value == pytest.approx(13500.0, abs=1e-6)
        assert out_d.objective_value == pytest.approx(13500.0, abs=1e-6)

    def test_dual_of_problem6_is_problem7_shaped(self):
        dual = build_dual(section6_primal())
        # dual vars: one per primal row -> (u1,u2,u3,w1..w4); objective 15000*u3
        expected_obj = np.zeros(7)
        expected_obj[2] = 15000.0
        np.testing.assert_allclose(dual.objective, expected_obj)
        assert dual.sense == "min"
        # dual row for h1: w1 >= 100
        row_h1 = dual.constraint_matrix[0]
        np.testing.assert_allclose(row_h1, [0, 0, 0, 1, 0, 0, 0])
        assert dual.rhs[0] == 100.0

    def test_infeasible_primal_dual_pair(self):
        lp = LinearProgram(
            objective=[1.0],
            constraint_matrix=[[1.0], [1.0]],
            constraint_senses=(">=", "<="),
            rhs=[1.0, 0.0],
        )
        out_p, out_d = solve_dual_pair(lp)
        assert out_p.status == "infeasible"
        assert out_d.status in ("infeasible", "unbounded")

    def test_random_dual_pairs_close_and_match_oracle(self):
        rng = np.random.default_rng(99)
        for _ in range(40):
            lp = random_bounded_lp(rng)
            out_p, out_d = solve_dual_pair(lp)
            assert out_p.status == "optimal"
            assert out_d.status == "optimal"
            assert abs(out_p.objective_value - out_d.objective_value) <= 1e-6
            oracle, _ = lp_vertex_value(lp.objective, lp.constraint_matrix, lp.rhs)
            assert out_p.objective_value == pytest.approx(oracle, abs=1e-9)

    def test_weak_duality_on_sampled_feasible_pairs(self):
        rng = np.random.default_rng(4242)
        lp = random_bounded_lp(rng, n=3, m=3)
        dual = build_dual(lp)
        prim_verts = lp_feasible_vertices(lp.constraint_matrix, lp.rhs)
        # dual rows are all >=; oracle expects <= form: negate
        dual_verts = lp_feasible_vertices(-dual.constraint_matrix, -dual.rhs)
        assert prim_verts and dual_verts
        for x in prim_verts[:20]:
            for y in dual_verts[:20]:
                assert float(lp.objective @ x) <= float(dual.objective @ y) + 1e-9

    def test_certificate_accepts_section6_solution(self):
        lp = section6_primal()
        primal = np.array([90, 0, 60, 0, 0, 0, 0, 0, 150, 0], dtype=float)
        dual = np.array([0, 0, 0.9, 100, 75, 35, 50], dtype=float)
        assert check_duality_certificate(lp, primal, dual)

    def test_certificate_rejects_feasible_but_suboptimal(self):
        lp = simple_box_lp()
        assert not check_duality_certificate(lp, [0.0], [0.0])

    def test_certificate_rejects_perturbed_optimum(self):
        lp = section6_primal()
        primal = np.array([90, 0, 60, 0, 0, 0, 0, 0, 150, 0], dtype=float)
        dual = np.array([0, 0, 0.9, 100, 75, 35, 50], dtype=float)
        bad = primal.copy()
        bad[0] += 1e-3
        assert not check_duality_certificate(lp, bad, dual)

    def test_certificate_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            check_duality_certificate(simple_box_lp(), [1.0, 2.0], [0.0])


class TestUtilities:
    def test_lexicographic_refinement_picks_lowest_vertex(self):
        # max 0 s.t. x+y >= 1, x,y <= 2: optimal face is the whole polytope;
        # lexicographically smallest optimum is (0, 1).
        lp = LinearProgram(
            objective=[0.0, 0.0],
            constraint_matrix=[[1.0, 1.0]],
            constraint_senses=(">=",),
            rhs=[1.0],
            var_upper=[2.0, 2.0],
        )
        out = solve_lp(lp)
        refined = refine_lexicographic(lp, out.objective_value)
        np.testing.assert_allclose(refined, [0.0, 1.0], atol=1e-6)

    def test_mps_emission_roundtrippable_text(self):
        text = to_mps(section6_primal(), name="SEC6")
        assert "NAME" in text and "ROWS" in text and "ENDATA" in text
        assert text.count(" G  R") == 3
        assert text.count(" L  R") == 4

    def test_concurrent_solves_match_sequential(self):
        from concurrent.futures import ThreadPoolExecutor

        rng = np.random.default_rng(60)
        lps = [random_bounded_lp(rng) for _ in range(16)]
        sequential = [solve_lp(lp).objective_value for lp in lps]
        with ThreadPoolExecutor(max_workers=8) as pool:
            parallel = [out.objective_value for out in pool.map(solve_lp, lps)]
        assert sequential == parallel
