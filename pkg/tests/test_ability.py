import numpy as np
import pytest
from scipy.stats import chisquare

from traderdesk.ability import (
    NOT_UP,
    UP,
    AbilityEstimate,
    TimeSeries,
    TrialRecord,
    bernoulli_predictor,
    check_consistency,
    direction_of,
    estimate_ability,
    make_random_walk,
    run_bernoulli_trials,
    run_segment_trials,
    sample_segments,
    simulate_trading,
)
from traderdesk.errors import LengthTooLong, NoTrials


def zigzag_series(n=101, lo=100.0, hi=103.0):
    prices = np.array([lo if i % 2 == 0 else hi for i in range(n)])
    return TimeSeries(np.arange(n, dtype=float), prices)


class TestTimeSeries:
    def test_validation(self):
        with pytest.raises(ValueError):
            TimeSeries([0.0, 0.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            TimeSeries([0.0, 1.0], [1.0, -2.0])

    def test_csv_roundtrip(self, tmp_path):
        path = tmp_path / "series.csv"
        path.write_text("timestamp,price\n0,100.0\n1,101.5\n2,99.25\n")
        series = TimeSeries.from_csv(path)
        assert len(series) == 3
        assert series.prices[1] == 101.5


class TestSampleSegments:
    def test_empty_request(self):
        series = make_random_walk(100, seed=1)
        assert len(sample_segments(series, 10, 0, seed=3)) == 0

    def test_deterministic_for_seed(self):
        series = make_random_walk(1000, seed=42)
        a = sample_segments(series, 50, 10, seed=7)
        b = sample_segments(series, 50, 10, seed=7)
        np.testing.assert_array_equal(a, b)

    def test_too_long_rejected(self):
        series = make_random_walk(1000, seed=42)
        with pytest.raises(LengthTooLong):
            sample_segments(series, 2000, 5, seed=0)
        with pytest.raises(LengthTooLong):
            sample_segments(series, 1000, 5, seed=0)  # no successor point

    def test_without_replacement_when_possible(self):
        series = make_random_walk(100, seed=5)
        offsets = sample_segments(series, 10, 60, seed=1)
        assert len(set(offsets.tolist())) == 60

    def test_offsets_fit_with_successor(self):
        series = make_random_walk(40, seed=9)
        offsets = sample_segments(series, 30, 200, seed=2)  # with replacement
        assert np.all(offsets + 30 < 40)

    def test_uniformity_chi_square(self):
        series = make_random_walk(60, seed=3)
        counts = np.zeros(50)
        for seed in range(200):
            for off in sample_segments(series, 10, 5, seed=seed):
                counts[off] += 1
        _, pvalue = chisquare(counts)
        assert pvalue > 0.001


class TestEstimateAbility:
    def rec(self, correct):
        return TrialRecord(0, 2, UP, UP if correct else NOT_UP, correct)

    def test_all_correct(self):
        est = estimate_ability([self.rec(True)] * 10)
        assert est.p_hat == 1.0
        assert est.n_trials == 10

    def test_normal_interval(self):
        est = estimate_ability([self.rec(True)] * 70 + [self.rec(False)] * 30)
        assert est.p_hat == pytest.approx(0.7)
        half = 1.96 * np.sqrt(0.7 * 0.3 / 100)
        assert est.ci95 == pytest.approx((0.7 - half, 0.7 + half))

    def test_exact_interval_contains_p_hat(self):
        est = estimate_ability([self.rec(True)] * 7 + [self.rec(False)] * 3,
                               method="exact")
        assert est.ci95[0] <= est.p_hat <= est.ci95[1]

    def test_no_trials(self):
        with pytest.raises(NoTrials):
            estimate_ability([])

    def test_permutation_invariant(self):
        records = [self.rec(True)] * 5 + [self.rec(False)] * 5
        a = estimate_ability(records)
        b = estimate_ability(list(reversed(records)))
        assert a == b

    def test_synthetic_bernoulli_converges(self):
        series = make_random_walk(5000, seed=10)
        records = run_bernoulli_trials(series, length=50, n=10_000, seed=99, p=0.7)
        est = estimate_ability(records)
        assert 0.68 <= est.p_hat <= 0.72

    def test_mean_over_seeds_close_to_p(self):
        series = make_random_walk(2000, seed=11)
        hats = []
        for seed in range(100):
            recs = run_bernoulli_trials(series, length=20, n=10_000, seed=seed, p=0.6)
            hats.append(estimate_ability(recs).p_hat)
        assert abs(float(np.mean(hats)) - 0.6) < 0.01


class TestSimulateTrading:
    def test_constant_series_zero_pnl(self):
        series = TimeSeries(np.arange(10.0), np.full(10, 42.0))
        run = simulate_trading(series, lambda w: UP)
        assert run.total == 0.0

    def test_perfect_predictor_on_zigzag_collects_all_moves(self):
        series = zigzag_series()

        def perfect(window):
            t = len(window) - 1
            return direction_of(series.prices[t], series.prices[t + 1])

        run = simulate_trading(series, perfect)
        assert run.total == pytest.approx(float(np.sum(np.abs(np.diff(series.prices)))))
        assert run.hit_rate == 1.0

    def test_zero_sizing_zero_pnl(self):
        series = make_random_walk(200, seed=3)
        run = simulate_trading(series, lambda w: UP, sizing=lambda t: 0)
        assert run.total == 0.0
        assert np.all(run.step_pnl == 0.0)

    def test_costs_subtract(self):
        series = zigzag_series(n=11)

        def perfect(window):
            t = len(window) - 1
            return direction_of(series.prices[t], series.prices[t + 1])

        free = simulate_trading(series, perfect)
        costly = simulate_trading(series, perfect, costs=0.5)
        assert costly.total == pytest.approx(free.total - 0.5 * 10)

    def test_slight_edge_has_positive_mean_pnl(self):
        totals = []
        for seed in range(200):
            series = make_random_walk(200, seed=seed)
            predictor = bernoulli_predictor(series, p=0.55, seed=seed + 10_000)
            totals.append(simulate_trading(series, predictor).total)
        assert float(np.mean(totals)) > 0.0


class TestCheckConsistency:
    def test_identical_records_zero_tolerance(self):
        series = make_random_walk(500, seed=2)
        records = run_bernoulli_trials(series, 20, 200, seed=5, p=0.7)
        est = estimate_ability(records)
        assert check_consistency(est, records, tolerance=0.0)

    def test_detects_drift(self):
        est = AbilityEstimate(p_hat=0.70, n_trials=100, ci95=(0.6, 0.8))
        live = ([TrialRecord(0, 2, UP, UP, True)] * 50
                + [TrialRecord(0, 2, UP, NOT_UP, False)] * 50)
        assert not check_consistency(est, live, tolerance=0.05)

    def test_same_source_consistent(self):
        series = make_random_walk(2000, seed=8)
        base = estimate_ability(run_bernoulli_trials(series, 20, 5000, seed=1, p=0.7))
        hits = 0
        for seed in range(40):
            live = run_bernoulli_trials(series, 20, 5000, seed=seed + 100, p=0.7)
            hits += check_consistency(base, live, tolerance=0.05)
        assert hits == 40

    def test_no_live_trials(self):
        est = AbilityEstimate(0.5, 10, (0.2, 0.8))
        with pytest.raises(NoTrials):
            check_consistency(est, [])


class TestTrialRunner:
    def test_records_score_against_successor(self):
        series = zigzag_series(n=31)
        # always predict up: correct exactly when the successor rises
        records = run_segment_trials(series, length=5, n=10, seed=3,
                                     predictor=lambda w: UP)
        for r in records:
            end = r.segment_offset + r.segment_length - 1
            rises = series.prices[end + 1] > series.prices[end]
            assert r.correct == (rises == (r.prediction == UP))
