import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from traderdesk.errors import InvalidBelief, InvalidSpec, MissingBelief
from traderdesk.expectations import (
    Direction,
    FuturesSpec,
    OptionKind,
    OptionsSpec,
    SecurityBelief,
    Side,
    classify_positive,
    expected_price,
    futures_expected_finres,
    option_per_unit,
    options_expected_finres,
)


def belief(iid="s", s=10.0, direction=Direction.INCREASE, p=0.6, lo=2.0, hi=12.0):
    return SecurityBelief(iid, s, direction, p, lo, hi)


def manual_expected_price(s, direction, p, lo, hi):
    """Independent expansion of the three-event weighting."""
    up = (s + hi) / 2
    down = (lo + s) / 2
    q = (1 - p) / 2
    table = {
        Direction.INCREASE: (up, down, s),
        Direction.DECREASE: (down, up, s),
        Direction.NO_CHANGE: (s, down, up),
    }
    a, b2, c = table[direction]
    return p * a + q * b2 + q * c


class TestExpectedPrice:
    def test_worked_example_increase(self):
        # s=10, p(up in [10,12])=0.6, down to [2,10] / unchanged 0.2 each
        assert expected_price(belief()) == pytest.approx(9.80, abs=1e-12)

    def test_worked_example_decrease(self):
        b = belief(s=100.0, direction=Direction.DECREASE, p=0.6, lo=90.0, hi=160.0)
        assert expected_price(b) == pytest.approx(103.00, abs=1e-12)

    def test_degenerate_segment_collapses_to_anchor(self):
        for d in Direction:
            b = belief(s=50.0, direction=d, p=0.42, lo=50.0, hi=50.0)
            assert expected_price(b) == pytest.approx(50.0, abs=1e-15)

    def test_invalid_belief_rejected(self):
        with pytest.raises(InvalidBelief):
            belief(lo=11.0, hi=12.0)
        with pytest.raises(InvalidBelief):
            belief(p=0.0)

    @given(
        s=st.floats(1.0, 1e4),
        spread_lo=st.floats(0.0, 100.0),
        spread_hi=st.floats(0.0, 100.0),
        p=st.floats(0.01, 1.0),
        d=st.sampled_from(list(Direction)),
    )
    @settings(max_examples=300)
    def test_output_in_price_box_and_matches_manual(self, s, spread_lo, spread_hi, p, d):
        b = SecurityBelief("x", s, d, p, s - spread_lo, s + spread_hi)
        ms = expected_price(b)
        assert b.price_min - 1e-9 <= ms <= b.price_max + 1e-9
        assert ms == pytest.approx(manual_expected_price(s, d, p, b.price_min, b.price_max),
                                   abs=1e-12)

    @given(d=st.floats(0.1, 50.0), p=st.floats(0.01, 1.0))
    @settings(max_examples=200)
    def test_symmetric_box_closed_form(self, d, p):
        s = 100.0
        b = SecurityBelief("x", s, Direction.INCREASE, p, s - d, s + d)
        assert expected_price(b) - s == pytest.approx(d * (3 * p - 1) / 4, abs=1e-9)
        if p > 1 / 3 + 1e-6:
            assert expected_price(b) > s

    def test_strictly_increasing_in_p(self):
        values = [
            expected_price(belief(p=p, lo=5.0, hi=20.0))
            for p in (0.2, 0.4, 0.6, 0.8, 0.99)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestFutures:
    def test_degenerate_box_is_zero(self):
        f = FuturesSpec(98.0, 2.0, Side.BUY,
                        belief(s=100.0, lo=100.0, hi=100.0, p=0.5))
        for v in (0, 1, 10):
            assert futures_expected_finres(f, v) == 0.0

    def test_buy_increase_case(self):
        f = FuturesSpec(98.0, 2.0, Side.BUY,
                        belief(s=100.0, p=0.6, lo=80.0, hi=120.0))
        # 0.6*(110-100) + 0.2*(90-100) = 4 per unit
        assert futures_expected_finres(f, 10) == pytest.approx(40.0, abs=1e-12)

    def test_buy_decrease_case(self):
        f = FuturesSpec(
            45.0, 5.0, Side.BUY,
            belief(s=50.0, direction=Direction.DECREASE, p=0.7, lo=40.0, hi=70.0))
        # 0.7*(45-50) + 0.15*(60-50) = -2 per unit
        assert futures_expected_finres(f, 5) == pytest.approx(-10.0, abs=1e-12)

    def test_buy_plus_sell_cancel(self):
        kwargs = dict(strike_basis=95.0, carry_cost=5.0,
                      belief=belief(s=100.0, p=0.65, lo=70.0, hi=130.0))
        buy = FuturesSpec(side=Side.BUY, **kwargs)
        sell = FuturesSpec(side=Side.SELL, **kwargs)
        total = futures_expected_finres(buy, 7) + futures_expected_finres(sell, 7)
        assert total == pytest.approx(0.0, abs=1e-12)

    @given(v=st.integers(0, 50), k=st.integers(0, 5))
    @settings(max_examples=100)
    def test_positively_homogeneous(self, v, k):
        f = FuturesSpec(98.0, 2.0, Side.BUY,
                        belief(s=100.0, p=0.6, lo=80.0, hi=120.0))
        assert futures_expected_finres(f, k * v) == pytest.approx(
            k * futures_expected_finres(f, v), abs=1e-9)

    def test_threshold_outside_box_rejected(self):
        f = FuturesSpec(150.0, 10.0, Side.BUY,
                        belief(s=100.0, p=0.6, lo=80.0, hi=120.0))
        with pytest.raises(InvalidSpec):
            futures_expected_finres(f, 1)


class TestOptions:
    def test_zero_premium_degenerate(self):
        o = OptionsSpec(100.0, 0.0, OptionKind.CALL,
                        belief(s=100.0, lo=100.0, hi=100.0, p=0.5))
        assert options_expected_finres(o, 10) == 0.0

    def test_call_increase_with_premium_floor(self):
        o = OptionsSpec(95.0, 5.0, OptionKind.CALL,
                        belief(s=100.0, p=0.6, lo=60.0, hi=120.0))
        # 0.6*max(110-100,-5) + 0.2*max(80-100,-5) + 0.2*0 = 5 per unit
        assert options_expected_finres(o, 10) == pytest.approx(50.0, abs=1e-12)

    def test_put_decrease_case(self):
        o = OptionsSpec(
            45.0, 5.0, OptionKind.PUT,
            belief(s=50.0, direction=Direction.DECREASE, p=0.7, lo=40.0, hi=70.0))
        # 0.7*max(50-45,-5) + 0.15*max(50-60,-5) + 0.15*0 = 2.75 per unit
        assert options_expected_finres(o, 4) == pytest.approx(11.0, abs=1e-12)

    @given(
        p=st.floats(0.05, 1.0),
        gamma=st.floats(0.0, 20.0),
        spread=st.floats(0.0, 60.0),
        vol=st.integers(0, 20),
        kind=st.sampled_from(list(OptionKind)),
        d=st.sampled_from(list(Direction)),
    )
    @settings(max_examples=300)
    def test_premium_caps_the_loss(self, p, gamma, spread, vol, kind, d):
        h = 100.0 + gamma
        b = SecurityBelief("o", h, d, p, h - spread, h + spread)
        o = OptionsSpec(100.0, gamma, kind, b)
        assert options_expected_finres(o, vol) >= -gamma * vol - 1e-9

    def test_homogeneous_in_volume(self):
        o = OptionsSpec(95.0, 5.0, OptionKind.CALL,
                        belief(s=100.0, p=0.6, lo=60.0, hi=120.0))
        unit = option_per_unit(o)
        for k in range(6):
            assert options_expected_finres(o, k) == pytest.approx(k * unit, abs=1e-12)


class TestClassifyPositive:
    def test_worked_example_a_excluded(self):
        # Increase belief whose expectation still falls: not a hat buy
        part = classify_positive([belief()])
        assert part.plus == ("s",)
        assert part.hat_plus == ()

    def test_worked_example_b_lands_in_hat_minus(self):
        b = belief(iid="b", s=100.0, direction=Direction.DECREASE, p=0.6,
                   lo=90.0, hi=160.0)
        part = classify_positive([b])
        assert part.hat_minus == ("b",)

    def test_empty_input(self):
        part = classify_positive([])
        assert part.all_ids == ()
        assert part.all_hat == ()

    def test_held_split_into_hold_and_sell(self):
        up = belief(iid="up", s=10.0, p=0.9, lo=9.0, hi=15.0)  # Ms > 10
        down = belief(iid="down")  # Ms = 9.8 < 10
        part = classify_positive([up, down], held={"up": 3, "down": 2})
        assert part.hold == ("up",)
        assert part.sell == ("down",)

    def test_held_without_belief_raises(self):
        with pytest.raises(MissingBelief):
            classify_positive([belief()], held={"ghost": 1})

    def test_futures_hat_uses_buy_expectation(self):
        good = FuturesSpec(98.0, 2.0, Side.BUY,
                           belief(iid="f1", s=100.0, p=0.6, lo=80.0, hi=120.0))
        bad = FuturesSpec(
            45.0, 5.0, Side.BUY,
            belief(iid="f2", s=50.0, direction=Direction.DECREASE, p=0.7,
                   lo=40.0, hi=70.0))
        part = classify_positive([good, bad])
        assert part.hat_plus == ("f1",)
        assert part.hat_minus == ()

    def test_zero_expectation_not_promoted(self):
        flat = belief(iid="flat", s=10.0, lo=10.0, hi=10.0, p=0.7)
        part = classify_positive([flat])
        assert part.hat_plus == ()
