"""Closed-form expectation arithmetic for uniform price beliefs.

A belief says a price now at ``s`` moves into ``[price_min, price_max]`` by the
next decision moment; conditional on the move direction the new price is
uniform on the half-segment above or below the anchor, so the conditional
means are the segment midpoints.  The believed direction carries probability
``p``; the two remaining outcomes split ``1 - p`` evenly.

Securities anchor the midpoints at the current price.  Futures and options
anchor them at the contract's break-even threshold ``h`` (strike basis plus
carry cost, or strike plus premium), and option terms are floored at the
premium since the right can be abandoned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union

from .errors import InvalidBelief, InvalidSpec, MissingBelief

POSITIVE_GAIN_TOL = 1e-9


class Direction(str, Enum):
    INCREASE = "increase"
    DECREASE = "decrease"
    NO_CHANGE = "no_change"


class Side(str, Enum):
    BUY = "buy"
    SELL = "sell"


class OptionKind(str, Enum):
    CALL = "call"
    PUT = "put"


@dataclass(frozen=True)
class SecurityBelief:
    instrument_id: str
    price_now: float
    direction: Direction
    p: float
    price_min: float
    price_max: float

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if not (self.price_min <= self.price_now <= self.price_max):
            raise InvalidBelief(
                f"{self.instrument_id}: need price_min <= price_now <= price_max, "
                f"got [{self.price_min}, {self.price_now}, {self.price_max}]"
            )
        if not (0.0 < self.p <= 1.0):
            raise InvalidBelief(f"{self.instrument_id}: p must be in (0, 1], got {self.p}")


@dataclass(frozen=True)
class FuturesSpec:
    """A futures contract: pay ``strike_basis + carry_cost`` now per unit."""

    strike_basis: float
    carry_cost: float
    side: Side
    belief: SecurityBelief
    held_volume: int = 0

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        if self.strike_basis < 0 or self.carry_cost < 0:
            raise InvalidSpec(f"{self.instrument_id}: strike basis and carry cost must be >= 0")
        if self.held_volume < 0:
            raise InvalidSpec(f"{self.instrument_id}: held_volume must be >= 0")

    @property
    def instrument_id(self) -> str:
        return self.belief.instrument_id

    @property
    def threshold(self) -> float:
        return self.strike_basis + self.carry_cost


@dataclass(frozen=True)
class OptionsSpec:
    """An options contract: premium caps the downside per unit."""

    strike: float
    premium: float
    kind: OptionKind
    belief: SecurityBelief
    held_volume: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", OptionKind(self.kind))
        if self.premium < 0:
            raise InvalidSpec(f"{self.instrument_id}: premium must be >= 0")
        if self.held_volume < 0:
            raise InvalidSpec(f"{self.instrument_id}: held_volume must be >= 0")

    @property
    def instrument_id(self) -> str:
        return self.belief.instrument_id

    @property
    def threshold(self) -> float:
        return self.strike + self.premium


Instrument = Union[SecurityBelief, FuturesSpec, OptionsSpec]


@dataclass(frozen=True)
class Partition:
    """Direction sets, their positive-expectation hat subsets, and hold/sell.

    ``hat_*`` flags instruments worth buying fresh; ``hold``/``sell`` split the
    held ones by whether keeping them beats selling at today's price.
    """

    plus: tuple[str, ...] = ()
    minus: tuple[str, ...] = ()
    zero: tuple[str, ...] = ()
    held: Mapping[str, int] = field(default_factory=dict)
    hat_plus: tuple[str, ...] = ()
    hat_minus: tuple[str, ...] = ()
    hat_zero: tuple[str, ...] = ()
    hold: tuple[str, ...] = ()
    sell: tuple[str, ...] = ()

    def __post_init__(self):
        sp, sm, sz = set(self.plus), set(self.minus), set(self.zero)
        if sp & sm or sm & sz or sp & sz:
            from .errors import InconsistentPartition

            raise InconsistentPartition("direction sets must be disjoint")
        for hat, parent in ((self.hat_plus, sp), (self.hat_minus, sm), (self.hat_zero, sz)):
            if not set(hat) <= parent:
                from .errors import InconsistentPartition

                raise InconsistentPartition("hat sets must be subsets of their direction sets")

    @property
    def all_ids(self) -> tuple[str, ...]:
        return self.plus + self.minus + self.zero

    @property
    def all_hat(self) -> tuple[str, ...]:
        return self.hat_plus + self.hat_minus + self.hat_zero

    @property
    def non_hat(self) -> tuple[str, ...]:
        hat = set(self.all_hat)
        return tuple(i for i in self.all_ids if i not in hat)


def _mids(anchor: float, lo: float, hi: float) -> tuple[float, float]:
    """(up-mid, down-mid) of the belief segment around an anchor price."""
    return (anchor + hi) / 2.0, (lo + anchor) / 2.0


def expected_price(b: SecurityBelief) -> float:
    """Expectation of the next-moment price under the three-event weighting."""
    up_mid, down_mid = _mids(b.price_now, b.price_min, b.price_max)
    q = (1.0 - b.p) / 2.0
    if b.direction is Direction.INCREASE:
        return b.p * up_mid + q * down_mid + q * b.price_now
    if b.direction is Direction.DECREASE:
        return b.p * down_mid + q * up_mid + q * b.price_now
    return b.p * b.price_now + q * down_mid + q * up_mid


def futures_per_unit(f: FuturesSpec) -> float:
    """Expected profit per contract bought at the threshold price ``h``."""
    b = f.belief
    h = f.threshold
    if not (b.price_min - 1e-12 <= h <= b.price_max + 1e-12):
        raise InvalidSpec(
            f"{f.instrument_id}: threshold {h} outside price box "
            f"[{b.price_min}, {b.price_max}]"
        )
    up_mid, down_mid = _mids(h, b.price_min, b.price_max)
    q = (1.0 - b.p) / 2.0
    if b.direction is Direction.INCREASE:
        value = b.p * (up_mid - h) + q * (down_mid - h)
    elif b.direction is Direction.DECREASE:
        value = b.p * (down_mid - h) + q * (up_mid - h)
    else:
        value = q * (down_mid - h) + q * (up_mid - h)
    return -value if f.side is Side.SELL else value


def futures_expected_finres(f: FuturesSpec, volume: int) -> float:
    """Expected financial result of buying ``volume`` contracts; linear in it."""
    if volume < 0:
        raise InvalidSpec(f"{f.instrument_id}: volume must be >= 0, got {volume}")
    return volume * futures_per_unit(f)


def option_per_unit(o: OptionsSpec) -> float:
    """Expected profit per option; every event term is floored at -premium."""
    b = o.belief
    h = o.threshold
    if not (b.price_min - 1e-12 <= h <= b.price_max + 1e-12):
        raise InvalidSpec(
            f"{o.instrument_id}: threshold {h} outside price box "
            f"[{b.price_min}, {b.price_max}]"
        )
    up_mid, down_mid = _mids(h, b.price_min, b.price_max)
    q = (1.0 - b.p) / 2.0

    def payoff(mid: float) -> float:
        raw = (mid - h) if o.kind is OptionKind.CALL else (h - mid)
        return max(raw, -o.premium)

    if b.direction is Direction.INCREASE:
        events = ((b.p, up_mid), (q, down_mid), (q, h))
    elif b.direction is Direction.DECREASE:
        events = ((b.p, down_mid), (q, up_mid), (q, h))
    else:
        events = ((b.p, h), (q, down_mid), (q, up_mid))
    return sum(w * payoff(mid) for w, mid in events)


def options_expected_finres(o: OptionsSpec, volume: int) -> float:
    if volume < 0:
        raise InvalidSpec(f"{o.instrument_id}: volume must be >= 0, got {volume}")
    return volume * option_per_unit(o)


def _buy_gain(item: Instrument) -> float:
    if isinstance(item, SecurityBelief):
        return expected_price(item) - item.price_now
    if isinstance(item, FuturesSpec):
        return futures_per_unit(item)
    return option_per_unit(item)


def _hold_gain(item: Instrument) -> float:
    belief = item if isinstance(item, SecurityBelief) else item.belief
    return expected_price(belief) - belief.price_now


def classify_positive(items: Sequence[Instrument],
                      held: Mapping[str, int] | None = None) -> Partition:
    """Split instruments by believed direction and positive expected gain.

    The hat sets collect instruments whose fresh-buy expectation is strictly
    positive; held instruments land in ``hold`` when their next-price
    expectation beats today's price and in ``sell`` otherwise.
    """
    held = dict(held or {})
    by_dir = {Direction.INCREASE: [], Direction.DECREASE: [], Direction.NO_CHANGE: []}
    hats = {Direction.INCREASE: [], Direction.DECREASE: [], Direction.NO_CHANGE: []}
    seen = set()
    hold, sell = [], []
    for item in items:
        belief = item if isinstance(item, SecurityBelief) else item.belief
        iid = belief.instrument_id
        seen.add(iid)
        by_dir[belief.direction].append(iid)
        if _buy_gain(item) > POSITIVE_GAIN_TOL:
            hats[belief.direction].append(iid)
        if held.get(iid, 0) > 0:
            (hold if _hold_gain(item) > POSITIVE_GAIN_TOL else sell).append(iid)
    missing = [iid for iid, v in held.items() if v > 0 and iid not in seen]
    if missing:
        raise MissingBelief(f"held instruments without beliefs: {missing}")
    return Partition(
        plus=tuple(by_dir[Direction.INCREASE]),
        minus=tuple(by_dir[Direction.DECREASE]),
        zero=tuple(by_dir[Direction.NO_CHANGE]),
        held=held,
        hat_plus=tuple(hats[Direction.INCREASE]),
        hat_minus=tuple(hats[Direction.DECREASE]),
        hat_zero=tuple(hats[Direction.NO_CHANGE]),
        hold=tuple(hold),
        sell=tuple(sell),
    )
