"""Trials and simulations for testing a trader's direction-calling ability.

Two tools: segment trials over a price series estimate the probability of a
correct up/not-up call (independent same-length segments make the trials a
fair coin-counting experiment), and a trading simulation converts a call
stream into a P&L trace so the estimated ability can be sanity-checked
against money outcomes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import sqrt
from typing import Callable, Sequence

import numpy as np

from .errors import LengthTooLong, NoTrials

UP = "up"
NOT_UP = "not_up"

Predictor = Callable[[np.ndarray], str]
Sizing = Callable[[int], int]


@dataclass(frozen=True)
class TimeSeries:
    timestamps: np.ndarray
    prices: np.ndarray
    instrument_id: str = ""

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        p = np.asarray(self.prices, dtype=float)
        if t.ndim != 1 or p.ndim != 1 or len(t) != len(p):
            raise ValueError("timestamps and prices must be equal-length vectors")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if np.any(p <= 0):
            raise ValueError("prices must be positive")
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "prices", p)

    def __len__(self) -> int:
        return len(self.prices)

    @classmethod
    def from_csv(cls, path, instrument_id: str = "") -> "TimeSeries":
        """Read (timestamp, price) rows; a non-numeric first row is a header."""
        ts, ps = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or len(row) < 2:
                    continue
                try:
                    ts.append(float(row[0]))
                    ps.append(float(row[1]))
                except ValueError:
                    continue
        return cls(np.array(ts), np.array(ps), instrument_id=instrument_id)


@dataclass(frozen=True)
class TrialRecord:
    segment_offset: int
    segment_length: int
    prediction: str
    actual: str
    correct: bool

    def __post_init__(self):
        if self.correct != (self.prediction == self.actual):
            raise ValueError("correct flag contradicts prediction/actual")


@dataclass(frozen=True)
class AbilityEstimate:
    p_hat: float
    n_trials: int
    ci95: tuple[float, float]


def direction_of(prev: float, nxt: float) -> str:
    return UP if nxt > prev else NOT_UP


def sample_segments(series: TimeSeries, length: int, n: int, seed: int) -> np.ndarray:
    """Uniform segment offsets; each segment needs a successor point to score.

    Drawn without replacement while enough distinct offsets exist, with
    replacement beyond that.  Deterministic for a fixed seed.
    """
    if length < 2:
        raise LengthTooLong(f"segment length must be >= 2, got {length}")
    distinct = len(series) - length
    if distinct < 1:
        raise LengthTooLong(
            f"length {length} leaves no scored segment in a series of {len(series)}")
    if n <= 0:
        return np.zeros(0, dtype=int)
    rng = np.random.default_rng(seed)
    if n <= distinct:
        return rng.choice(distinct, size=n, replace=False)
    return rng.integers(0, distinct, size=n)


def run_segment_trials(series: TimeSeries, length: int, n: int, seed: int,
                       predictor: Predictor) -> list[TrialRecord]:
    """Feed the predictor each sampled segment and score it on the next point."""
    records = []
    for off in sample_segments(series, length, n, seed):
        off = int(off)
        window = series.prices[off:off + length]
        prediction = predictor(window)
        actual = direction_of(window[-1], series.prices[off + length])
        records.append(TrialRecord(off, length, prediction, actual,
                                   prediction == actual))
    return records


def estimate_ability(records: Sequence[TrialRecord],
                     method: str = "normal") -> AbilityEstimate:
    """Correct-call frequency with a 95% interval.

    ``normal`` is the usual p +- 1.96*sqrt(p(1-p)/n); ``exact`` is the
    Clopper-Pearson interval for small n.
    """
    n = len(records)
    if n == 0:
        raise NoTrials("cannot estimate ability from zero trials")
    k = sum(1 for r in records if r.correct)
    p = k / n
    if method == "exact":
        from scipy.stats import beta

        lo = 0.0 if k == 0 else float(beta.ppf(0.025, k, n - k + 1))
        hi = 1.0 if k == n else float(beta.ppf(0.975, k + 1, n - k))
        return AbilityEstimate(p, n, (lo, hi))
    half = 1.96 * sqrt(p * (1.0 - p) / n)
    return AbilityEstimate(p, n, (p - half, p + half))


def check_consistency(estimate: AbilityEstimate, live: Sequence[TrialRecord],
                      tolerance: float = 0.05) -> bool:
    """Does the live correct-call frequency stay near the earlier estimate?"""
    if not live:
        raise NoTrials("cannot check consistency with zero live trials")
    freq = sum(1 for r in live if r.correct) / len(live)
    return abs(freq - estimate.p_hat) <= tolerance


@dataclass
class TradingRun:
    positions: np.ndarray   # signed position held over each step
    step_pnl: np.ndarray
    cumulative: np.ndarray
    total: float
    hit_rate: float

    @property
    def n_steps(self) -> int:
        return len(self.step_pnl)

    def rows(self):
        """(step, position, step_pnl, cumulative) rows for delimited output."""
        for i in range(self.n_steps):
            yield (i, int(self.positions[i]), float(self.step_pnl[i]),
                   float(self.cumulative[i]))


def simulate_trading(series: TimeSeries, predictor: Predictor,
                     sizing: Sizing = lambda step: 1,
                     costs: float = 0.0) -> TradingRun:
    """Walk the series: long on an up call, short otherwise, mark each step.

    Step P&L is signed position times the price change, minus per-trade costs
    whenever the position is nonzero.
    """
    prices = series.prices
    if len(prices) < 2:
        raise LengthTooLong("simulation needs at least two price points")
    steps = len(prices) - 1
    positions = np.zeros(steps)
    pnl = np.zeros(steps)
    hits = 0
    for t in range(steps):
        call = predictor(prices[: t + 1])
        size = int(sizing(t))
        if size < 0:
            raise ValueError("sizing must be nonnegative")
        position = size if call == UP else -size
        positions[t] = position
        change = prices[t + 1] - prices[t]
        pnl[t] = position * change - (costs if size > 0 else 0.0)
        if call == direction_of(prices[t], prices[t + 1]):
            hits += 1
    cumulative = np.cumsum(pnl)
    return TradingRun(positions=positions, step_pnl=pnl, cumulative=cumulative,
                      total=float(cumulative[-1]) if steps else 0.0,
                      hit_rate=hits / steps)


def bernoulli_predictor(series: TimeSeries, p: float, seed: int) -> Predictor:
    """Clairvoyant-with-noise caller: right with probability ``p``.

    Built for :func:`simulate_trading`, whose windows are prefixes of the
    series, so the window length pins the current position.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    flips = rng.random(max(len(series) - 1, 1)) < p

    def predict(window: np.ndarray) -> str:
        t = len(window) - 1
        truth = direction_of(series.prices[t], series.prices[t + 1])
        if flips[t]:
            return truth
        return NOT_UP if truth == UP else UP

    return predict


def run_bernoulli_trials(series: TimeSeries, length: int, n: int, seed: int,
                         p: float) -> list[TrialRecord]:
    """Segment trials answered by a synthetic diviner with hit probability p.

    One coin per trial decides whether the recorded prediction matches the
    actual direction; offsets and coins share the seed, so runs reproduce.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be in [0, 1], got {p}")
    offsets = sample_segments(series, length, n, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    coins = rng.random(len(offsets)) < p
    records = []
    for off, hit in zip(offsets, coins):
        off = int(off)
        end = off + length - 1
        actual = direction_of(series.prices[end], series.prices[end + 1])
        prediction = actual if hit else (NOT_UP if actual == UP else UP)
        records.append(TrialRecord(off, length, prediction, actual, bool(hit)))
    return records


def make_random_walk(n: int, seed: int, start: float = 100.0,
                     step: float = 1.0) -> TimeSeries:
    """Positive random-walk series for demos and simulations."""
    rng = np.random.default_rng(seed)
    moves = rng.choice([-step, step], size=n - 1)
    prices = start + np.concatenate([[0.0], np.cumsum(moves)])
    prices = np.maximum(prices, step)  # keep strictly positive
    return TimeSeries(np.arange(n, dtype=float), prices)
