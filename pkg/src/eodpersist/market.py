"""Spin mapping of price panels and the density of never-flipped spins.

A company's close on the first day of a window is its base price. Calendar
day 1 carries spin index ``t = 0``; its spin is +1 when the day-1 close is
at or above base and -1 below it. Later spins compare each close with a
reference price chosen by ``reference``:

``"base"``
    the day-0 base price (default);
``"first"``
    the close at spin time 0, i.e. calendar day 1. This is the convention
    under which the worked example 257, 239, 228, 235, 245 flips at t = 3.

The persistence curve counts, for every ``t``, the companies whose spin has
not yet differed from its ``t = 0`` value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .exceptions import DomainError

_INT64_MAX = 2 ** 63 - 1
REFERENCES = ("base", "first")


def _ref_col(reference):
    if reference not in REFERENCES:
        raise DomainError(f"reference must be one of {REFERENCES}, got {reference!r}")
    return REFERENCES.index(reference)


def to_decimal(value) -> Decimal:
    """Exact decimal for a quoted price. Floats go through their shortest repr."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, (float, np.floating)):
        return Decimal(repr(float(value)))
    if isinstance(value, (int, np.integer)):
        return Decimal(int(value))
    try:
        return Decimal(str(value).strip())
    except Exception as exc:
        raise DomainError(f"not a decimal price: {value!r}") from exc


def _check_positive(value, what="price"):
    d = to_decimal(value)
    if not d.is_finite() or d <= 0:
        raise DomainError(f"{what} must be positive, got {value!r}")
    return d


@dataclass(frozen=True)
class PriceSeries:
    ticker: str
    dates: tuple
    closes: tuple

    def __post_init__(self):
        closes = tuple(_check_positive(c, f"close of {self.ticker}") for c in self.closes)
        dates = tuple(self.dates)
        if len(closes) != len(dates):
            raise DomainError(f"{self.ticker}: {len(dates)} dates but {len(closes)} closes")
        if len(closes) < 2:
            raise DomainError(f"{self.ticker}: need a base day and at least one observation")
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise DomainError(f"{self.ticker}: dates must be strictly increasing")
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", dates)

    @classmethod
    def from_closes(cls, ticker, closes):
        """Series indexed by day number 0, 1, 2, ... instead of calendar dates."""
        return cls(ticker, tuple(range(len(closes))), tuple(closes))


@dataclass(frozen=True)
class SpinTrajectory:
    ticker: str
    spins: tuple
    first_flip: Optional[int] = None

    def __post_init__(self):
        spins = tuple(int(s) for s in self.spins)
        if not spins:
            raise DomainError(f"{self.ticker}: empty spin trajectory")
        if any(s not in (1, -1) for s in spins):
            raise DomainError(f"{self.ticker}: spins must be +1 or -1")
        expected = next((t for t, s in enumerate(spins) if s != spins[0]), None)
        if self.first_flip != expected:
            raise DomainError(
                f"{self.ticker}: first_flip={self.first_flip} inconsistent with spins")
        object.__setattr__(self, "spins", spins)

    @property
    def T(self):
        return len(self.spins)


@dataclass(frozen=True, eq=False)
class PersistenceCurve:
    """``n[t]`` never-flipped counts and ``R[t]`` densities for ``t = 0..T-1``.

    For an average over windows ``R`` is the mean of the per-window densities
    while ``n`` and ``N`` are the pooled counts, so ``R * N == n`` only holds
    for a single window.
    """
    n: np.ndarray
    N: int
    R: np.ndarray
    sample_count: int = 1
    label: str = ""

    def __len__(self):
        return len(self.R)

    @property
    def t(self):
        return np.arange(len(self.R))

    def last_positive(self):
        """Largest t with R(t) > 0 (0 if only the anchor is positive)."""
        pos = np.nonzero(self.R > 0)[0]
        return int(pos[-1]) if len(pos) else -1


@dataclass(frozen=True, eq=False)
class SampleWindow:
    """Panel of companies on one shared trading-day grid.

    ``prices`` has shape ``(N, T + 1)``. Integer panels hold exact ticks of
    ``10**-price_exponent`` currency units; float panels hold the prices
    themselves; object panels hold :class:`~decimal.Decimal` values and are
    only produced when ticks would overflow int64.
    """
    label: str
    tickers: tuple
    dates: tuple
    prices: np.ndarray
    price_exponent: int = 0
    dropped: dict = field(default_factory=dict)

    def __post_init__(self):
        prices = self.prices
        if prices.ndim != 2:
            raise DomainError("price panel must be two-dimensional")
        n, m = prices.shape
        if n < 1:
            raise DomainError(f"window {self.label}: no companies")
        if m < 2:
            raise DomainError(f"window {self.label}: need at least two trading days")
        if len(self.tickers) != n or len(self.dates) != m:
            raise DomainError(f"window {self.label}: labels do not match panel shape")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DomainError(f"window {self.label}: dates must be strictly increasing")
        if not (prices > 0).all():
            raise DomainError(f"window {self.label}: all prices must be positive")

    @classmethod
    def from_series(cls, label, series: Sequence[PriceSeries], dropped=None):
        if not series:
            raise DomainError(f"window {label}: no companies")
        dates = series[0].dates
        for s in series:
            if s.dates != dates:
                raise DomainError(f"window {label}: {s.ticker} is not on the shared date grid")
        prices, exponent = decimals_to_panel([s.closes for s in series])
        return cls(label, tuple(s.ticker for s in series), tuple(dates), prices,
                   exponent, dict(dropped or {}))

    @property
    def N(self):
        return self.prices.shape[0]

    @property
    def T(self):
        """Number of spin times in the window."""
        return self.prices.shape[1] - 1

    def _as_decimal(self, v):
        if self.prices.dtype == object:
            return v
        if self.prices.dtype.kind == "f":
            return to_decimal(float(v))
        return Decimal(int(v)).scaleb(-self.price_exponent)

    @property
    def base_prices(self):
        return [self._as_decimal(v) for v in self.prices[:, 0]]

    @cached_property
    def series(self):
        return [PriceSeries(tk, self.dates, tuple(self._as_decimal(v) for v in row))
                for tk, row in zip(self.tickers, self.prices)]

    def take(self, rows, label=None):
        """Sub-panel with the given company rows (repeats allowed)."""
        rows = np.asarray(rows, dtype=np.int64)
        return SampleWindow(label or self.label, tuple(self.tickers[i] for i in rows),
                            self.dates, self.prices[rows], self.price_exponent)


def decimals_to_panel(rows):
    """Exact numeric panel from rows of decimals: int64 ticks when they fit."""
    decs = [[to_decimal(v) for v in row] for row in rows]
    exponent = 0
    for row in decs:
        for d in row:
            exponent = max(exponent, -d.as_tuple().exponent)
    ticks = []
    for row in decs:
        out = []
        for d in row:
            sign, digits, exp = d.as_tuple()
            mag = int("".join(map(str, digits)) or "0") * 10 ** (exp + exponent)
            if mag > _INT64_MAX:
                return np.array(decs, dtype=object), 0
            out.append(-mag if sign else mag)
        ticks.append(out)
    return np.array(ticks, dtype=np.int64).reshape(len(decs), -1), exponent


# -- operations -------------------------------------------------------------

def map_to_spin(base_price, eod_price) -> int:
    """+1 if ``base_price <= eod_price`` else -1. Ties map to +1."""
    base = _check_positive(base_price, "base price")
    eod = _check_positive(eod_price, "EOD price")
    return 1 if base <= eod else -1


def build_spin_trajectory(series: PriceSeries, base_price=None,
                          reference="base") -> SpinTrajectory:
    closes = series.closes
    if len(closes) < 2:
        raise DomainError(f"{series.ticker}: series shorter than 2 points")
    base = closes[0] if base_price is None else _check_positive(base_price, "base price")
    if base != closes[0]:
        raise DomainError(
            f"{series.ticker}: base price {base} differs from day-0 close {closes[0]}")
    ref = closes[_ref_col(reference)]
    spins = (map_to_spin(base, closes[1]),) + tuple(map_to_spin(ref, c) for c in closes[2:])
    first = next((t for t in range(1, len(spins)) if spins[t] != spins[0]), None)
    return SpinTrajectory(series.ticker, spins, first)


def _curve_from_first_flips(ff, T, label="") -> PersistenceCurve:
    n = np.asarray(kernels.survival_counts(np.asarray(ff, dtype=np.int64), T))
    N = len(ff)
    return PersistenceCurve(n, N, n / N, 1, label)


def persistence_curve(trajectories: Sequence[SpinTrajectory], label="") -> PersistenceCurve:
    if not trajectories:
        raise DomainError("persistence curve of an empty trajectory list")
    T = trajectories[0].T
    if any(tr.T != T for tr in trajectories):
        raise DomainError("trajectories have mixed lengths")
    ff = [T if tr.first_flip is None else tr.first_flip for tr in trajectories]
    return _curve_from_first_flips(ff, T, label)


def window_first_flips(window: SampleWindow, reference="base") -> np.ndarray:
    """First-flip time of every company (``window.T`` when it never flips)."""
    col = _ref_col(reference)
    if window.prices.dtype == object:
        return kernels.first_flips_np(window.prices, col)
    return np.asarray(kernels.first_flips(np.ascontiguousarray(window.prices), col))


def window_curve(window: SampleWindow, reference="base") -> PersistenceCurve:
    """Fast path equal to ``persistence_curve`` of every company's trajectory."""
    return _curve_from_first_flips(window_first_flips(window, reference), window.T,
                                   window.label)


def window_trajectories(window: SampleWindow, reference="base"):
    return [build_spin_trajectory(s, reference=reference) for s in window.series]


def average_curves(curves: Sequence[PersistenceCurve], label="average") -> PersistenceCurve:
    """Pointwise mean of R(t), truncated to the shortest curve."""
    if not curves:
        raise DomainError("average of no curves")
    T = min(len(c) for c in curves)
    R = np.mean(np.stack([c.R[:T] for c in curves]), axis=0)
    n = np.sum(np.stack([c.n[:T] for c in curves]), axis=0)
    return PersistenceCurve(n, sum(c.N for c in curves), R, len(curves), label)
