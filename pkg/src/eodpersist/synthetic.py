"""Null-model price panels and exact reference curves.

Walk panels draw their randomness from numpy's Philox4x64 counter-based
generator keyed by the seed. Walker ``i`` owns a fixed block of the counter
space, so any sub-range of walkers can be generated on its own and the
result never depends on chunking or thread count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from . import kernels
from .exceptions import ConfigError, DomainError
from .market import (PersistenceCurve, SampleWindow, _curve_from_first_flips, _ref_col,
                     to_decimal)

RNG_ALGORITHM = "numpy.Philox4x64-10;key=seed;walker-blocked-counter;v1"
STEP_MODELS = ("pm1", "gauss", "geom")
SURVIVAL_CAP = 64
SIM_START_DATE = "2002-01-01"


@dataclass(frozen=True)
class WalkConfig:
    n_walkers: int
    n_steps: int
    step_model: str = "pm1"
    start_price: Decimal = Decimal(1000)
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.step_model not in STEP_MODELS:
            raise ConfigError(f"unknown step model {self.step_model!r}; choose from {STEP_MODELS}")
        if int(self.n_walkers) < 1:
            raise ConfigError("n_walkers must be >= 1")
        if int(self.n_steps) < 1:
            raise ConfigError("n_steps must be >= 1")
        start = to_decimal(self.start_price)
        if not start.is_finite() or start <= 0:
            raise ConfigError("start_price must be positive")
        if self.step_model == "pm1":
            if start != start.to_integral_value():
                raise ConfigError("the pm1 model needs an integer start_price")
            if start <= self.n_steps:
                raise ConfigError(
                    f"start_price {start} must exceed n_steps {self.n_steps} "
                    "so a +/-1 walk stays positive")
        elif not self.sigma > 0:
            raise ConfigError("sigma must be > 0")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        object.__setattr__(self, "start_price", start)

    @property
    def words_per_walker(self):
        need = -(-self.n_steps // 64) if self.step_model == "pm1" else self.n_steps
        return -(-need // 4) * 4

    def as_dict(self):
        return {"n_walkers": self.n_walkers, "n_steps": self.n_steps,
                "step_model": self.step_model, "start_price": str(self.start_price),
                "sigma": self.sigma, "seed": self.seed, "rng": RNG_ALGORITHM}


def _walker_words(config: WalkConfig, lo, hi):
    wpw = config.words_per_walker
    bg = np.random.Philox(key=int(config.seed))
    bg.advance(lo * wpw // 4)
    return bg.random_raw((hi - lo) * wpw).reshape(hi - lo, wpw)


def _uniforms(words):
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def walk_prices(config: WalkConfig, lo=0, hi=None):
    """Raw price matrix ``(hi - lo, n_steps + 1)`` for walkers ``lo..hi-1``."""
    hi = config.n_walkers if hi is None else hi
    if not 0 <= lo < hi <= config.n_walkers:
        raise ConfigError(f"walker range [{lo}, {hi}) outside 0..{config.n_walkers}")
    words = _walker_words(config, lo, hi)
    if config.step_model == "pm1":
        return kernels.pm1_prices(words, int(config.start_price), config.n_steps)
    z = ndtri(_uniforms(words[:, :config.n_steps]))
    start = float(config.start_price)
    out = np.empty((hi - lo, config.n_steps + 1))
    out[:, 0] = start
    np.cumsum(config.sigma * z, axis=1, out=out[:, 1:])
    if config.step_model == "gauss":
        out[:, 1:] += start
        if not (out > 0).all():
            raise ConfigError("Gaussian walk reached a non-positive price; "
                              "raise start_price or lower sigma")
    else:
        out[:, 1:] = start * np.exp(out[:, 1:])
    return out


def sim_dates(n_days, start=SIM_START_DATE):
    days = np.busday_offset(np.datetime64(start), np.arange(n_days), roll="forward")
    return tuple(d.item() for d in days)


def ticker_names(n_walkers, lo=0, hi=None):
    hi = n_walkers if hi is None else hi
    width = len(str(n_walkers - 1))
    return tuple(f"W{i:0{width}d}" for i in range(lo, hi))


def simulate_walk_panel(config: WalkConfig, lo=0, hi=None) -> SampleWindow:
    """Panel of independent walkers; index 0 of every series is the base day."""
    hi = config.n_walkers if hi is None else hi
    prices = walk_prices(config, lo, hi)
    return SampleWindow(f"sim-{config.step_model}-seed{config.seed}",
                        ticker_names(config.n_walkers, lo, hi),
                        sim_dates(config.n_steps + 1), prices, 0)


def simulated_persistence(config: WalkConfig, chunk=10_000,
                          reference="base") -> PersistenceCurve:
    """Persistence curve of a walk panel, built chunk by chunk to bound memory."""
    col = _ref_col(reference)
    ff = np.empty(config.n_walkers, np.int64)
    for lo in range(0, config.n_walkers, chunk):
        hi = min(lo + chunk, config.n_walkers)
        ff[lo:hi] = kernels.first_flips(walk_prices(config, lo, hi), col)
    return _curve_from_first_flips(ff, config.n_steps, f"sim-{config.step_model}")


@lru_cache(maxsize=None)
def _survival_counts_table(t_max, ref_col):
    # Surviving paths of the +/-1 walk counted by position relative to the
    # reference price, split by first step: up-starters must stay >= 0,
    # down-starters must stay <= -1.
    counts = [2]
    up, down = ({1: 1}, {-1: 1}) if ref_col == 0 else ({0: 1}, {0: 1})
    for _ in range(t_max):
        nu, nd = {}, {}
        for x, c in up.items():
            for y in (x - 1, x + 1):
                if y >= 0:
                    nu[y] = nu.get(y, 0) + c
        for x, c in down.items():
            for y in (x - 1, x + 1):
                if y < 0:
                    nd[y] = nd.get(y, 0) + c
        up, down = nu, nd
        counts.append(sum(up.values()) + sum(down.values()))
    return tuple(counts)


def exact_survival(t, cap=SURVIVAL_CAP, reference="base") -> Fraction:
    """Probability that a +/-1 walker's spin has not flipped by spin time ``t``.

    Spin time ``t`` looks at the walk after ``t + 1`` steps; a position equal
    to the reference price counts as spin +1.
    """
    col = _ref_col(reference)
    t = int(t)
    if t < 0:
        raise DomainError("t must be non-negative")
    if t > cap:
        raise DomainError(f"t={t} exceeds the survival table cap {cap}")
    return Fraction(_survival_counts_table(t, col)[t], 2 ** (t + 1))


def survival_table(t_max, cap=SURVIVAL_CAP, reference="base"):
    return [exact_survival(t, cap, reference) for t in range(t_max + 1)]


def reference_curve(d, ts):
    """Random-walk reference shapes, unnormalised:
    ``t**(d/2 - 2)`` for d < 2, ``1 / (t ln^2 t)`` for d == 2, ``t**(-d/2)`` for d > 2.
    """
    if not d > 0:
        raise DomainError(f"dimension must be positive, got {d}")
    out = []
    for t in ts:
        if t < 1:
            raise DomainError(f"t must be >= 1, got {t}")
        if d < 2:
            out.append(t ** (d / 2 - 2))
        elif d == 2:
            if t <= 1:
                raise DomainError("d = 2 needs t > 1 (ln 1 = 0)")
            out.append(1.0 / (t * math.log(t) ** 2))
        else:
            out.append(t ** (-d / 2))
    return out
