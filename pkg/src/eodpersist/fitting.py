"""Power-law fits of persistence curves in log-log space.

All fits are unweighted least squares of ``ln R(t)`` on ``ln t`` over an
inclusive integer range of ``t >= 1``; the ``R(0) = 1`` anchor is never fitted.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction

import numpy as np

from . import kernels
from .exceptions import DomainError, FitError
from .market import PersistenceCurve, window_first_flips


@dataclass(frozen=True)
class SegmentFit:
    slope: float
    intercept: float
    t_range: tuple
    slope_stderr: float
    sse: float
    n_points: int

    @property
    def theta(self):
        """Persistence exponent, the negated slope."""
        return -self.slope

    def as_dict(self):
        d = asdict(self)
        d["t_range"] = list(self.t_range)
        return d


@dataclass(frozen=True)
class DoublePowerLawFit:
    short_segment: SegmentFit
    long_segment: SegmentFit
    breakpoint: int
    total_sse: float
    single_fit_sse: float
    single_segment: SegmentFit = None

    def as_dict(self):
        return {
            "breakpoint": self.breakpoint,
            "short_segment": self.short_segment.as_dict(),
            "long_segment": self.long_segment.as_dict(),
            "total_sse": self.total_sse,
            "single_fit_sse": self.single_fit_sse,
            "single_segment": self.single_segment.as_dict() if self.single_segment else None,
        }


def _values(curve):
    return np.asarray(curve.R if isinstance(curve, PersistenceCurve) else curve,
                      dtype=np.float64)


def _check_range(R, lo, hi, min_points=3):
    if lo < 1:
        raise FitError(f"fit range must start at t >= 1, got {lo}")
    if hi >= len(R):
        raise FitError(f"fit range end t={hi} beyond curve support (T={len(R)})")
    if hi - lo + 1 < min_points:
        raise FitError(f"fit range [{lo}, {hi}] has fewer than {min_points} points")
    if not (R[lo:hi + 1] > 0).all():
        raise FitError("zero density in fit range")


def _ols(x, y):
    n = len(x)
    xm = math.fsum(x) / n
    ym = math.fsum(y) / n
    dx = x - xm
    sxx = math.fsum(dx * dx)
    slope = math.fsum(dx * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    sse = math.fsum(resid * resid)
    stderr = math.sqrt(sse / (n - 2) / sxx)
    return slope, intercept, stderr, sse


def _exact_ols(x, y):
    # Exact over the float inputs, so that comparisons between SSEs of nested
    # fits are never reversed by rounding.
    X = [Fraction(v) for v in x.tolist()]
    Y = [Fraction(v) for v in y.tolist()]
    n = len(X)
    sx, sy = sum(X), sum(Y)
    vxx = sum(a * a for a in X) - sx * sx / n
    vxy = sum(a * b for a, b in zip(X, Y)) - sx * sy / n
    vyy = sum(b * b for b in Y) - sy * sy / n
    slope = vxy / vxx
    sse = vyy - slope * vxy
    intercept = (sy - slope * sx) / n
    stderr = math.sqrt(float(sse) / (n - 2) / float(vxx))
    return float(slope), float(intercept), stderr, sse


def _segment(R, lo, hi, exact=True):
    t = np.arange(lo, hi + 1, dtype=np.float64)
    x, y = np.log(t), np.log(R[lo:hi + 1])
    if exact:
        slope, intercept, stderr, sse = _exact_ols(x, y)
        return SegmentFit(slope, intercept, (lo, hi), stderr, sse, hi - lo + 1)
    slope, intercept, stderr, sse = _ols(x, y)
    return SegmentFit(slope, intercept, (lo, hi), stderr, sse, hi - lo + 1)


def fit_power_law(curve, t_range) -> SegmentFit:
    """Single power law ``R ~ t**slope`` over ``t_range = (lo, hi)`` inclusive."""
    R = _values(curve)
    lo, hi = (int(v) for v in t_range)
    _check_range(R, lo, hi)
    fit = _segment(R, lo, hi)
    return replace(fit, sse=float(fit.sse))


def _double(R, t_min, t_max, exact=True):
    t = np.arange(t_min, t_max + 1, dtype=np.float64)
    sse = np.asarray(kernels.breakpoint_sse(np.log(t), np.log(R[t_min:t_max + 1])))
    bp = t_min + 2 + int(np.argmin(sse))
    short = _segment(R, t_min, bp, exact)
    long = _segment(R, bp + 1, t_max, exact)
    single = _segment(R, t_min, t_max, exact)
    total = short.sse + long.sse
    if exact:
        short, long, single = (replace(f, sse=float(f.sse)) for f in (short, long, single))
    return DoublePowerLawFit(short, long, bp, float(total), float(single.sse), single)


def fit_double_power_law(curve, t_min, t_max) -> DoublePowerLawFit:
    """Two independent segments split at the SSE-minimising breakpoint.

    Candidates run over ``[t_min + 2, t_max - 3]`` so that each side keeps
    three points; equal SSE resolves to the smallest breakpoint.
    """
    R = _values(curve)
    t_min, t_max = int(t_min), int(t_max)
    if t_max - t_min < 5:
        raise FitError(f"no valid breakpoint in [{t_min}, {t_max}]: need t_max - t_min >= 5")
    _check_range(R, t_min, t_max, 6)
    return _double(R, t_min, t_max)


@dataclass(frozen=True)
class BootstrapSummary:
    n_resamples: int
    n_valid: int
    n_degenerate: int
    confidence: float
    stats: dict

    def as_dict(self):
        return asdict(self)


def _summarise(values, confidence):
    v = np.asarray(values, dtype=np.float64)
    if not len(v):
        return {"mean": None, "stderr": None, "ci_low": None, "ci_high": None}
    a = 100 * (1 - confidence) / 2
    lo, hi = np.percentile(v, [a, 100 - a])
    return {"mean": float(v.mean()),
            "stderr": float(v.std(ddof=1)) if len(v) > 1 else 0.0,
            "ci_low": float(lo), "ci_high": float(hi)}


def resampled_curves(windows, n_resamples, seed, reference="base"):
    """Averaged R(t) for each company resample, shape ``(n_resamples, T)``.

    Companies are drawn with replacement inside every window; index draws
    happen window by window from a single Philox stream keyed by ``seed``.
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    T = min(w.T for w in windows)
    total = np.zeros((n_resamples, T))
    for w in windows:
        ff = window_first_flips(w, reference)
        idx = rng.integers(0, w.N, size=(n_resamples, w.N))
        counts = np.asarray(kernels.resampled_counts(ff, idx, w.T))
        total += counts[:, :T] / w.N
    return total / len(windows)


def bootstrap_slopes(windows, t_min, t_max, n_resamples=1000, seed=0,
                     confidence=0.95, reference="base") -> BootstrapSummary:
    if not windows:
        raise DomainError("bootstrap needs at least one window")
    if n_resamples < 100:
        raise DomainError("n_resamples must be >= 100")
    t_min, t_max = int(t_min), int(t_max)
    if t_max - t_min < 5:
        raise FitError(f"no valid breakpoint in [{t_min}, {t_max}]: need t_max - t_min >= 5")
    curves = resampled_curves(windows, n_resamples, seed, reference)
    if t_max >= curves.shape[1] or t_min < 1:
        raise FitError(f"fit range [{t_min}, {t_max}] outside curve support")
    short, long, bps = [], [], []
    degenerate = 0
    for R in curves:
        if not (R[t_min:t_max + 1] > 0).all():
            degenerate += 1
            continue
        fit = _double(R, t_min, t_max, exact=False)
        short.append(fit.short_segment.slope)
        long.append(fit.long_segment.slope)
        bps.append(fit.breakpoint)
    stats = {"short_slope": _summarise(short, confidence),
             "long_slope": _summarise(long, confidence),
             "breakpoint": _summarise(bps, confidence)}
    return BootstrapSummary(n_resamples, len(short), degenerate, confidence, stats)
