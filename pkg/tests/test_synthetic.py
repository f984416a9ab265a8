import math
from fractions import Fraction

import numpy as np
import pytest

from eodpersist import ConfigError, DomainError
from eodpersist.market import window_curve, window_first_flips
from eodpersist.synthetic import (WalkConfig, exact_survival, reference_curve,
                                  simulate_walk_panel, simulated_persistence, survival_table,
                                  walk_prices)
from oracles import enumerate_survival


def test_exact_survival_small_values():
    assert exact_survival(0) == 1
    assert exact_survival(1) == Fraction(3, 4)
    assert exact_survival(2) == Fraction(5, 8)
    assert exact_survival(1, reference="first") == Fraction(1, 2)


@pytest.mark.parametrize("reference", ["base", "first"])
def test_exact_survival_matches_enumeration(reference):
    for t in range(13):
        assert exact_survival(t, reference=reference) == enumerate_survival(t, reference)


def test_exact_survival_cap():
    exact_survival(64)
    with pytest.raises(DomainError):
        exact_survival(65)
    with pytest.raises(DomainError):
        exact_survival(-1)
    assert exact_survival(100, cap=128) > 0


def test_exact_survival_monotone_and_decaying():
    table = survival_table(64)
    assert all(b <= a for a, b in zip(table, table[1:]))
    # the never-crossing probability of a symmetric walk decays like t**-1/2
    t = np.arange(8, 65)
    y = np.log([float(exact_survival(int(v))) for v in t])
    slope = np.polyfit(np.log(t), y, 1)[0]
    assert -0.6 <= slope <= -0.4


@pytest.mark.parametrize("d, t, expected", [
    (1, 4, 0.125),
    (3, 4, 0.125),
    (2, math.e, 1 / math.e),
    (1.5, 16, 16 ** -1.25),
    (4, 3, 1 / 9),
])
def test_reference_curve(d, t, expected):
    assert reference_curve(d, [t])[0] == pytest.approx(expected, rel=1e-15)


def test_reference_curve_errors():
    with pytest.raises(DomainError):
        reference_curve(2, [1])
    with pytest.raises(DomainError):
        reference_curve(0, [3])
    with pytest.raises(DomainError):
        reference_curve(1, [0])


def test_walk_config_validation():
    with pytest.raises(ConfigError):
        WalkConfig(0, 10)
    with pytest.raises(ConfigError):
        WalkConfig(1, 0)
    with pytest.raises(ConfigError):
        WalkConfig(1, 10, "pm1", start_price=10)
    with pytest.raises(ConfigError):
        WalkConfig(1, 10, "pm1", start_price="100.5")
    with pytest.raises(ConfigError):
        WalkConfig(1, 10, "gauss", start_price=100, sigma=0)
    with pytest.raises(ConfigError):
        WalkConfig(1, 10, "levy")
    with pytest.raises(ConfigError):
        WalkConfig(1, 10, seed=-1)


def test_pm1_panel_shape_and_steps():
    w = simulate_walk_panel(WalkConfig(1, 3, "pm1", start_price=100, seed=5))
    assert w.prices.shape == (1, 4)
    assert w.prices[0, 0] == 100
    assert set(np.diff(w.prices[0]).tolist()) <= {-1, 1}
    assert w.base_prices == [100]
    assert len(w.dates) == 4


def test_panel_is_reproducible_and_chunk_invariant():
    cfg = WalkConfig(50, 130, "pm1", start_price=1000, seed=42)
    a = walk_prices(cfg)
    assert np.array_equal(a, walk_prices(cfg))
    parts = np.vstack([walk_prices(cfg, lo, min(lo + 7, 50)) for lo in range(0, 50, 7)])
    assert np.array_equal(a, parts)
    other = walk_prices(WalkConfig(50, 130, "pm1", start_price=1000, seed=43))
    assert not np.array_equal(a, other)


@pytest.mark.parametrize("model", ["gauss", "geom"])
def test_continuous_models_chunk_invariant(model):
    cfg = WalkConfig(20, 40, model, start_price=100, sigma=0.5, seed=9)
    a = walk_prices(cfg)
    parts = np.vstack([walk_prices(cfg, 0, 11), walk_prices(cfg, 11, 20)])
    assert np.array_equal(a, parts)
    assert (a > 0).all()


def test_gaussian_increments_have_unit_scale():
    a = walk_prices(WalkConfig(2000, 50, "gauss", start_price=10_000, sigma=2.0, seed=1))
    inc = np.diff(a, axis=1).ravel()
    assert abs(inc.mean()) < 0.05
    assert inc.std() == pytest.approx(2.0, rel=0.02)


@pytest.mark.parametrize("model", ["gauss", "geom"])
def test_vanishing_sigma_gives_flat_curve(model):
    cfg = WalkConfig(30, 20, model, start_price=100, sigma=1e-20, seed=3)
    w = simulate_walk_panel(cfg)
    assert (w.prices == 100).all()
    assert window_curve(w).R.tolist() == [1.0] * 20


def test_gaussian_walk_hitting_zero_is_a_config_error():
    with pytest.raises(ConfigError):
        walk_prices(WalkConfig(100, 200, "gauss", start_price=1, sigma=5, seed=0))


def test_streamed_curve_equals_panel_curve():
    cfg = WalkConfig(3000, 60, "pm1", start_price=500, seed=11)
    for ref in ("base", "first"):
        streamed = simulated_persistence(cfg, chunk=700, reference=ref)
        whole = window_curve(simulate_walk_panel(cfg), ref)
        assert np.array_equal(streamed.n, whole.n)


def test_small_panel_tracks_exact_survival():
    cfg = WalkConfig(20_000, 30, "pm1", start_price=100, seed=2024)
    for ref in ("base", "first"):
        c = simulated_persistence(cfg, reference=ref)
        for t in range(21):
            p = float(exact_survival(t, reference=ref))
            se = math.sqrt(p * (1 - p) / cfg.n_walkers)
            assert abs(c.R[t] - p) <= 4 * se + 1e-12


def test_first_flips_from_panel():
    w = simulate_walk_panel(WalkConfig(5, 8, "pm1", start_price=50, seed=0))
    ff = window_first_flips(w)
    assert ff.shape == (5,)
    assert ((ff >= 1) & (ff <= 8)).all()
