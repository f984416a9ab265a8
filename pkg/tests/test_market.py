from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eodpersist import DomainError
from eodpersist.market import (PersistenceCurve, PriceSeries, SampleWindow, SpinTrajectory,
                               average_curves, build_spin_trajectory, decimals_to_panel,
                               map_to_spin, persistence_curve, window_curve,
                               window_trajectories)
from oracles import brute_force_counts


@pytest.mark.parametrize("base, eod, spin", [
    (257, 239, -1),
    (239, 245, 1),
    (257, 245, -1),
    (100, 100, 1),
    ("10.05", "10.049", -1),
    (Decimal("1.10"), Decimal("1.1"), 1),
])
def test_map_to_spin(base, eod, spin):
    assert map_to_spin(base, eod) == spin


@pytest.mark.parametrize("base, eod", [(0, 5), (5, -1), (-3, 2)])
def test_map_to_spin_rejects_non_positive(base, eod):
    with pytest.raises(DomainError, match=str(min(base, eod))):
        map_to_spin(base, eod)


@pytest.mark.parametrize("closes, spins, first", [
    ([257, 239, 228, 235, 245], (-1, -1, -1, -1), None),
    ([100, 150, 150, 150], (1, 1, 1), None),
    ([100, 101, 100, 99], (1, 1, -1), 2),
    ([100, 99, 100, 99], (-1, 1, -1), 1),
])
def test_build_spin_trajectory(closes, spins, first):
    tr = build_spin_trajectory(PriceSeries.from_closes("X", closes))
    assert tr.spins == spins
    assert tr.first_flip == first


@pytest.mark.parametrize("closes, spins, first", [
    ([257, 239, 228, 235, 245], (-1, -1, -1, 1), 3),
    ([100, 150, 150, 150], (1, 1, 1), None),
    ([100, 101, 100, 99], (1, -1, -1), 1),
    ([100, 99, 100, 99], (-1, 1, 1), 1),
    ([100, 99, 98, 99], (-1, -1, 1), 2),
])
def test_build_spin_trajectory_first_reference(closes, spins, first):
    tr = build_spin_trajectory(PriceSeries.from_closes("X", closes), reference="first")
    assert tr.spins == spins
    assert tr.first_flip == first


def test_unknown_reference():
    with pytest.raises(DomainError):
        build_spin_trajectory(PriceSeries.from_closes("X", [1, 2]), reference="prev")


def test_build_spin_trajectory_checks_base():
    s = PriceSeries.from_closes("X", [10, 11])
    with pytest.raises(DomainError):
        build_spin_trajectory(s, base_price=11)
    assert build_spin_trajectory(s, base_price="10.0").spins == (1,)


def test_price_series_invariants():
    with pytest.raises(DomainError):
        PriceSeries.from_closes("X", [10])
    with pytest.raises(DomainError):
        PriceSeries.from_closes("X", [10, 0])
    with pytest.raises(DomainError):
        PriceSeries("X", (2, 1), (10, 11))
    with pytest.raises(DomainError):
        PriceSeries("X", (1, 2, 3), (10, 11))


def test_spin_trajectory_invariants():
    with pytest.raises(DomainError):
        SpinTrajectory("X", (1, 0))
    with pytest.raises(DomainError):
        SpinTrajectory("X", (1, 1, -1), first_flip=1)
    with pytest.raises(DomainError):
        SpinTrajectory("X", (1, -1), first_flip=None)


def test_persistence_curve_hand_example():
    trs = [
        SpinTrajectory("a", (1, 1, 1, 1), None),
        SpinTrajectory("b", (1, 1, 1, -1), 3),
        SpinTrajectory("c", (-1, 1, 1, 1), 1),
        SpinTrajectory("d", (1, -1, -1, -1), 1),
    ]
    c = persistence_curve(trs)
    assert c.n.tolist() == [4, 2, 2, 1]
    assert c.R.tolist() == [1.0, 0.5, 0.5, 0.25]
    # recount straight from the raw spins
    recount = [sum(all(s == tr.spins[0] for s in tr.spins[:t + 1]) for tr in trs)
               for t in range(4)]
    assert recount == c.n.tolist()


def test_persistence_curve_trivial_cases():
    c = persistence_curve([SpinTrajectory("a", (1, 1, 1))] * 3)
    assert c.R.tolist() == [1.0, 1.0, 1.0]
    c = persistence_curve([SpinTrajectory("a", (1, -1, -1, 1), 1)])
    assert c.R.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_persistence_curve_errors():
    with pytest.raises(DomainError):
        persistence_curve([])
    with pytest.raises(DomainError):
        persistence_curve([SpinTrajectory("a", (1, 1)), SpinTrajectory("b", (1, 1, 1))])


def _curve(R, N=1):
    R = np.asarray(R, dtype=float)
    return PersistenceCurve(np.round(R * N).astype(np.int64), N, R)


def test_average_curves():
    a = _curve([1, 0.5], 10)
    b = _curve([1, 0.7], 10)
    avg = average_curves([a, b])
    assert avg.R.tolist() == pytest.approx([1, 0.6], abs=1e-15)
    assert avg.sample_count == 2
    same = average_curves([a, a])
    assert same.R.tolist() == a.R.tolist() and same.sample_count == 2


def test_average_curves_truncates_to_shortest():
    curves = [_curve(np.linspace(1, 0.5, L)) for L in (61, 62, 63, 64)]
    avg = average_curves(curves)
    assert len(avg) == 61
    assert avg.sample_count == 4
    assert np.all(np.diff(avg.R) <= 0)
    with pytest.raises(DomainError):
        average_curves([])


def _window(rows, label="w"):
    prices, exp = decimals_to_panel(rows)
    return SampleWindow(label, tuple(f"T{i}" for i in range(len(rows))),
                        tuple(range(len(rows[0]))), prices, exp)


def test_decimals_to_panel_is_exact():
    prices, exp = decimals_to_panel([["10.05", "10.049", 10], ["7", "7.5", "6.999"]])
    assert exp == 3
    assert prices.tolist() == [[10050, 10049, 10000], [7000, 7500, 6999]]
    w = _window([["10.05", "10.049", 10]])
    assert w.base_prices == [Decimal("10.05")]
    assert w.series[0].closes[1] == Decimal("10.049")


def test_decimals_to_panel_overflow_falls_back_to_decimal():
    rows = [["1.0000000000000000001", "1.0000000000000000002", "1", "99999999"]]
    prices, exp = decimals_to_panel(rows)
    assert prices.dtype == object
    w = _window(rows)
    assert window_curve(w).n.tolist() == brute_force_counts(rows)
    assert window_curve(w, "first").n.tolist() == brute_force_counts(rows, "first")


def test_sample_window_invariants():
    with pytest.raises(DomainError):
        SampleWindow("w", ("a",), (0,), np.array([[5]]))
    with pytest.raises(DomainError):
        SampleWindow("w", ("a",), (0, 1), np.array([[5, 0]]))
    with pytest.raises(DomainError):
        SampleWindow("w", ("a", "b"), (0, 1), np.array([[5, 6]]))
    with pytest.raises(DomainError):
        SampleWindow.from_series("w", [PriceSeries("a", (0, 1), (1, 2)),
                                       PriceSeries("b", (0, 2), (1, 2))])
    w = SampleWindow.from_series("w", [PriceSeries("a", (0, 1), (1, 2)),
                                       PriceSeries("b", (0, 1), ("1.5", 2))])
    assert w.base_prices == [s.closes[0] for s in w.series]


# -- properties --------------------------------------------------------------

price = st.integers(min_value=95, max_value=105)
panels = st.integers(1, 8).flatmap(
    lambda n: st.integers(2, 13).flatmap(
        lambda m: st.lists(st.lists(price, min_size=m, max_size=m), min_size=n, max_size=n)))


@settings(max_examples=200, deadline=None)
@given(panels, st.sampled_from(["base", "first"]))
def test_oracle_equivalence(rows, reference):
    w = _window(rows)
    fast = window_curve(w, reference)
    slow = persistence_curve(window_trajectories(w, reference))
    expected = brute_force_counts(rows, reference)
    assert fast.n.tolist() == expected
    assert slow.n.tolist() == expected
    assert fast.R[0] == 1.0
    assert np.all(np.diff(fast.R) <= 0)
    assert np.all((0 <= fast.R) & (fast.R <= 1))
    assert np.array_equal(fast.R * fast.N, fast.n)


@settings(max_examples=100, deadline=None)
@given(panels, st.sampled_from(["0.01", "3", "1000", "0.375"]))
def test_scaling_invariance(rows, factor):
    f = Decimal(factor)
    scaled = [[Decimal(p) * f for p in row] for row in rows]
    for a, b in zip(rows, scaled):
        ta = build_spin_trajectory(PriceSeries.from_closes("X", a))
        tb = build_spin_trajectory(PriceSeries.from_closes("X", b))
        assert ta == tb
    assert window_curve(_window(rows)).n.tolist() == window_curve(_window(scaled)).n.tolist()


@settings(max_examples=100, deadline=None)
@given(panels)
def test_sign_flip_symmetry_without_ties(rows):
    rows = [[row[0]] + [p if p != row[0] else p + 1 for p in row[1:]] for row in rows]
    mirrored = [[2 * row[0] - p for p in row] for row in rows]
    for a, b in zip(rows, mirrored):
        sa = build_spin_trajectory(PriceSeries.from_closes("X", a)).spins
        sb = build_spin_trajectory(PriceSeries.from_closes("X", b)).spins
        assert sb == tuple(-s for s in sa)
    assert window_curve(_window(rows)).R.tolist() == window_curve(_window(mirrored)).R.tolist()


@settings(max_examples=100, deadline=None)
@given(panels, st.sampled_from(["base", "first"]))
def test_prefix_consistency(rows, reference):
    # truncating a window never changes the curve on the common support
    w = _window(rows)
    full = window_curve(w, reference).n.tolist()
    for m in range(2, len(rows[0])):
        part = _window([r[:m] for r in rows])
        assert window_curve(part, reference).n.tolist() == full[:m - 1]


def test_ties_break_the_mirror_symmetry():
    # touching base flips a down spin but not an up spin
    down = build_spin_trajectory(PriceSeries.from_closes("X", [100, 99, 100]))
    up = build_spin_trajectory(PriceSeries.from_closes("X", [100, 101, 100]))
    assert down.first_flip == 1
    assert up.first_flip is None
