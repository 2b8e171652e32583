import math

import numpy as np
import pytest
from scipy.integrate import quad
from hypothesis import given
from hypothesis import strategies as st

from nonrad.grid_profile import (
    SIGMA4,
    GridDomainError,
    GridSpec,
    RadialProfile,
    l2_norm,
    l2_tail,
    l2_tail_many,
    load_profile_csv,
    moment0,
    moment1,
    save_profile_csv,
    split_at,
    translate,
    weighted_distance,
    weighted_distance_two_regime,
)

G8 = GridSpec(-8, 8, 2.0**-7)


def box(grid=G8, a=-1.0, b=1.0, w=None):
    return RadialProfile.indicator(grid, a, b, w)


def test_gridspec_invariants():
    g = GridSpec()
    assert g.sigma4 == pytest.approx(8 * math.pi**2 / 3, rel=0, abs=1e-14)
    assert (g.s_min, g.s_max, g.step) == (-64, 64, 2.0**-7)
    with pytest.raises(ValueError):
        GridSpec(1, 0, 0.1)
    with pytest.raises(ValueError):
        GridSpec(0, 1, 0.3)


# moment0
def test_moment0_box_area():
    assert moment0(box()) == 2.0


def test_moment0_odd_vanishes():
    assert abs(moment0(box(w=lambda s: s))) < 1e-15


def test_moment0_s_squared():
    assert moment0(box(w=lambda s: s**2)) == pytest.approx(2 / 3, abs=1e-4)


def test_moment0_outside_grid():
    with pytest.raises(GridDomainError):
        moment0(box(), -20, 0)


# moment1
def test_moment1_examples():
    assert abs(moment1(box())) < 1e-15
    assert moment1(box(w=lambda s: s)) == pytest.approx(2 / 3, abs=1e-14)
    assert moment1(box(a=0.0, b=2.0)) == pytest.approx(2.0, abs=1e-14)


def test_quadrature_second_order():
    # interior cut points break the spectral accuracy of the full-line trapezoid rule
    fn = lambda s: np.exp(-(s**2)) * (1 + 0.3 * s)
    ex0 = quad(fn, -1, 2)[0]
    ex1 = quad(lambda s: s * fn(s), -1, 2)[0]
    exl2 = math.sqrt(quad(lambda s: fn(s) ** 2, 0.5, 8)[0] + quad(lambda s: fn(s) ** 2, -8, -0.5)[0])
    errs = {"m0": [], "m1": [], "l2": []}
    for h in (2.0**-3, 2.0**-4, 2.0**-5):
        G = RadialProfile.from_function(GridSpec(-8, 8, h), fn)
        errs["m0"].append(abs(moment0(G, -1 + h / 2, 2 - h / 2) - quad(fn, -1 + h / 2, 2 - h / 2)[0]))
        errs["m1"].append(abs(moment1(G, -1, 2) - ex1))
        errs["l2"].append(abs(l2_tail(G, 0.5) - exl2))
    del ex0
    for e in errs.values():
        assert e[0] / e[1] >= 3.9 and e[1] / e[2] >= 3.9


# l2_tail
def test_l2_tail_examples():
    assert l2_tail(box(), 1.0) == 0.0
    assert l2_tail(box(), 0.0) == pytest.approx(math.sqrt(2), abs=1e-14)


def test_l2_tail_power_law():
    g = GridSpec(-512, 512, 2.0**-6)
    G = RadialProfile.from_function(g, lambda s: np.where(np.abs(s) > 1, np.maximum(np.abs(s), 1) ** (-5 / 3), 0.0), jumps=(-1, 1))
    exact = math.sqrt((6 / 7) * 2 ** (-7 / 3) - (6 / 7) * 512 ** (-7 / 3))
    assert l2_tail(G, 2.0) == pytest.approx(exact, rel=1e-4)


@given(st.floats(0, 6), st.floats(0, 6))
def test_l2_tail_nonincreasing(a, b):
    G = RadialProfile.from_function(GridSpec(-8, 8, 2.0**-5), lambda s: np.exp(-((s - 1) ** 2)) + 0.2 * np.sin(s))
    lo, hi = sorted((a, b))
    ta, tb = l2_tail_many(G, [lo, hi])
    assert tb <= ta + 1e-15
    assert l2_tail(G, 0) == pytest.approx(l2_norm(G), rel=1e-14)


# split_at
def test_split_beyond_grid():
    G = box()
    g1, g2 = split_at(G, 100)
    assert np.array_equal(g1.values, G.values) and g2.max_abs() == 0


def test_split_box():
    G = box(a=-2, b=2)
    g1, g2 = split_at(G, 1)
    assert moment0(g1) == pytest.approx(2.0, abs=1e-14)
    assert moment0(g2) == pytest.approx(2.0, abs=1e-14)
    s = G8.nodes
    assert np.all(g1.values[np.abs(s) > 1 + 1e-9] == 0)
    assert np.all(g2.values[np.abs(s) < 1 - 1e-9] == 0)


@given(st.floats(0.01, 9))
def test_split_exact_decomposition(r1):
    G = RadialProfile.from_function(GridSpec(-8, 8, 2.0**-4), lambda s: np.cos(3 * s) * np.exp(-0.1 * s * s))
    g1, g2 = split_at(G, r1)
    for attr in ("values", "left", "right"):
        assert np.max(np.abs(getattr(G, attr) - getattr(g1, attr) - getattr(g2, attr))) == 0


# translate
def test_translate_identity_and_shift():
    G = box()
    assert np.array_equal(translate(G, 0).values, G.values)
    T = translate(G, 1.0)
    ref = box(a=-2, b=0)
    for attr in ("values", "left", "right"):
        assert np.array_equal(getattr(T, attr), getattr(ref, attr))


def test_translate_overflow():
    with pytest.raises(GridDomainError):
        translate(box(a=-7.5, b=-6), 1.0)
    with pytest.raises(GridDomainError):
        translate(box(a=-7.5, b=-6), 1.3)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_translate_composes(a, b):
    g = GridSpec(-8, 8, 2.0**-6)
    G = RadialProfile.from_function(g, lambda s: np.exp(-(s**2)))
    lhs = translate(translate(G, a), b)
    rhs = translate(G, a + b)
    assert np.max(np.abs(lhs.values - rhs.values)) < 2 * g.step**2


# weighted_distance
def test_weighted_distance_examples():
    G = box()
    assert weighted_distance(G, G, 1.0) == 0.0
    Z = RadialProfile.zeros(G8)
    assert weighted_distance(G, Z, 2.0) == 0.0


def test_weighted_distance_power_tail_attained_at_R():
    g = GridSpec(-256, 256, 2.0**-3)
    G = RadialProfile.from_function(g, lambda s: np.where(np.abs(s) > 1, np.maximum(np.abs(s), 1) ** (-5 / 3), 0.0), jumps=(-1, 1))
    Z = RadialProfile.zeros(g)
    R = 2.0
    d = weighted_distance(G, Z, R)
    assert math.isfinite(d)
    assert d == pytest.approx(R ** (7 / 6) * l2_tail(G, R), rel=1e-12)


def test_two_regime_distance():
    G = box(a=-4, b=4)
    Z = RadialProfile.zeros(G8)
    d = weighted_distance_two_regime(G, Z, 1.0, 0.1, 0.2)
    assert d > 0
    assert weighted_distance_two_regime(G, G, 1.0, 0.1, 0.2) == 0


def test_profile_csv_roundtrip(tmp_path):
    G = RadialProfile.from_function(GridSpec(-2, 2, 0.25), lambda s: s**2)
    p = tmp_path / "g.csv"
    save_profile_csv(p, G)
    assert p.read_text().splitlines()[0] == "s,value"
    back = load_profile_csv(p)
    assert np.array_equal(back.values, G.values)
    p.write_text("s,value\n1,2\n0,3\n")
    with pytest.raises(ValueError):
        load_profile_csv(p)


def test_sigma4_constant():
    assert SIGMA4 == pytest.approx(26.318945069571623, rel=1e-15)
