import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonrad.freewave import (
    RadialData,
    data_from_profile,
    dump_field_csv,
    energy_norm,
    evolve_free,
    evolve_free_all,
    isometry_defect,
    load_data_csv,
    profile_from_data,
    radial_grid,
    save_data_csv,
    source_profile,
)
from nonrad.grid_profile import SIGMA4, GridSpec, RadialProfile, moment0, moment1, translate

H = 2.0**-7


def box(g, a=-1.0, b=1.0, w=None):
    return RadialProfile.indicator(g, a, b, w)


@pytest.fixture(scope="module")
def g16():
    return GridSpec(-16, 16, H)


# evolve_free
def test_evolve_free_box_zero(g16):
    assert evolve_free(box(g16), 2.0, 0.0) == 0.0
    assert evolve_free(box(g16), 0.5, 0.0) == 0.0


def test_evolve_free_odd_box(g16):
    assert evolve_free(box(g16, w=lambda s: s), 2.0, 0.0) == pytest.approx(1 / 12, abs=1e-14)


def test_evolve_free_rejects_origin(g16):
    with pytest.raises(ValueError):
        evolve_free(box(g16), 0.0, 0.0)


def test_free_wave_satisfies_radial_equation():
    # centred differences of the closed-form wave, away from jump characteristics
    errs = []
    for h in (0.05, 0.025):
        G = RadialProfile.from_function(GridSpec(-16, 16, 2.0**-8), lambda s: np.exp(-((s - 0.3) ** 2)))
        r, t = np.linspace(1.0, 3.0, 9), 0.7
        u = lambda rr, tt: evolve_free(G, rr, tt)
        utt = (u(r, t + h) - 2 * u(r, t) + u(r, t - h)) / h**2
        urr = (u(r + h, t) - 2 * u(r, t) + u(r - h, t)) / h**2
        ur = (u(r + h, t) - u(r - h, t)) / (2 * h)
        errs.append(np.max(np.abs(utt - urr - 4 * ur / r)))
    assert errs[1] < errs[0] / 3.5


def test_translate_matches_time_shift(g16):
    G = RadialProfile.from_function(g16, lambda s: np.exp(-(s**2)) * (1 + s))
    for t0 in (0.5, -1.25):
        Gt = translate(G, t0)
        r = np.array([0.5, 1.5, 3.0])
        assert np.allclose(evolve_free(Gt, r, 0.2), evolve_free(G, r, 0.2 + t0), atol=1e-12)


# data_from_profile
def test_even_profile_gives_zero_u0(g16):
    G = RadialProfile.from_function(g16, lambda s: np.exp(-(s**2)))
    d = data_from_profile(G, radial_grid(16, H))
    # r^{-3} amplifies rounding near the origin
    assert np.max(np.abs(d.u0 * d.r_grid**3)) < 1e-14


def test_box_data(g16):
    d = data_from_profile(box(g16), radial_grid(16, H))
    r = d.r_grid
    assert np.max(np.abs(d.u1[r < 1 - 1e-9])) < 1e-12
    out = r > 1 + 1e-9
    assert np.max(np.abs(d.u1[out] + 2 * r[out] ** -3)) < 1e-12
    k = int(np.argmin(np.abs(r - 2)))
    assert d.u1[k] == pytest.approx(-0.25, abs=1e-14)


def test_box_energy_is_4_sigma4():
    g = GridSpec(-64, 64, H)
    d = data_from_profile(box(g), radial_grid(128, H))
    # a jump in the profile makes the isometry first order
    assert energy_norm(d, 0.0) ** 2 == pytest.approx(4 * SIGMA4, rel=5e-3)


def test_compact_support_gives_span_data(g16):
    G = box(g16, -2, 2, lambda s: np.cos(s) + 0.4 * s)
    d = data_from_profile(G, radial_grid(16, H))
    c1, c2 = moment1(G, -2, 2), -moment0(G, -2, 2)
    out = d.r_grid > 2 + 1e-9
    r = d.r_grid[out]
    assert np.allclose(d.u0[out], c1 * r**-3, atol=1e-12)
    assert np.allclose(d.u1[out], c2 * r**-3, atol=1e-12)


# profile_from_data
def test_roundtrip_second_order():
    fn = lambda s: np.exp(-4 * (s - 0.4) ** 2) + 0.2 * s * np.exp(-(s**2))
    errs = []
    for h in (2.0**-5, 2.0**-6, 2.0**-7):
        G = RadialProfile.from_function(GridSpec(-12, 12, h), fn)
        back = profile_from_data(data_from_profile(G, radial_grid(12, h)), G.grid)
        errs.append(np.max(np.abs(back.values - G.values)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_reverse_roundtrip():
    h = 2.0**-6
    rg = radial_grid(24, h)
    d = RadialData(rg, np.exp(-(rg**2)) * rg, -np.exp(-((rg - 1) ** 2)) * rg**2)
    d2 = data_from_profile(profile_from_data(d), rg)
    inner = rg < 8
    assert np.max(np.abs(d2.u0 - d.u0)[inner]) < 1e-4
    assert np.max(np.abs(d2.u1 - d.u1)[inner]) < 1e-4


def test_box_roundtrip_second_order_away_from_jumps():
    # the jump cell costs an O(h^2) constant in the even part; nothing is smeared beyond it
    errs = []
    for h in (2.0**-5, 2.0**-6, 2.0**-7):
        g = GridSpec(-16, 16, h)
        G = box(g)
        back = profile_from_data(data_from_profile(G, radial_grid(16, h)), g)
        far = np.abs(np.abs(g.nodes) - 1) > 0.05
        errs.append(np.max(np.abs(back.values - G.values)[far]))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_source_profile_box_origin_anchor():
    h = 2.0**-7
    r = radial_grid(4, h)
    f = (r <= 1.0 + 1e-12).astype(float)
    G = source_profile(f, r, anchor="origin")
    s = G.grid.nodes
    k = (s > 0.1) & (s < 0.9)
    assert np.allclose(G.values[k], 0.5 * (s[k] ** 2 + s[k] ** 2 / 2), atol=1e-4)
    assert np.allclose(G.values, G.values[::-1])


def test_source_profile_power_law():
    h = 2.0**-6
    r = radial_grid(256, h)
    f = np.where(r >= 1, r**-3.0, r)
    Go = source_profile(f, r, anchor="origin")
    Gi = source_profile(f, r)
    s = Go.grid.nodes
    k = (s > 1.5) & (s < 50)
    assert np.allclose(Go.values[k], 2 / 3, atol=1e-4)
    # the L2 representative differs by a constant the propagator does not see
    assert np.allclose(Gi.values[k], 0.0, atol=1e-4)
    assert Gi(np.array([0.0]))[0] == pytest.approx(-2 / 3, abs=1e-4)
    assert np.allclose(Go.values - Gi.values, 2 / 3, atol=1e-4)


def test_source_profile_zero():
    r = radial_grid(4, 0.125)
    assert source_profile(np.zeros_like(r), r).max_abs() == 0


def test_source_profile_generates_its_data():
    h = 2.0**-7
    r = radial_grid(16, h)
    f = np.exp(-((r - 2) ** 2))
    d = data_from_profile(source_profile(f, r), r)
    assert np.max(np.abs(d.u0)) < 1e-12
    k = (r > 0.25) & (r < 10)
    assert np.max(np.abs(d.u1 - f)[k]) < 1e-5


# energy_norm
def test_energy_norm_anchors():
    r = radial_grid(128, H)
    assert energy_norm(RadialData(r, r**-3, 0 * r), 1.0) == pytest.approx(math.sqrt(8 * math.pi**2), rel=1e-4)
    assert energy_norm(RadialData(r, 0 * r, r**-3), 1.0) == pytest.approx(math.sqrt(SIGMA4), rel=1e-4)
    assert energy_norm(RadialData(r, 0 * r, 0 * r), 1.0) == 0.0


def test_isometry_smooth_and_zero(g16):
    G = RadialProfile.from_function(GridSpec(-64, 64, H), lambda s: np.exp(-((s - 0.5) ** 2)))
    assert isometry_defect(G, radial_grid(128, H)) < 1e-4
    assert isometry_defect(RadialProfile.zeros(g16)) == 0.0


def test_box_isometry_improves_with_refinement():
    defects = []
    for h in (2.0**-5, 2.0**-6, 2.0**-7):
        defects.append(isometry_defect(box(GridSpec(-64, 64, h)), radial_grid(128, h)))
    assert defects[0] > defects[1] > defects[2]


@given(
    st.lists(st.tuples(st.floats(-3, 3), st.floats(0.5, 2), st.floats(-1, 1)), min_size=1, max_size=3)
)
def test_isometry_property(bumps):
    fn = lambda s: sum(a * np.exp(-(((s - c) / w) ** 2)) for c, w, a in bumps)
    G = RadialProfile.from_function(GridSpec(-24, 24, 2.0**-5), fn)
    from nonrad.grid_profile import l2_norm

    if l2_norm(G) < 1e-3:
        return
    assert isometry_defect(G, radial_grid(48, 2.0**-5)) < 1e-3


def test_two_direction_convention():
    # forward radiation reads G at -s, backward at +s: G_+(s) = G_-(-s)
    g = GridSpec(-64, 64, 2.0**-6)
    G = RadialProfile.from_function(g, lambda s: np.exp(-((s - 0.7) ** 2)) * (1 + s))
    T = 40.0
    sig = np.linspace(-2, 3, 11)
    r = sig + T
    _, ut_plus, _ = evolve_free_all(G, r, T)
    _, ut_minus, _ = evolve_free_all(G, r, -T)
    # r^2 u_t = G(t + r) + G(t - r) - r^{-1} integral_{t-r}^{t+r} G, exactly
    m0 = np.array([moment0(G, -x, g.s_max) for x in sig])
    G_plus = r**2 * ut_plus + m0 / r
    m0 = np.array([moment0(G, g.s_min, x) for x in sig])
    G_minus = r**2 * ut_minus + m0 / r
    assert np.max(np.abs(G_plus - G(-sig))) < 1e-8
    assert np.max(np.abs(G_minus - G(sig))) < 1e-8


# I/O
def test_data_csv(tmp_path):
    r = radial_grid(2, 0.25)
    d = RadialData(r, r, 2 * r)
    p = tmp_path / "d.csv"
    save_data_csv(p, d)
    back = load_data_csv(p)
    assert np.array_equal(back.u1, d.u1)
    p.write_text("r,u0,u1\n1,2\n")
    with pytest.raises(ValueError):
        load_data_csv(p)
    q = tmp_path / "f.csv"
    dump_field_csv(q, box(GridSpec(-2, 2, 0.25)), [1.0, 2.0], [0.0, 1.0])
    assert q.read_text().splitlines()[0] == "r,t,u"


def test_nonuniform_grid_rejected():
    with pytest.raises(ValueError):
        profile_from_data(RadialData(np.array([1.0, 2.0, 4.0]), np.zeros(3), np.zeros(3)))
