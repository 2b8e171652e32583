import math

import numpy as np
import pytest

from nonrad.extsolve import Nonlinearity, cutoff, solve_exterior
from nonrad.fixpoint import (
    FixpointConfig,
    NonContractionError,
    apply_T,
    extend_profile,
    extend_profile_first,
    extend_profile_second,
    extract_scatter_profiles,
    iterate_to_fixed_point,
)
from nonrad.freewave import evolve_free, radial_grid, source_profile
from nonrad.grid_profile import SIGMA4, GridDomainError, GridSpec, RadialProfile, moment0, moment1

FOC = Nonlinearity("focusing")
G8 = GridSpec(-8, 8, 1 / 16)


def small(alpha, **kw):
    return FixpointConfig(alpha, **{"step": 1 / 8, "s_max": 16.0, **kw})


# fills
def test_first_fill_constant():
    G = extend_profile_first(RadialProfile.zeros(G8), 1.0, 1.0)
    s = G8.nodes
    assert np.allclose(G.values[np.abs(s) < 1 - 1e-9], -0.5)
    assert moment0(G) == pytest.approx(-1.0, abs=1e-14)
    assert np.all(G.values[np.abs(s) > 1 + 1e-9] == 0)


def test_second_fill_linear():
    G = extend_profile_second(RadialProfile.zeros(G8), 1.0, 1.0)
    s = G8.nodes
    k = np.abs(s) < 1 - 1e-9
    assert np.allclose(G.values[k], 1.5 * s[k])
    assert moment0(G) == pytest.approx(0.0, abs=1e-14)
    assert moment1(G) == pytest.approx(1.0, abs=1e-14)


def test_fill_keeps_tail_and_hits_moments():
    tail = RadialProfile.from_function(G8, lambda s: np.exp(-np.abs(s)) * (1 + 0.3 * s))
    G = extend_profile(tail, 2.0, m0=0.7, m1=-0.2)
    assert moment0(G) == pytest.approx(0.7, abs=1e-13)
    assert moment1(G) == pytest.approx(-0.2, abs=1e-13)
    out = np.abs(G8.nodes) > 2 + 1e-9
    assert np.array_equal(G.values[out], tail.values[out])


def test_parabolic_fill_moments_second_order():
    errs = []
    for h in (1 / 8, 1 / 16, 1 / 32):
        g = GridSpec(-4, 4, h)
        G = extend_profile(RadialProfile.zeros(g), 1.0, m0=1.0, m1=1.0, fill="parabolic", exact_moments=False)
        errs.append(abs(moment0(G) - 1) + abs(moment1(G) - 1))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_fill_radius_must_be_node():
    with pytest.raises(GridDomainError):
        extend_profile_first(RadialProfile.zeros(G8), 1.0, 1.03)


# the map
def test_T_of_zero_at_alpha_zero():
    cfg = small(0.0, R=1.0)
    TG, _ = apply_T(RadialProfile.zeros(cfg.grid), cfg, FOC)
    assert TG.max_abs() == 0.0
    res = iterate_to_fixed_point(cfg, FOC)
    assert res.iters == 1 and res.G_star.max_abs() == 0.0


def test_first_order_contracts_and_stays_in_ball():
    res = iterate_to_fixed_point(small(0.2, R=0.5), FOC, keep_iterates=True)
    assert res.max_ratio < 0.5
    # a contraction with ratio q keeps every iterate within |G_1| / (1 - q)
    q = res.max_ratio
    assert max(res.tail_norms) <= res.tail_norms[0] / (1 - q) + 1e-15
    assert res.distances[-1] < res.config.tol
    assert moment0(res.G_star) == pytest.approx(-0.2, abs=1e-12)


def test_fixed_point_is_even():
    res = iterate_to_fixed_point(small(0.2, R=0.5), FOC, keep_iterates=True)
    for G in res.iterates + [res.G_star]:
        assert np.max(np.abs(G.values - G.values[::-1])) < 1e-14


def test_ratio_shrinks_with_radius():
    ratios = [iterate_to_fixed_point(small(0.2, R=R), FOC).max_ratio for R in (0.5, 1.0, 2.0)]
    assert ratios[0] > ratios[1] > ratios[2]


def test_non_contraction_reported():
    with pytest.raises(NonContractionError):
        iterate_to_fixed_point(small(0.2, R=0.5, max_iters=2, tol=1e-30), FOC)


def test_second_order_needs_reference():
    cfg = small(0.0, beta=0.1, R=1.0)
    with pytest.raises(ValueError):
        apply_T(RadialProfile.zeros(cfg.grid), cfg, FOC, "second")
    with pytest.raises(ValueError):
        apply_T(RadialProfile.zeros(cfg.grid), cfg, FOC, "third")


def test_record_and_energy_trace():
    res = iterate_to_fixed_point(small(0.05), FOC)
    rec = res.record()
    for key in ("alpha", "R", "c", "iters", "ratios", "distances", "energy_trace", "horizon", "run_id", "config"):
        assert key in rec
    assert res.R == 0.5
    assert res.energy_decreasing
    assert rec["run_id"] == iterate_to_fixed_point(small(0.05), FOC).run_id


def test_radius_recipe():
    assert FixpointConfig(0.1).radius("first") == 1.875
    assert FixpointConfig(0.05).radius("first") == 0.5
    assert FixpointConfig(0.0, beta=1.0).radius("second") == pytest.approx(math.ceil(32**0.5 * 8) / 8)


# scattering profiles
def test_extraction_zero_source():
    G = RadialProfile.from_function(GridSpec(-16, 16, 1 / 16), lambda s: np.exp(-(s**2)))
    sol = solve_exterior(G, Nonlinearity.zero(), 0.5, 4.0, 1 / 16)
    sp = extract_scatter_profiles(sol, G.grid)
    assert sp.Gplus.max_abs() == 0 and sp.Gminus.max_abs() == 0
    assert sp.disagreement == 0.0


def test_duhamel_part_matches_independent_quadrature():
    # a u-independent source: compare with a direct sum of shifted free waves
    h, R, T = 1 / 32, 0.5, 2.0
    g = lambda r: np.exp(-((r - 2) ** 2))
    F = Nonlinearity("custom", 0.0, False, lambda t, r, u: g(r), autonomous=True)
    G0 = RadialProfile.zeros(GridSpec(-16, 16, h))
    sol = solve_exterior(G0, F, R, T, h, mask="smooth", mask_width=1.0, snapshot_dt=T)
    rg = radial_grid(32, h)
    k = sol.time_index(T)
    ext = sol.exterior(T) & (sol.r_grid < 10)
    r = sol.r_grid[ext]
    tp = np.arange(0, int(T / h) + 1) * h
    vals = []
    for t1 in tp:
        f = g(rg) * cutoff(rg, t1, R, "smooth", 1.0)
        vals.append(evolve_free(source_profile(f, rg), r, T - t1))
    vals = np.array(vals)
    oracle = h * (vals.sum(axis=0) - 0.5 * (vals[0] + vals[-1]))
    scale = np.max(np.abs(oracle))
    assert np.max(np.abs(sol.u[k, ext] - oracle)) < 1e-3 * scale


def test_scatter_norm_constant():
    res = iterate_to_fixed_point(small(0.05), FOC)
    sp = extract_scatter_profiles(res.sol, res.config.grid)
    assert sp.norm_bound_constant is not None
    assert 0 < sp.norm_bound_constant <= (2 * SIGMA4) ** -0.5
    # u is odd in t for even profiles, which makes the two scattering profiles equal
    Gp, Gm = sp
    assert np.max(np.abs(Gp.values - Gm.values)) < 1e-18
