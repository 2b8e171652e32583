"""Acceptance checks shared by the test suite and ``nonrad verify``.

Each check returns a CheckResult with the measured values and the threshold
it was held to. Expensive constructions are cached per process so that the
fixed-point checks share runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

import numpy as np

from .charnum import alpha_of, decay_rate_fit
from .dynamics import (
    ground_state,
    ground_state_residual,
    measure_charnums,
    span_nonradiative_check,
    translate_and_measure,
    uniqueness_check,
    universal_profile_consistency,
)
from .extsolve import Nonlinearity, fd_oracle_solve, solve_exterior
from .fixpoint import FixpointConfig, FixpointResult, iterate_to_fixed_point
from .freewave import (
    RadialData,
    data_from_profile,
    energy_norm,
    isometry_defect,
    profile_from_data,
    radial_grid,
)
from .grid_profile import SIGMA4, GridSpec, RadialProfile, l2_tail_many


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    measured: dict[str, Any] = field(default_factory=dict)
    threshold: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{tag}] criterion {self.criterion:2d} {self.name}: {vals} (need {self.threshold})"

    def to_dict(self) -> dict[str, Any]:
        return {
            "criterion": self.criterion,
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "threshold": self.threshold,
        }


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _slopes(errs: list[float]) -> list[float]:
    return [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]


# smooth test profiles on the line
SMOOTH_PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gauss_shifted": lambda s: np.exp(-((s - 0.5) ** 2)),
    "gauss_odd": lambda s: s * np.exp(-(s**2)),
    "sech2": lambda s: 1.0 / np.cosh(2 * s + 1) ** 2,
    "two_bumps": lambda s: np.exp(-4 * (s - 2) ** 2) - 0.5 * np.exp(-2 * (s + 1) ** 2),
    "wide_gauss": lambda s: 0.3 * np.exp(-((s / 3) ** 2)) * np.cos(s),
}


# ------------------------------------------------------------ linear layer


def check_isometry(fast: bool = False) -> CheckResult:
    steps = [2.0**-5, 2.0**-6, 2.0**-7]
    half = 32.0 if fast else 64.0
    worst_default = 0.0
    min_slope = math.inf
    per = {}
    for name, fn in SMOOTH_PROFILES.items():
        errs = []
        for h in steps:
            G = RadialProfile.from_function(GridSpec(-half, half, h), fn)
            errs.append(isometry_defect(G, radial_grid(half, h)))
        worst_default = max(worst_default, errs[-1])
        sl = min(_slopes(errs))
        min_slope = min(min_slope, sl)
        per[name] = errs[-1]
    ok = worst_default < 1e-4 and min_slope >= 1.8
    return CheckResult(1, "linear isometry", ok, {"max_defect": worst_default, "min_slope": min_slope}, "<1e-4, slope>=1.8")


def check_anchors() -> CheckResult:
    h = 2.0**-7
    rg = radial_grid(128.0, h)
    box = RadialProfile.indicator(GridSpec(-64, 64, h), -1, 1)
    d = data_from_profile(box, rg)
    out = rg > 1 + 1e-9
    u1_err = float(np.max(np.abs(d.u1[out] + 2 * rg[out] ** -3) / (2 * rg[out] ** -3)))
    e_static = span_nonradiative_check(0, 1, 0, [2.0], rg)["energies"][0]
    e_lin = span_nonradiative_check(1, 0, 0, [4.0], rg)["energies"][0]
    errs = {"u1_box": u1_err, "E_static_t2": abs(e_static["energy"] - 3 * SIGMA4 / 8) / (3 * SIGMA4 / 8)}
    errs["E_linear_t4"] = abs(e_lin["energy"] - SIGMA4) / SIGMA4
    norm_err = 0.0
    for r0 in (1.0, 2.0):
        d_h1 = RadialData(rg, rg**-3, 0 * rg)
        d_l2 = RadialData(rg, 0 * rg, rg**-3)
        norm_err = max(
            norm_err,
            abs(energy_norm(d_h1, r0) - math.sqrt(3 * SIGMA4) * r0**-1.5) / (math.sqrt(3 * SIGMA4) * r0**-1.5),
            abs(energy_norm(d_l2, r0) - math.sqrt(SIGMA4 / r0)) / math.sqrt(SIGMA4 / r0),
        )
    errs["norms"] = norm_err
    ok = max(errs.values()) < 1e-4
    return CheckResult(2, "closed-form anchors", ok, errs, "all rel err <1e-4")


def roundtrip_error(fn: Callable, h: float, half: float = 16.0) -> float:
    G = RadialProfile.from_function(GridSpec(-half, half, h), fn)
    back = profile_from_data(data_from_profile(G, radial_grid(half, h)), G.grid)
    return float(np.max(np.abs(back.values - G.values)))


def check_roundtrip() -> CheckResult:
    steps = [2.0**-6, 2.0**-7, 2.0**-8, 2.0**-9]
    worst = 0.0
    min_slope = math.inf
    for name in ("gauss_shifted", "gauss_odd", "sech2"):
        errs = [roundtrip_error(SMOOTH_PROFILES[name], h) for h in steps]
        worst = max(worst, errs[-1])
        min_slope = min(min_slope, min(_slopes(errs)))
    ok = worst < 1e-6 and min_slope >= 1.8
    return CheckResult(3, "roundtrip bijection", ok, {"max_err_2^-9": worst, "min_slope": min_slope}, "<1e-6, slope>=1.8")


def check_ground_state() -> CheckResult:
    res = ground_state_residual(1.0, 20.0)
    h = 1 / 32
    rg = radial_grid(64.0, h)
    W = ground_state(1.0, rg)
    sol = solve_exterior(RadialData(rg, W, 0 * rg), Nonlinearity("focusing"), 1.0, 2.0, h, snapshot_dt=0.25)
    drift = float(np.nanmax(np.abs(sol.u - W[None, :])))
    ok = res < 1e-10 and drift < 1e-3
    return CheckResult(4, "ground state", ok, {"residual": res, "drift": drift}, "residual<1e-10, drift<1e-3")


def bump_data(h: float, r_max: float = 24.0, amp: float = 3.0) -> RadialData:
    G = RadialProfile.from_function(GridSpec(-r_max, r_max, h), lambda s: amp * np.exp(-4 * (s - 0.5) ** 2))
    return data_from_profile(G, radial_grid(r_max, h))


def check_cross_validation() -> CheckResult:
    F = Nonlinearity("focusing")
    errs = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        d = bump_data(h)
        kw = dict(snapshot_dt=0.5, mask="smooth", mask_width=0.5)
        s1 = solve_exterior(d, F, 0.5, 4.0, h, **kw)
        s2 = fd_oracle_solve(d, F, 0.5, 4.0, h / 2, **kw)
        errs.append(float(np.nanmax(np.abs(s1.u - s2.u))))
    sl = _slopes(errs)
    return CheckResult(5, "solver cross-validation", min(sl) >= 1.8, {"sup_err": errs, "slopes": sl}, "slope>=1.8")


# ------------------------------------------------------------ constructions


@lru_cache(maxsize=None)
def construction(
    alpha: float,
    beta: float = 0.0,
    kind: str = "focusing",
    step: float = 1 / 16,
    s_max: float = 32.0,
    fill: str = "affine",
) -> FixpointResult:
    F = Nonlinearity(kind)
    if beta == 0.0:
        return iterate_to_fixed_point(FixpointConfig(alpha=alpha, step=step, s_max=s_max, fill=fill), F, "first")
    ref = construction(alpha, 0.0, kind, step, s_max).as_reference()
    cfg = FixpointConfig(alpha=alpha, beta=beta, step=step, s_max=s_max, fill=fill)
    return iterate_to_fixed_point(cfg, F, "second", ref)


def _decay_slope(G: RadialProfile, lo: float = 2.0, hi: float = 20.0) -> float:
    r = np.geomspace(lo, hi, 12)
    return decay_rate_fit((r, l2_tail_many(G, r)))


def check_first_order(fast: bool = False) -> CheckResult:
    s_max = 32.0 if fast else 64.0
    ok = True
    m: dict[str, Any] = {}
    worst_ratio, worst_alpha, worst_slope = 0.0, 0.0, -math.inf
    energy_ok = True
    for alpha in (0.05, 0.1):
        for kind in ("focusing", "defocusing"):
            res = construction(alpha, 0.0, kind, 1 / 16, s_max)
            a_profile = alpha_of(res.G_star)
            a_data, _, _ = measure_charnums(res.sol, 0.0, res.G_star)
            err = max(abs(a_profile - alpha), abs(a_data - alpha)) / alpha
            worst_alpha = max(worst_alpha, err)
            worst_ratio = max(worst_ratio, res.max_ratio)
            worst_slope = max(worst_slope, _decay_slope(res.G_tail))
            energy_ok = energy_ok and res.energy_decreasing
    ok = worst_ratio < 0.5 and worst_alpha < 0.02 and energy_ok and worst_slope <= -7 / 6 + 0.2
    m = {"max_ratio": worst_ratio, "alpha_rel_err": worst_alpha, "energy_decreasing": energy_ok, "max_slope": worst_slope}
    return CheckResult(6, "first-order construction", ok, m, "ratio<0.5, alpha<2%, energy down, slope<=-0.967")


def check_second_order(fast: bool = False) -> CheckResult:
    s_max = 32.0 if fast else 64.0
    ref = construction(0.1, 0.0, "focusing", 1 / 16, s_max)
    res = construction(0.1, 0.05, "focusing", 1 / 16, s_max)
    _, beta, _ = measure_charnums(res.sol, 0.0, ref.G_star)
    err = abs(beta - 0.05) / 0.05
    slope = _decay_slope(res.G_tail)
    ok = err < 0.03 and slope <= -13 / 6 + 0.3 and res.max_ratio < 0.5
    m = {"beta": beta, "beta_rel_err": err, "slope": slope, "max_ratio": res.max_ratio}
    return CheckResult(7, "second-order construction", ok, m, "beta<3%, slope<=-1.867")


def check_translation() -> CheckResult:
    worst_b, worst_a = 0.0, 0.0
    ok = True
    step = 1 / 32
    ref = construction(0.1, 0.0, "focusing", step)
    for beta in (0.0, 0.05):
        res = construction(0.1, beta, "focusing", step)
        for t0 in (0.25, -0.25, 0.5, -0.5, 1.0, -1.0):
            rep = translate_and_measure(res.sol, t0, ref.G_star)
            bound = max(0.03 * abs(0.1 * t0), 5e-4)
            ok = ok and rep.defect <= bound and abs(rep.alpha_after - rep.alpha_before) <= 5e-4
            worst_b = max(worst_b, rep.defect / bound)
            worst_a = max(worst_a, abs(rep.alpha_after - rep.alpha_before))
    m = {"max_beta_defect/bound": worst_b, "max_alpha_drift": worst_a}
    return CheckResult(8, "translation law", ok, m, "beta defect<=max(3%|a t0|,5e-4), alpha drift<=5e-4")


def check_uniqueness() -> CheckResult:
    diffs = []
    for step in (1 / 16, 1 / 32):
        a = construction(0.1, 0.0, "focusing", step, 32.0, "affine")
        b = construction(0.1, 0.0, "focusing", step, 32.0, "parabolic")
        ca = measure_charnums(a.sol, 0.0, a.G_star)[:2]
        cb = measure_charnums(b.sol, 0.0, a.G_star)[:2]
        diffs.append(uniqueness_check(a.sol, b.sol, a.R, (ca, cb)))
    ok = diffs[-1] < diffs[0] and diffs[-1] < 1e-3
    return CheckResult(9, "uniqueness", ok, {"sup_diff": diffs}, "decreasing, <1e-3")


def check_symmetry() -> CheckResult:
    res = construction(0.1, 0.0, "focusing", 1 / 16)
    G = res.G_star
    even = float(np.max(np.abs(G.values - G.values[::-1])))
    sol = res.sol
    odd = 0.0
    for k, t in enumerate(sol.times):
        j = int(np.argmin(np.abs(sol.times + t)))
        odd = max(odd, float(np.nanmax(np.abs(sol.u[k] + sol.u[j]))))
    ok = even < 1e-6 and odd < 1e-8
    return CheckResult(10, "(AS) symmetry", ok, {"even_defect": even, "odd_defect": odd}, "even<1e-6, odd<1e-8")


def check_overlap() -> CheckResult:
    diffs = []
    lip = True
    for step, s_max in ((1 / 16, 32.0), (1 / 32, 64.0)):
        a = construction(0.1, 0.0, "focusing", step, s_max)
        b = construction(0.1, 0.05, "focusing", step, s_max)
        rep = universal_profile_consistency(a.sol, b.sol, 0.0, 0.5)
        diffs.append(rep.sup_diff)
        lip = lip and rep.lipschitz_ok
    ok = diffs[-1] < diffs[0] and diffs[-1] < 1e-3 and lip
    return CheckResult(11, "universal-profile overlap", ok, {"sup_diff": diffs, "lipschitz": lip}, "decreasing, <1e-3")


SUITES: dict[str, list[Callable[..., CheckResult]]] = {
    "linear": [check_isometry, check_anchors, check_roundtrip, check_ground_state, check_cross_validation],
    "fixpoint": [check_first_order, check_second_order, check_symmetry],
    "dynamics": [check_translation, check_uniqueness, check_overlap],
}
SUITES["all"] = SUITES["linear"] + SUITES["fixpoint"] + SUITES["dynamics"]

_FAST_AWARE = {check_isometry, check_first_order, check_second_order}


def run_suite(name: str, fast: bool = False) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(name)
    out = []
    for fn in SUITES[name]:
        out.append(fn(fast) if fn in _FAST_AWARE else fn())
    return out
