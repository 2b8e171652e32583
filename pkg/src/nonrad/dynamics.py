"""Classification checks: translation laws, uniqueness, the ground state and
the universal-profile overlap identity."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Iterable

import numpy as np

from .charnum import full_moments_from_exterior
from .extsolve import ExteriorSolution, exterior_energy
from .freewave import RadialData
from .grid_profile import SIGMA4, Array, GridDomainError, RadialProfile, moment1

_EPS = 1e-9


# ------------------------------------------------------- translation law


@dataclass(frozen=True)
class TranslationReport:
    t0: float
    alpha_before: float
    alpha_after: float
    beta_before: float
    beta_after: float
    predicted_beta: float
    defect: float
    rho: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def snapshot_data(sol: ExteriorSolution, t: float) -> RadialData:
    """Exterior snapshot at t as data; values inside the cone are zeroed."""
    k = sol.time_index(t)
    u0 = np.nan_to_num(sol.u[k], nan=0.0)
    u1 = np.nan_to_num(sol.ut[k], nan=0.0)
    return RadialData(sol.r_grid, u0, u1)


def _first_node(sol: ExteriorSolution, t: float, offset: int) -> float:
    ext = np.nonzero(sol.exterior(t))[0]
    return float(sol.r_grid[ext[0] + offset])


def measure_charnums(
    sol: ExteriorSolution, t: float, G_ref: RadialProfile, *, offset: int = 2
) -> tuple[float, float, float]:
    """(alpha, beta, rho) of the snapshot at t, beta relative to the full-line G_ref."""
    d = snapshot_data(sol, t)
    rho = _first_node(sol, t, offset)
    m0, m1 = full_moments_from_exterior(d, rho)
    return -m0, m1 - moment1(G_ref), rho


def translate_and_measure(
    sol: ExteriorSolution, t0: float, G_ref: RadialProfile, *, offset: int = 2
) -> TranslationReport:
    """Re-extract (alpha, beta) from the snapshot at t0 treated as initial data.

    Needs an autonomous nonlinearity; the snapshot is read on r >= R + |t0|
    (plus ``offset`` nodes to stay clear of the one-sided derivative at the
    cone edge).
    """
    nl = sol.config.get("nonlinearity", {})
    if nl and not nl.get("autonomous", True):
        raise ValueError("the translation law needs a time-independent nonlinearity")
    if abs(t0) > sol.T + _EPS:
        raise GridDomainError(f"t0 = {t0} exceeds the computed horizon {sol.T}")
    a0, b0, _ = measure_charnums(sol, 0.0, G_ref, offset=offset)
    a1, b1, rho = measure_charnums(sol, t0, G_ref, offset=offset)
    pred = b0 + a0 * t0
    return TranslationReport(t0, a0, a1, b0, b1, pred, abs(b1 - pred), rho)


# ------------------------------------------------------------ uniqueness


def _common(sol1: ExteriorSolution, sol2: ExteriorSolution) -> tuple[Array, Array, Array]:
    if sol1.r_grid.shape != sol2.r_grid.shape or not np.allclose(sol1.r_grid, sol2.r_grid):
        raise GridDomainError("solutions must share the radial grid")
    t1 = np.round(sol1.times, 9)
    t2 = np.round(sol2.times, 9)
    common, i1, i2 = np.intersect1d(t1, t2, return_indices=True)
    return common, i1, i2


def uniqueness_check(
    sol1: ExteriorSolution,
    sol2: ExteriorSolution,
    R: float,
    charnums: tuple[tuple[float, float], tuple[float, float]] | None = None,
    tol: float = 1e-3,
) -> float:
    """sup |u - v| over the common exterior grid r > R + |t|."""
    if charnums is not None:
        (a1, b1), (a2, b2) = charnums
        if abs(a1 - a2) > tol * max(1.0, abs(a1)) or abs(b1 - b2) > tol * max(1.0, abs(b1)):
            raise GridDomainError("characteristic numbers differ; uniqueness does not apply")
    common, i1, i2 = _common(sol1, sol2)
    if common.size == 0:
        raise GridDomainError("no common snapshot times")
    out = 0.0
    for t, k1, k2 in zip(common, i1, i2):
        ext = sol1.r_grid >= R + abs(t) - _EPS
        diff = np.abs(sol1.u[k1, ext] - sol2.u[k2, ext])
        if np.any(np.isnan(diff)):
            raise GridDomainError("R is smaller than a solution's cone")
        if diff.size:
            out = max(out, float(np.max(diff)))
    return out


# ----------------------------------------------------------- ground state


def ground_state(lam: float, r: Any) -> Any:
    """(1/lam + lam r^2 / 15)^{-3/2}, the static solution of the focusing equation."""
    if not lam > 0:
        raise GridDomainError("lambda must be positive")
    return (1.0 / lam + lam * np.asarray(r, dtype=float) ** 2 / 15.0) ** -1.5


def ground_state_derivatives(lam: float, r: Array) -> tuple[Array, Array, Array]:
    q = 1.0 / lam + lam * r**2 / 15.0
    w = q**-1.5
    w1 = -(lam * r / 5.0) * q**-2.5
    w2 = -(lam / 5.0) * q**-2.5 + (lam**2 * r**2 / 15.0) * q**-3.5
    return w, w1, w2


def ground_state_residual(
    lam: float, r_max: float, *, n: int = 4001, sign: float = 1.0, method: str = "analytic", step: float = 1e-3
) -> float:
    """sup over (0, r_max] of |W'' + 4 W'/r + sign W^{7/3}|."""
    r = np.linspace(r_max / n, r_max, n)
    if method == "analytic":
        w, w1, w2 = ground_state_derivatives(lam, r)
    elif method == "fd":
        w = ground_state(lam, r)
        wp, wm = ground_state(lam, r + step), ground_state(lam, r - step)
        w1 = (wp - wm) / (2 * step)
        w2 = (wp - 2 * w + wm) / step**2
    else:
        raise ValueError("method must be 'analytic' or 'fd'")
    res = w2 + 4.0 * w1 / r + sign * np.abs(w) ** (4 / 3) * w
    if sign < 0:
        # include the origin, where the residual is -2 W^{7/3}(0) in 5D
        w0 = ground_state(lam, 0.0)
        res = np.concatenate(([-2.0 * w0 ** (7 / 3)], res))
    return float(np.max(np.abs(res)))


# ------------------------------------------------------ span of r^{-3}


def span_field(a: float, b: float, R: float, times: Iterable[float], r_grid: Array) -> ExteriorSolution:
    """The linear non-radiative field u = (a t + b) r^{-3} sampled on the exterior cone."""
    return ExteriorSolution.from_field(
        lambda r, t: (a * t + b) * r**-3,
        lambda r, t: a * r**-3 + 0 * r,
        lambda r, t: -3.0 * (a * t + b) * r**-4,
        R,
        np.asarray(list(times), dtype=float),
        r_grid,
    )


def span_energy_exact(a: float, b: float, R: float, t: float) -> float:
    rho = R + abs(t)
    if rho == 0:
        return math.inf if (a or b) else 0.0
    return SIGMA4 * (3.0 * (a * t + b) ** 2 * rho**-3 + a * a / rho)


def span_nonradiative_check(
    a: float, b: float, R: float, t_list: Iterable[float], r_grid: Array | None = None
) -> dict[str, Any]:
    """Wave-equation residual and exterior energies of (a t + b) r^{-3}."""
    from .freewave import radial_grid

    rg = radial_grid() if r_grid is None else r_grid
    ts = [float(t) for t in t_list]
    sol = span_field(a, b, R, ts, rg)
    r = rg
    # u_tt = 0 and u_rr + 4 u_r / r = (a t + b)(12 - 12) r^{-5}
    resid = 0.0
    for t in ts:
        c = a * t + b
        u_rr = 12.0 * c * r**-5
        u_r = -3.0 * c * r**-4
        resid = max(resid, float(np.max(np.abs(u_rr + 4.0 * u_r / r) * r**5)))
    rows = []
    for t in ts:
        rho = R + abs(t)
        if rho <= 0:
            continue
        e = exterior_energy(sol, t)
        ex = span_energy_exact(a, b, R, t)
        rows.append({"t": t, "energy": e, "exact": ex, "rel_err": abs(e - ex) / ex if ex else abs(e)})
    return {"a": a, "b": b, "R": R, "residual": resid, "energies": rows}


# ---------------------------------------------------- universal profile


@dataclass(frozen=True)
class OverlapReport:
    sup_diff: float
    t0: float
    R0: float
    lipschitz_ok: bool
    n_points: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def overlap_cone(R1: float, t1: float, R2: float, t2: float) -> tuple[float, float]:
    """Smallest exterior cone (R0, t0) containing both cones {r > Ri + |t - ti|}."""
    t0 = 0.5 * (R2 - R1 + t1 + t2)
    lo, hi = min(t1, t2), max(t1, t2)
    t0 = min(max(t0, lo), hi)
    R0 = max(R1 + abs(t1 - t0), R2 + abs(t2 - t0))
    return R0, t0


def universal_profile_consistency(
    sol1: ExteriorSolution, sol2: ExteriorSolution, t1: float, t2: float, *, csv_rows: list | None = None
) -> OverlapReport:
    """sup |u1(r, t - t1) - u2(r, t - t2)| over the overlap of the two cones.

    sol1 is the run with second number alpha t1 and sol2 the one with alpha t2.
    Points are taken where both shifted snapshots exist.
    """
    if sol1.r_grid.shape != sol2.r_grid.shape or not np.allclose(sol1.r_grid, sol2.r_grid):
        raise GridDomainError("solutions must share the radial grid")
    R0, t0 = overlap_cone(sol1.R, t1, sol2.R, t2)
    ts1 = {round(float(t) + t1, 9): k for k, t in enumerate(sol1.times)}
    ts2 = {round(float(t) + t2, 9): k for k, t in enumerate(sol2.times)}
    common = sorted(set(ts1) & set(ts2))
    out = 0.0
    npts = 0
    for t in common:
        k1, k2 = ts1[t], ts2[t]
        ok = ~np.isnan(sol1.u[k1]) & ~np.isnan(sol2.u[k2])
        if not np.any(ok):
            continue
        diff = np.abs(sol1.u[k1, ok] - sol2.u[k2, ok])
        npts += int(diff.size)
        out = max(out, float(np.max(diff)))
        if csv_rows is not None:
            for r, dv in zip(sol1.r_grid[ok], diff):
                csv_rows.append((t, float(r), float(dv)))
    if npts == 0:
        raise GridDomainError("the two cones share no computed points")
    lip = abs(sol1.R - sol2.R) <= abs(t1 - t2) + _EPS
    return OverlapReport(out, t0, R0, lip, npts)
