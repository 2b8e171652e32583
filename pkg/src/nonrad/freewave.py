"""Exact linear theory for radial free waves in five space dimensions.

A radial free wave is generated by its radiation profile G through

    u(r, t) = r^{-3} * integral_{t-r}^{t+r} (s - t) G(s) ds,

and the map from G to the initial data (u0, u1) is a bijection that scales
the energy norm by 2*sigma4. Profiles are only determined up to an additive
constant by the field (constants integrate to zero against s - t), so the
inverse map below picks the representative that vanishes at infinity unless
``anchor="origin"`` is requested.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt
from scipy.integrate import cumulative_trapezoid, trapezoid

from .grid_profile import SIGMA4, Array, GridSpec, RadialProfile, cumulative
from .io_utils import write_csv

DEFAULT_R_MAX = 128.0
DEFAULT_STEP = 2.0**-7


def radial_grid(r_max: float = DEFAULT_R_MAX, step: float = DEFAULT_STEP) -> Array:
    """Uniform grid step, 2*step, ..., r_max (r = 0 excluded)."""
    n = int(round(r_max / step))
    if abs(n * step - r_max) > 1e-9 * r_max:
        raise ValueError("r_max must be a whole number of steps")
    return step * np.arange(1, n + 1, dtype=float)


def _grid_step(r: Array) -> float:
    if r.ndim != 1 or r.size < 3:
        raise ValueError("radial grid needs at least three nodes")
    h = float(r[1] - r[0])
    if not h > 0 or np.max(np.abs(np.diff(r) - h)) > 1e-9 * max(h, 1.0):
        raise ValueError("radial grid must be uniform")
    if abs(r[0] - h) > 1e-9 * h:
        raise ValueError("radial grid must start at r = step")
    return h


@dataclass(frozen=True, eq=False)
class RadialData:
    r_grid: Array
    u0: Array
    u1: Array

    def __post_init__(self) -> None:
        r = np.asarray(self.r_grid, dtype=float)
        _grid_step(r)
        u0 = np.asarray(self.u0, dtype=float)
        u1 = np.asarray(self.u1, dtype=float)
        if u0.shape != r.shape or u1.shape != r.shape:
            raise ValueError("u0 and u1 must match the radial grid")
        if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(u1))):
            raise ValueError("data must be finite")
        for name, a in (("r_grid", r), ("u0", u0), ("u1", u1)):
            a = a.copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def step(self) -> float:
        return float(self.r_grid[1] - self.r_grid[0])

    @property
    def r_max(self) -> float:
        return float(self.r_grid[-1])

    def __sub__(self, other: "RadialData") -> "RadialData":
        if other.r_grid.shape != self.r_grid.shape or not np.allclose(other.r_grid, self.r_grid):
            raise ValueError("data live on different grids")
        return RadialData(self.r_grid, self.u0 - other.u0, self.u1 - other.u1)

    @classmethod
    def from_functions(cls, r_grid: Array, f0, f1) -> "RadialData":
        r = np.asarray(r_grid, dtype=float)
        return cls(r, np.asarray(f0(r), float) * np.ones_like(r), np.asarray(f1(r), float) * np.ones_like(r))


# -------------------------------------------------------------- propagator


def evolve_free_all(G: RadialProfile, r: npt.ArrayLike, t: npt.ArrayLike) -> tuple[Array, Array, Array]:
    """Free wave u and its derivatives u_t, u_r at (r, t), broadcasting."""
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    hi, lo = t + r, t - r
    d0 = cumulative(G, hi, 0) - cumulative(G, lo, 0)
    d1 = cumulative(G, hi, 1) - cumulative(G, lo, 1)
    gp, gm = G(hi), G(lo)
    u = (d1 - t * d0) / r**3
    ut = (r * (gp + gm) - d0) / r**3
    ur = -3.0 * u / r + (gp - gm) / r**2
    return u, ut, ur


def evolve_free(G: RadialProfile, r: npt.ArrayLike, t: npt.ArrayLike) -> Array | float:
    """u(r, t) for the free wave with radiation profile G."""
    u, _, _ = evolve_free_all(G, r, t)
    return float(u) if u.ndim == 0 else u


# ------------------------------------------------------- profile <-> data


def data_from_profile(
    G: RadialProfile, r_grid: Array | None = None, *, end_correction: bool | None = None
) -> RadialData:
    """Initial data (u0, u1) of the free wave generated by G.

    The interval integrals over [-r, r] are exact for the piecewise-linear
    reconstruction. For continuous profiles an endpoint (Euler-Maclaurin)
    correction removes the O(h^2) reconstruction error, which otherwise gets
    amplified by r^{-3} at the first few nodes. Jump-bearing profiles skip
    the correction by default.
    """
    r = radial_grid(step=G.grid.step) if r_grid is None else np.asarray(r_grid, dtype=float)
    _grid_step(r)
    d0 = cumulative(G, r, 0) - cumulative(G, -r, 0)
    d1 = cumulative(G, r, 1) - cumulative(G, -r, 1)
    gp, gm = G(r), G(-r)
    if end_correction is None:
        end_correction = not G.has_jumps
    if end_correction:
        s = G.grid.nodes
        h = G.grid.step
        dG = np.gradient(G.values, h, edge_order=2)
        dp = np.interp(r, s, dG, left=0.0, right=0.0)
        dm = np.interp(-r, s, dG, left=0.0, right=0.0)
        c = h * h / 12.0
        d0 = d0 - c * (dp - dm)
        d1 = d1 - c * ((r * dp - gp) - (-r * dm - gm))
    u0 = d1 / r**3
    u1 = (gp + gm) / r**2 - d0 / r**3
    return RadialData(r, u0, u1)


def _radial_moments(r: Array, u1: Array, closure: bool) -> tuple[Array, float]:
    """integral_0^r s u1 ds at each node, and the full integral to infinity.

    The far tail beyond the last node is closed as c s^{-3}, the exact form of
    data whose profile is supported inside the grid.
    """
    # the segment [0, h] is included; s u1 vanishes at s = 0
    rr = np.concatenate(([0.0], r))
    f = np.concatenate(([0.0], r * u1))
    inner = cumulative_trapezoid(f, rr, initial=0.0)[1:]
    total = inner[-1] + (u1[-1] * r[-1] ** 2 if closure else 0.0)
    return inner, float(total)


def _profile_grid_for(d: RadialData, grid: GridSpec | None) -> GridSpec:
    h = d.step
    if grid is None:
        return GridSpec(-d.r_max, d.r_max, h)
    if abs(grid.step - h) > 1e-12 * h or not grid.zero_aligned:
        raise ValueError("profile grid must share the radial step and contain s = 0")
    return grid


def profile_from_data(
    d: RadialData,
    grid: GridSpec | None = None,
    *,
    anchor: str = "infinity",
    r_min: float | None = None,
    closure: bool = True,
) -> RadialProfile:
    """Radiation profile of the data d.

    Odd part: G(r) - G(-r) = 3 r u0 + r^2 u0'. Even part: G(r) + G(-r) =
    r^2 u1 - integral_r^inf s u1 ds (anchor "infinity", the L^2 representative)
    or r^2 u1 + integral_0^r s u1 ds (anchor "origin", G(0) = 0). The two
    anchors differ by a constant, which the propagator does not see.

    With ``r_min`` only data at r >= r_min are used (anchor "infinity") and the
    profile is set to zero on |s| < r_min.
    """
    if anchor not in ("infinity", "origin"):
        raise ValueError("anchor must be 'infinity' or 'origin'")
    if r_min is not None and anchor != "infinity":
        raise ValueError("exterior reconstruction needs anchor 'infinity'")
    g = _profile_grid_for(d, grid)
    r, u0, u1 = d.r_grid, d.u0, d.u1
    h = d.step
    du0 = radial_derivative(u0, h)
    if r_min is not None:
        ext = r >= r_min - 1e-9 * h
        if np.count_nonzero(ext) < 5:
            raise ValueError("r_min leaves fewer than five exterior nodes")
        du0[ext] = radial_derivative(u0[ext], h)
    odd = 0.5 * (3 * r * u0 + r**2 * du0)
    inner, total = _radial_moments(r, u1, closure)
    if anchor == "infinity":
        even = 0.5 * (r**2 * u1 - (total - inner))
        even0 = -0.5 * total
    else:
        even = 0.5 * (r**2 * u1 + inner)
        even0 = 0.0
    s = g.nodes
    k = np.rint(s / h).astype(int)
    vals = np.zeros(g.n)
    pos = (k > 0) & (k <= r.size)
    neg = (k < 0) & (-k <= r.size)
    vals[pos] = even[k[pos] - 1] + odd[k[pos] - 1]
    vals[neg] = even[-k[neg] - 1] - odd[-k[neg] - 1]
    vals[k == 0] = even0
    if r_min is not None:
        vals[np.abs(s) < r_min - 1e-9 * h] = 0.0
    return RadialProfile(g, vals)


def source_profile(
    f: Array, r_grid: Array, grid: GridSpec | None = None, *, anchor: str = "infinity"
) -> RadialProfile:
    """Even profile of the data (0, f): the kernel of the Duhamel propagator."""
    r = np.asarray(r_grid, dtype=float)
    return profile_from_data(RadialData(r, np.zeros_like(r), f), grid, anchor=anchor)


# ------------------------------------------------------------------ norms


def radial_derivative(u: Array, h: float) -> Array:
    """Fourth-order finite-difference derivative on a uniform grid (one-sided at the ends)."""
    u = np.asarray(u, dtype=float)
    if u.size < 5:
        return np.gradient(u, h, edge_order=2)
    du = np.empty_like(u)
    du[2:-2] = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * h)
    du[0] = (-25 * u[0] + 48 * u[1] - 36 * u[2] + 16 * u[3] - 3 * u[4]) / (12 * h)
    du[1] = (-3 * u[0] - 10 * u[1] + 18 * u[2] - 6 * u[3] + u[4]) / (12 * h)
    du[-1] = -(-25 * u[-1] + 48 * u[-2] - 36 * u[-3] + 16 * u[-4] - 3 * u[-5]) / (12 * h)
    du[-2] = -(-3 * u[-1] - 10 * u[-2] + 18 * u[-3] - 6 * u[-4] + u[-5]) / (12 * h)
    return du


def energy_density_tail(r: Array, u0: Array, u1: Array, du0: Array) -> float:
    """Far-field closure of the energy integral beyond the last node, assuming c r^{-3} tails."""
    rm = r[-1]
    return 3.0 * u0[-1] ** 2 * rm**3 + u1[-1] ** 2 * rm**5


def energy_norm(d: RadialData, r: float = 0.0, *, closure: bool = True) -> float:
    """(sigma4 * integral_r^inf (u0'^2 + u1^2) rho^4 drho)^{1/2}."""
    rg, h = d.r_grid, d.step
    if r > d.r_max:
        raise ValueError("r beyond the radial grid")
    du0 = radial_derivative(d.u0, h)
    dens = (du0**2 + d.u1**2) * rg**4
    if r <= rg[0]:
        # segment [0, h]: density vanishes like rho^4 at the origin
        x = np.concatenate(([0.0], rg))
        y = np.concatenate(([0.0], dens))
        lo = max(r, 0.0)
    else:
        x, y, lo = rg, dens, r
    total = _trapz_from(x, y, lo)
    if closure:
        total += energy_density_tail(rg, d.u0, d.u1, du0)
    return math.sqrt(SIGMA4 * max(total, 0.0))


def _trapz_from(x: Array, y: Array, lo: float) -> float:
    """Trapezoid integral of samples (x, y) over [lo, x[-1]], interpolating at lo."""
    if lo <= x[0]:
        return float(trapezoid(y, x))
    j = int(np.searchsorted(x, lo, side="right"))
    ylo = float(np.interp(lo, x, y))
    head = 0.5 * (ylo + y[j]) * (x[j] - lo) if j < x.size else 0.0
    return head + float(trapezoid(y[j:], x[j:]))


def isometry_defect(G: RadialProfile, r_grid: Array | None = None) -> float:
    """|E - 2 sigma4 ||G||^2| / (2 sigma4 ||G||^2) with E the energy of the generated data."""
    from .grid_profile import l2_norm

    g2 = l2_norm(G) ** 2
    if g2 == 0.0:
        return 0.0
    e = energy_norm(data_from_profile(G, r_grid), 0.0) ** 2
    return abs(e - 2 * SIGMA4 * g2) / (2 * SIGMA4 * g2)


# -------------------------------------------------------------------- I/O


def save_data_csv(path: str | Path, d: RadialData) -> None:
    write_csv(path, ["r", "u0", "u1"], [d.r_grid, d.u0, d.u1])


def load_data_csv(path: str | Path) -> RadialData:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["r", "u0", "u1"]:
            raise ValueError("data CSV must have header 'r,u0,u1'")
        try:
            rows = np.array([[float(x) for x in row] for row in reader if row])
        except ValueError as exc:
            raise ValueError(f"malformed data CSV: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] != 3 or rows.shape[0] < 3:
        raise ValueError("data CSV needs three columns and at least three rows")
    return RadialData(rows[:, 0], rows[:, 1], rows[:, 2])


def dump_field_csv(path: str | Path, G: RadialProfile, r: Array, t: Array) -> None:
    """Evaluate the free wave on the tensor grid (r, t) and write CSV r,t,u."""
    rr, tt = np.meshgrid(np.asarray(r, float), np.asarray(t, float), indexing="ij")
    u = evolve_free(G, rr, tt)
    write_csv(path, ["r", "t", "u"], [rr.ravel(), tt.ravel(), np.ravel(u)])
