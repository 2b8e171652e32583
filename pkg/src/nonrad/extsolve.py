"""Nonlinear exterior solver on the cone {r > R + |t|}.

``solve_exterior`` integrates the globally extended equation
u_tt - Delta u = chi_R F(t, x, u) with the exact radial propagator. Each
source slice f(t') = chi_R F(u(t')) is turned into the even profile of the
data (0, f), shifted in s by t', and added to an accumulated profile P_t, so
that

    u(t) = free wave of (G0 + P_t) evaluated at time t.

Time integration is the trapezoid rule in t'. The slice taken at the current
time contributes nothing to u (a wave launched with data (0, f) vanishes at
zero lag), so the scheme is explicit for u and the endpoint slice only enters
u_t. Profiles live on an internal index grid s_j = j*h with cells that may
jump at nodes, which keeps the sharp cut-off chi_R exactly integrable.

``fd_oracle_solve`` is an independent leapfrog discretisation used only for
cross-validation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .freewave import RadialData, profile_from_data, radial_grid
from .grid_profile import SIGMA4, Array, GridSpec, RadialProfile

_EPS = 1e-9


class DivergenceError(RuntimeError):
    """The exterior iteration left the small-data regime."""


# ------------------------------------------------------------ nonlinearity


@dataclass(frozen=True)
class Nonlinearity:
    kind: str = "focusing"
    gamma: float = 1.0
    as_symmetric: bool = True
    evaluator: Callable[[float, Array, Array], Array] | None = None
    autonomous: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("focusing", "defocusing", "custom"):
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.kind == "custom" and self.evaluator is None:
            raise ValueError("custom nonlinearity needs an evaluator")

    @classmethod
    def zero(cls) -> "Nonlinearity":
        return cls("custom", 0.0, True, lambda t, r, u: np.zeros_like(u))

    def __call__(self, t: float, r: Array, u: Array) -> Array:
        if self.kind == "custom":
            assert self.evaluator is not None
            return np.asarray(self.evaluator(t, r, u), dtype=float)
        sign = 1.0 if self.kind == "focusing" else -1.0
        # blow-up is reported by the caller's finiteness check
        with np.errstate(over="ignore", invalid="ignore"):
            return sign * self.gamma * np.abs(u) ** (4.0 / 3.0) * u

    def check(self, rng: np.random.Generator | None = None, n: int = 256) -> dict[str, float]:
        """Probe the growth bound and, if flagged, the (AS) symmetries."""
        rng = rng or np.random.default_rng(0)
        t = rng.uniform(-5, 5, n)
        r = rng.uniform(0.1, 20, n)
        u = rng.normal(0, 2, n)
        f = np.array([self(ti, np.array([ri]), np.array([ui]))[0] for ti, ri, ui in zip(t, r, u)])
        bound = float(np.max(np.abs(f) - self.gamma * np.abs(u) ** (7 / 3)))
        out = {"bound_excess": bound}
        if self.as_symmetric:
            fm = np.array([self(-ti, np.array([ri]), np.array([ui]))[0] for ti, ri, ui in zip(t, r, u)])
            fo = np.array([self(ti, np.array([ri]), np.array([-ui]))[0] for ti, ri, ui in zip(t, r, u)])
            out["time_even_defect"] = float(np.max(np.abs(fm - f)))
            out["odd_defect"] = float(np.max(np.abs(fo + f)))
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "gamma": self.gamma,
            "as_symmetric": self.as_symmetric,
            "autonomous": self.autonomous,
        }


def cutoff(rho: Array, t: float, R: float, mask: str = "sharp", width: float = 0.25) -> Array:
    """chi_R on the slice t: 1 outside the cone r > R + |t| (boundary node included)."""
    edge = R + abs(t)
    if mask == "sharp":
        return (rho >= edge - _EPS).astype(float)
    if mask == "smooth":
        x = np.clip((rho - edge) / width, 0.0, 1.0)
        return x**3 * (10 - 15 * x + 6 * x * x)
    raise ValueError("mask must be 'sharp' or 'smooth'")


# ---------------------------------------------------------------- solution


@dataclass(eq=False)
class ExteriorSolution:
    R: float
    T: float
    dt: float
    r_grid: Array
    times: Array
    u: Array
    ut: Array
    ur: Array
    method: str = "duhamel"
    config: dict[str, Any] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    profile: RadialProfile | None = None
    accum_plus: tuple[Array, Array] | None = None
    accum_minus: tuple[Array, Array] | None = None
    accum_offset: int = 0
    source_profile_history: list[tuple[float, float, Array, Array]] = field(default_factory=list)
    step_times: Array | None = None
    lx_total: Array | None = None
    lx_linear: Array | None = None
    source_l2: Array | None = None
    charnums: tuple[float, float] | None = None

    @property
    def step(self) -> float:
        return float(self.r_grid[1] - self.r_grid[0])

    def time_index(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not a stored snapshot time")
        return k

    def exterior(self, t: float) -> Array:
        return self.r_grid >= self.R + abs(t) - _EPS

    @classmethod
    def from_field(
        cls,
        u_fn: Callable[[Array, float], Array],
        ut_fn: Callable[[Array, float], Array],
        ur_fn: Callable[[Array, float], Array],
        R: float,
        times: Array,
        r_grid: Array,
    ) -> "ExteriorSolution":
        """Wrap an analytic field (for anchors and tests)."""
        times = np.asarray(times, dtype=float)
        n = len(times)
        shape = (n, len(r_grid))
        u, ut, ur = np.full(shape, np.nan), np.full(shape, np.nan), np.full(shape, np.nan)
        for k, t in enumerate(times):
            ext = r_grid >= R + abs(t) - _EPS
            rr = r_grid[ext]
            u[k, ext], ut[k, ext], ur[k, ext] = u_fn(rr, t), ut_fn(rr, t), ur_fn(rr, t)
        T = float(np.max(np.abs(times))) if n else 0.0
        return cls(R, T, 0.0, np.asarray(r_grid, float), times, u, ut, ur, method="field")


def exterior_energy(sol: ExteriorSolution, t: float, *, closure: bool = True) -> float:
    """sigma4 * integral_{R+|t|}^inf (u_r^2 + u_t^2) rho^4 drho on the snapshot at t."""
    k = sol.time_index(t)
    ext = sol.exterior(t)
    r = sol.r_grid[ext]
    if r.size < 2:
        return 0.0
    ur, ut = sol.ur[k, ext], sol.ut[k, ext]
    dens = (ur**2 + ut**2) * r**4
    total = float(np.trapezoid(dens, r)) if hasattr(np, "trapezoid") else float(np.trapz(dens, r))
    lo = sol.R + abs(t)
    total += max(r[0] - lo, 0.0) * dens[0]
    if closure:
        u = sol.u[k, ext]
        total += 3.0 * u[-1] ** 2 * r[-1] ** 3 + ut[-1] ** 2 * r[-1] ** 5
    return SIGMA4 * total


def _lx_norm(r: Array, u: Array) -> float:
    """(integral |u|^{14/3} dx)^{1/2}, the L^{14/3} norm raised to 7/3."""
    if r.size < 2:
        return 0.0
    with np.errstate(over="ignore"):
        y = np.abs(u) ** (14 / 3) * r**4
    return math.sqrt(SIGMA4 * float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(r))))


def y_norm_tail(sol: ExteriorSolution, r: float, window: tuple[float, float] | None = None) -> float:
    """L^{7/3}_t L^{14/3}_x norm of u over {rho > r + |t|} on the stored snapshots.

    The global-in-time norm is truncated to the snapshot window (default
    [-T, T]).
    """
    if r < sol.R - _EPS:
        raise ValueError("r must be at least R")
    lo, hi = window if window is not None else (-np.inf, np.inf)
    sel = (sol.times >= lo - _EPS) & (sol.times <= hi + _EPS)
    ts = sol.times[sel]
    if ts.size < 2:
        return 0.0
    inner = []
    for k in np.nonzero(sel)[0]:
        t = sol.times[k]
        ext = sol.r_grid >= r + abs(t) - _EPS
        inner.append(_lx_norm(sol.r_grid[ext], sol.u[k, ext]))
    inner_a = np.array(inner)
    return float(np.sum(0.5 * (inner_a[1:] + inner_a[:-1]) * np.diff(ts))) ** (3 / 7)


# ------------------------------------------------------------ Duhamel march


class _IndexGrid:
    """Cells of the internal line grid s_j = j h, j = -J..J."""

    def __init__(self, J: int, h: float):
        self.J, self.h = J, h
        s = h * np.arange(-J, J + 1, dtype=float)
        sl, sr = s[:-1], s[1:]
        self.w1a = h / 6.0 * (2 * sl + sr)
        self.w1b = h / 6.0 * (sl + 2 * sr)
        self.ncell = 2 * J

    def cums(self, A: Array, B: Array) -> tuple[Array, Array]:
        c0 = np.empty(self.ncell + 1)
        c1 = np.empty(self.ncell + 1)
        c0[0] = c1[0] = 0.0
        np.cumsum(0.5 * self.h * (A + B), out=c0[1:])
        np.cumsum(self.w1a * A + self.w1b * B, out=c1[1:])
        return c0, c1

    @staticmethod
    def nodeval(A: Array, B: Array, idx: Array) -> Array:
        return 0.5 * (B[idx - 1] + A[idx])


def _embed_profile(G: RadialProfile, grid: _IndexGrid) -> tuple[Array, Array]:
    h = grid.h
    g = G.grid
    if abs(g.step - h) > 1e-12 * h or not g.zero_aligned:
        raise ValueError("profile grid must share the solver step and contain s = 0")
    a, b = G.cells()
    j0 = int(round(g.s_min / h))
    lo = grid.J + j0
    hi = lo + a.size
    A = np.zeros(grid.ncell)
    B = np.zeros(grid.ncell)
    clo, chi = max(lo, 0), min(hi, grid.ncell)
    A[clo:chi] = a[clo - lo : chi - lo]
    B[clo:chi] = b[clo - lo : chi - lo]
    return A, B


def _initial_profile(initial: RadialData | RadialProfile, r_max: float | None) -> tuple[RadialProfile, float, Array]:
    if isinstance(initial, RadialData):
        h = initial.step
        rg = initial.r_grid if r_max is None else radial_grid(r_max, h)
        return profile_from_data(initial), h, rg
    if isinstance(initial, RadialProfile):
        g = initial.grid
        h = g.step
        rm = r_max if r_max is not None else 2.0 * max(abs(g.s_min), abs(g.s_max))
        return initial, h, radial_grid(rm, h)
    raise TypeError("initial must be RadialData or RadialProfile")


def _slice_cells(f_nodes: Array, b: int, rho: Array, h: float) -> tuple[Array, Array, Array]:
    """Even profile of the data (0, f) as cells on [-N, N], plus node averages on [0, N].

    ``f_nodes`` holds f at rho_0 = 0, ..., rho_N; nodes below ``b`` are inside
    the cone (f = 0 there) and the cell just inside the boundary is skipped,
    so a sharp cut-off is integrated without smearing.
    """
    N = f_nodes.size - 1
    sf = rho * f_nodes
    cell = 0.5 * h * (sf[:-1] + sf[1:])
    cell[: b] = 0.0
    tail = np.zeros(N + 1)
    tail[:-1] = np.cumsum(cell[::-1])[::-1]
    V = 0.5 * (rho**2 * f_nodes - tail)
    c_in = -0.5 * tail[b]
    VL = V.copy()
    VR = V.copy()
    VL[: b + 1] = c_in
    VR[:b] = c_in
    A = np.concatenate((VL[1:][::-1], VR[:-1]))
    B = np.concatenate((VR[:-1][::-1], VL[1:]))
    mid = 0.5 * (VL + VR)
    return A, B, mid


def solve_exterior(
    initial: RadialData | RadialProfile,
    F: Nonlinearity,
    R: float,
    T: float,
    dt: float,
    *,
    mask: str = "sharp",
    mask_width: float = 0.25,
    r_max: float | None = None,
    snapshot_dt: float | None = None,
    picard_iters: int = 2,
    small_data_threshold: float | None = None,
    divergence_factor: float = 2.0,
    keep_history: bool = False,
) -> ExteriorSolution:
    """March u on the exterior cone for t in [-T, T].

    ``initial`` is either data (converted to its profile) or a profile used
    verbatim, which keeps jumps exact. ``dt`` must be a whole number of grid
    steps. ``picard_iters`` is accepted for configuration compatibility; the
    trapezoid scheme is explicit in u, so no sub-iteration is needed.
    """
    if R < 0 or T < 0:
        raise ValueError("R and T must be nonnegative")
    if picard_iters < 0:
        raise ValueError("picard_iters must be nonnegative")
    G0, h, rg = _initial_profile(initial, r_max)
    ratio = dt / h
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-9:
        raise ValueError("dt must be a positive whole multiple of the grid step")
    N = int(round(T / dt))
    if abs(N * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be a whole number of time steps")
    Nr = rg.size
    if R + T > rg[-1] - 2 * h:
        raise ValueError("the cone leaves the radial grid: increase r_max or reduce T")
    snap_dt = dt if snapshot_dt is None else snapshot_dt
    sk = int(round(snap_dt / dt))
    if sk < 1 or abs(snap_dt / dt - sk) > 1e-9:
        raise ValueError("snapshot_dt must be a whole multiple of dt")

    J = Nr + N * k + 2
    grid = _IndexGrid(J, h)
    baseA, baseB = _embed_profile(G0, grid)
    bc0, bc1 = grid.cums(baseA, baseB)
    rho = h * np.arange(Nr + 1, dtype=float)
    idx_r = np.arange(1, Nr + 1)

    snaps: dict[int, tuple[Array, Array, Array]] = {}
    lx_tot: dict[int, float] = {}
    lx_lin: dict[int, float] = {}
    src_l2: dict[int, float] = {}
    finals: dict[int, tuple[Array, Array]] = {}
    history: list[tuple[float, float, Array, Array]] = []

    for sgn in (1, -1):
        dts = sgn * dt
        QA = np.zeros(grid.ncell)
        QB = np.zeros(grid.ncell)
        for n in range(N + 1):
            t = sgn * n * dt
            m = sgn * n * k
            i0 = max(int(math.ceil((R + abs(t)) / h - _EPS)), 1) - 1
            ext = slice(i0, Nr)
            r = rg[ext]
            A = baseA + QA
            B = baseB + QB
            c0, c1 = grid.cums(A, B)
            jp = J + m + idx_r[ext]
            jm = J + m - idx_r[ext]
            D0 = c0[jp] - c0[jm]
            D1 = c1[jp] - c1[jm]
            u = (D1 - t * D0) / r**3
            gp = grid.nodeval(A, B, jp)
            gm = grid.nodeval(A, B, jm)
            ut = (r * (gp + gm) - D0) / r**3
            ur = -3.0 * u / r + (gp - gm) / r**2
            uL = ((bc1[jp] - bc1[jm]) - t * (bc0[jp] - bc0[jm])) / r**3
            if not np.all(np.isfinite(u)):
                raise DivergenceError(f"non-finite field at t = {t}")

            f = cutoff(r, t, R, mask, mask_width) * F(t, r, u)
            if not np.all(np.isfinite(f)):
                raise DivergenceError(f"non-finite source at t = {t}")
            f_nodes = np.zeros(Nr + 1)
            f_nodes[i0 + 1 :] = f
            SA, SB, smid = _slice_cells(f_nodes, i0 + 1, rho, h)
            if n > 0:
                # endpoint slice: enters u_t with half weight, not u
                pos_cells = 0.5 * h * (SA[Nr:] + SB[Nr:])
                half = 2.0 * np.cumsum(pos_cells)[i0:]
                ut = ut + 0.5 * dts * (2.0 * r * smid[i0 + 1 :] - half) / r**3

            lo = J + m - Nr
            w = 0.5 * dts if n in (0, N) else dts
            if n == N and n > 0:
                FA, FB = QA.copy(), QB.copy()
                FA[lo : lo + 2 * Nr] += 0.5 * dts * SA
                FB[lo : lo + 2 * Nr] += 0.5 * dts * SB
                finals[sgn] = (FA, FB)
            QA[lo : lo + 2 * Nr] += (0.5 * dts if n == 0 else dts) * SA
            QB[lo : lo + 2 * Nr] += (0.5 * dts if n == 0 else dts) * SB
            if keep_history:
                history.append((t, w, SA.copy(), SB.copy()))

            key = sgn * n
            if (n % sk == 0 or n == N) and not (sgn == -1 and n == 0):
                full_u = np.full(Nr, np.nan)
                full_ut = np.full(Nr, np.nan)
                full_ur = np.full(Nr, np.nan)
                full_u[ext], full_ut[ext], full_ur[ext] = u, ut, ur
                snaps[key] = (full_u, full_ut, full_ur)
            if not (sgn == -1 and n == 0):
                lx_tot[key] = _lx_norm(r, u)
                lx_lin[key] = _lx_norm(r, uL)
                with np.errstate(over="ignore"):
                    src_l2[key] = math.sqrt(SIGMA4 * float(np.sum(0.5 * h * ((f * r**2)[1:] ** 2 + (f * r**2)[:-1] ** 2))))
        if N == 0:
            finals[sgn] = (np.zeros(grid.ncell), np.zeros(grid.ncell))

    keys = sorted(snaps)
    times = np.array([kk * dt for kk in keys])
    u_arr = np.array([snaps[kk][0] for kk in keys])
    ut_arr = np.array([snaps[kk][1] for kk in keys])
    ur_arr = np.array([snaps[kk][2] for kk in keys])
    skeys = sorted(lx_tot)
    step_times = np.array([kk * dt for kk in skeys])
    lxt = np.array([lx_tot[kk] for kk in skeys])
    lxl = np.array([lx_lin[kk] for kk in skeys])
    fl2 = np.array([src_l2[kk] for kk in skeys])

    def ynorm(v: Array) -> float:
        if v.size < 2:
            return 0.0
        return float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(step_times))) ** (3 / 7)

    y_tot, y_lin = ynorm(lxt), ynorm(lxl)
    diag = {"y_total": y_tot, "y_linear": y_lin, "y_ratio": (y_tot / y_lin) if y_lin > 0 else 0.0}
    if small_data_threshold is not None and y_lin > small_data_threshold:
        warnings.warn(
            f"linear exterior Y size {y_lin:.3g} exceeds the small-data threshold {small_data_threshold:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    if y_lin > 0 and y_tot > divergence_factor * y_lin:
        raise DivergenceError(
            f"exterior Y norm grew by {y_tot / y_lin:.3g} (> {divergence_factor}); data are not small"
        )

    config = {
        "R": R,
        "T": T,
        "dt": dt,
        "step": h,
        "picard_iters": picard_iters,
        "mask": mask,
        "mask_width": mask_width,
        "r_max": float(rg[-1]),
        "snapshot_dt": snap_dt,
        "nonlinearity": F.to_dict(),
    }
    return ExteriorSolution(
        R=R,
        T=T,
        dt=dt,
        r_grid=rg,
        times=times,
        u=u_arr,
        ut=ut_arr,
        ur=ur_arr,
        method="duhamel",
        config=config,
        diagnostics=diag,
        profile=G0,
        accum_plus=finals[1],
        accum_minus=finals[-1],
        accum_offset=J,
        source_profile_history=history,
        step_times=step_times,
        lx_total=lxt,
        lx_linear=lxl,
        source_l2=fl2,
    )


def accumulated_profile(sol: ExteriorSolution, direction: int, grid: GridSpec) -> RadialProfile:
    """The accumulated Duhamel profile P at t = +T (direction 1) or -T (-1) on ``grid``."""
    acc = sol.accum_plus if direction > 0 else sol.accum_minus
    if acc is None:
        raise ValueError("solution carries no Duhamel accumulation")
    A, B = acc
    h = sol.step
    if abs(grid.step - h) > 1e-12 * h or not grid.zero_aligned:
        raise ValueError("grid must share the solver step and contain s = 0")
    j0 = int(round(grid.s_min / h)) + sol.accum_offset
    nc = grid.n - 1
    a = np.zeros(nc)
    b = np.zeros(nc)
    lo, hi = max(j0, 0), min(j0 + nc, A.size)
    a[lo - j0 : hi - j0] = A[lo:hi]
    b[lo - j0 : hi - j0] = B[lo:hi]
    return RadialProfile.from_cells(grid, a, b)


# -------------------------------------------------------------- FD oracle


def fd_oracle_solve(
    d: RadialData,
    F: Nonlinearity,
    R: float,
    T: float,
    dt: float,
    *,
    mask: str = "sharp",
    mask_width: float = 0.25,
    snapshot_dt: float | None = None,
) -> ExteriorSolution:
    """Leapfrog for u_tt = u_rr + (4/r) u_r + chi_R F on [0, r_max].

    Conservative radial Laplacian, the limit 5 u_rr at the origin, and an
    outgoing condition (r^2 u)_t + (r^2 u)_r = 0 at r_max. Results are kept
    only on the exterior cone.
    """
    h = d.step
    if dt > h * (1 + 1e-12):
        raise ValueError("CFL violated: dt must not exceed the grid step")
    N = int(round(T / dt))
    if abs(N * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be a whole number of time steps")
    snap_dt = dt if snapshot_dt is None else snapshot_dt
    sk = int(round(snap_dt / dt))
    if sk < 1 or abs(snap_dt / dt - sk) > 1e-9:
        raise ValueError("snapshot_dt must be a whole multiple of dt")
    rg = d.r_grid
    Nr = rg.size
    r = np.concatenate(([0.0], rg))
    wp = np.zeros(Nr + 1)
    wm = np.zeros(Nr + 1)
    wp[1:] = ((r[1:] + 0.5 * h) / r[1:]) ** 4
    wm[1:] = ((r[1:] - 0.5 * h) / r[1:]) ** 4
    lam = dt / h

    def lap(u: Array) -> Array:
        out = np.zeros_like(u)
        out[0] = 10.0 * (u[1] - u[0]) / h**2
        out[1:-1] = (wp[1:-1] * (u[2:] - u[1:-1]) - wm[1:-1] * (u[1:-1] - u[:-2])) / h**2
        return out

    def with_origin(v: Array) -> Array:
        return np.concatenate(([(4 * v[0] - v[1]) / 3.0], v))

    def run(u0: Array, u1: Array, sgn: int) -> dict[int, tuple[Array, Array]]:
        def src(n: int, u: Array) -> Array:
            t = sgn * n * dt
            return cutoff(r, t, R, mask, mask_width) * F(t, r, u)

        prev = u0.copy()
        cur = u0 + dt * u1 + 0.5 * dt * dt * (lap(u0) + src(0, u0))
        cur[-1] = _outgoing(prev, r, lam)
        levels = {0: prev, 1: cur}
        out: dict[int, tuple[Array, Array]] = {0: (u0, u1)}
        for n in range(1, N + 1):
            nxt = 2 * cur - prev + dt * dt * (lap(cur) + src(n, cur))
            nxt[-1] = _outgoing(cur, r, lam)
            if not np.all(np.isfinite(nxt)):
                raise DivergenceError("leapfrog produced non-finite values")
            if n % sk == 0:
                out[n] = (cur, (nxt - prev) / (2 * dt))
            prev, cur = cur, nxt
            levels[n + 1] = cur
        return out

    u0 = with_origin(d.u0)
    u1 = with_origin(d.u1)
    fwd = run(u0, u1, 1)
    bwd = run(u0, -u1, -1)
    keys = sorted(set(fwd) | {-k for k in bwd})
    times, U, UT, UR = [], [], [], []
    for kk in keys:
        if kk >= 0:
            uu, vv = fwd[kk]
        else:
            uu, vv = bwd[-kk]
            vv = -vv
        t = kk * dt
        ext = rg >= R + abs(t) - _EPS
        du = np.gradient(uu, h, edge_order=2)[1:]
        fu = np.full(Nr, np.nan)
        fv = np.full(Nr, np.nan)
        fr = np.full(Nr, np.nan)
        fu[ext], fv[ext], fr[ext] = uu[1:][ext], vv[1:][ext], du[ext]
        times.append(t)
        U.append(fu)
        UT.append(fv)
        UR.append(fr)
    config = {
        "R": R,
        "T": T,
        "dt": dt,
        "step": h,
        "mask": mask,
        "mask_width": mask_width,
        "snapshot_dt": snap_dt,
        "nonlinearity": F.to_dict(),
    }
    return ExteriorSolution(
        R=R,
        T=T,
        dt=dt,
        r_grid=rg,
        times=np.array(times),
        u=np.array(U),
        ut=np.array(UT),
        ur=np.array(UR),
        method="fd",
        config=config,
    )


def _outgoing(u: Array, r: Array, lam: float) -> float:
    """Upwind update of v = r^2 u at the last node for v_t + v_r = 0."""
    v_last = r[-1] ** 2 * u[-1]
    v_prev = r[-2] ** 2 * u[-2]
    return (v_last - lam * (v_last - v_prev)) / r[-1] ** 2


def snapshot_csv_columns(sol: ExteriorSolution) -> tuple[list[str], list[Array]]:
    """Columns t, r, u, ut over every stored exterior node."""
    tt, rr, uu, vv = [], [], [], []
    for k, t in enumerate(sol.times):
        ext = sol.exterior(t)
        n = int(np.count_nonzero(ext))
        tt.append(np.full(n, t))
        rr.append(sol.r_grid[ext])
        uu.append(sol.u[k, ext])
        vv.append(sol.ut[k, ext])
    cat = np.concatenate
    return ["t", "r", "u", "ut"], [cat(tt), cat(rr), cat(uu), cat(vv)]
