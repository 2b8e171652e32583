"""Contraction-mapping constructions of weakly non-radiative solutions.

An unknown tail profile G (supported on |s| > R) is extended across [-R, R]
so that its moments take the prescribed values, the globally cut-off
equation is solved from the extended profile, and the tail is replaced by
the scattering profiles of the Duhamel part:

    (T G)(s) = -P_{-T}(s)   for s > R,
    (T G)(s) = -P_{+T}(s)   for s < -R,

where P_{+-T} is the accumulated Duhamel profile at t = +-T. A fixed point
makes the total outgoing profile vanish on both sides of the cone, which is
the non-radiative condition. Source slices at time t' only feed profile
values at |s| >= R + 2|t'|, so T = S/2 reproduces every profile value on the
grid [-S, S] with no time truncation.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .extsolve import (
    ExteriorSolution,
    Nonlinearity,
    accumulated_profile,
    exterior_energy,
    solve_exterior,
)
from .freewave import evolve_free_all
from .grid_profile import (
    Array,
    GridDomainError,
    GridSpec,
    RadialProfile,
    l2_norm,
    l2_tail_many,
    moment0,
    moment1,
    split_at,
    weighted_distance,
)


class NonContractionError(RuntimeError):
    """The fixed-point iteration failed to contract."""


class ExtractionError(RuntimeError):
    """Scattering-profile extraction methods disagree."""


@dataclass(frozen=True)
class FixpointConfig:
    alpha: float
    beta: float = 0.0
    R: float | None = None
    c: float = 32.0
    tol: float = 1e-10
    max_iters: int = 40
    T_extract: float | None = None
    step: float = 1 / 16
    s_max: float = 32.0
    r_max: float | None = None
    mask: str = "sharp"
    mask_width: float = 0.25
    fill: str = "affine"
    r_snap: float = 0.125
    snapshot_dt: float = 0.25
    divergence_factor: float = 2.0
    extract_tol: float | None = None

    def __post_init__(self) -> None:
        if self.c <= 0 or self.tol <= 0 or self.step <= 0 or self.s_max <= 0:
            raise ValueError("c, tol, step and s_max must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.fill not in ("affine", "parabolic"):
            raise ValueError("fill must be 'affine' or 'parabolic'")
        if self.R is not None and self.R <= 0:
            raise ValueError("R must be positive")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(-self.s_max, self.s_max, self.step)

    @property
    def horizon(self) -> float:
        return self.T_extract if self.T_extract is not None else 0.5 * self.s_max

    @property
    def radial_max(self) -> float:
        return self.r_max if self.r_max is not None else self.s_max + self.horizon

    def radius(self, order: str) -> float:
        """Exterior radius: the recipe value snapped up to a multiple of r_snap."""
        if self.R is not None:
            raw = self.R
        elif order == "first":
            raw = self.c**1.5 * self.alpha**2
        else:
            raw = max(self.c**1.5 * self.alpha**2, self.c**0.5 * abs(self.beta) ** (2 / 3))
        snap = self.r_snap
        return max(snap, math.ceil(raw / snap - 1e-9) * snap)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# ---------------------------------------------------------------- fills


def _fill_basis(kind: str, R: float) -> tuple[Any, Any, float, float]:
    """Even and odd fill shapes with their analytic moments on [-R, R]."""
    if kind == "affine":
        return (lambda s: np.ones_like(s)), (lambda s: s), 2 * R, 2 * R**3 / 3
    return (
        (lambda s: 1 - (s / R) ** 2),
        (lambda s: s * (1 - (s / R) ** 2)),
        4 * R / 3,
        4 * R**3 / 15,
    )


def _with_fill(tail: RadialProfile, R: float, fn) -> RadialProfile:
    g = tail.grid
    s = g.nodes
    ip, im = g.node_index(R), g.node_index(-R)
    if ip is None or im is None:
        raise GridDomainError(f"R = {R} must be a grid node")
    v, lft, rgt = tail.values.copy(), tail.left.copy(), tail.right.copy()
    inside = np.abs(s) < R - 1e-9 * g.step
    fv = fn(s[inside])
    v[inside] = lft[inside] = rgt[inside] = fv
    lft[ip] = float(fn(np.array([R]))[0])
    rgt[im] = float(fn(np.array([-R]))[0])
    v[ip] = 0.5 * (lft[ip] + rgt[ip])
    v[im] = 0.5 * (lft[im] + rgt[im])
    return RadialProfile(g, v, lft, rgt)


def _outer(G: RadialProfile, R: float) -> RadialProfile:
    if R >= max(abs(G.grid.s_min), G.grid.s_max):
        return RadialProfile.zeros(G.grid)
    return split_at(G, R)[1]


def extend_profile(
    G_tail: RadialProfile,
    R: float,
    *,
    m0: float,
    m1: float | None = None,
    fill: str = "affine",
    exact_moments: bool = True,
) -> RadialProfile:
    """Fill [-R, R] so that the full-line moments become (m0, m1).

    With ``m1`` None only the even shape is used. ``exact_moments`` solves the
    constraints with the quadrature moments of the fill (so they hold to round
    off); otherwise the analytic moments of the shapes are used.
    """
    if not R > 0:
        raise GridDomainError("R must be positive")
    tail = _outer(G_tail, R)
    e0, e1, a0, a1 = _fill_basis(fill, R)
    zero = RadialProfile.zeros(tail.grid)
    if exact_moments:
        a0 = moment0(_with_fill(zero, R, e0))
        if m1 is not None:
            a1 = moment1(_with_fill(zero, R, e1))
    a = (m0 - moment0(tail)) / a0
    if m1 is None:
        return _with_fill(tail, R, lambda s: a * e0(s))
    b = (m1 - moment1(tail)) / a1
    return _with_fill(tail, R, lambda s: a * e0(s) + b * e1(s))


def extend_profile_first(G_tail: RadialProfile, alpha: float, R: float, fill: str = "affine") -> RadialProfile:
    """Tail plus an interior fill making the total integral -alpha."""
    return extend_profile(G_tail, R, m0=-alpha, fill=fill, exact_moments=(fill == "affine"))


def extend_profile_second(G_tail: RadialProfile, beta: float, R: float, fill: str = "affine") -> RadialProfile:
    """Tail plus a fill making the integral 0 and the first moment beta."""
    return extend_profile(G_tail, R, m0=0.0, m1=beta, fill=fill, exact_moments=(fill == "affine"))


# ------------------------------------------------------------ extraction


@dataclass
class ScatterProfiles:
    Gplus: RadialProfile
    Gminus: RadialProfile
    disagreement: float
    window: tuple[float, float]
    norm_bound_constant: float | None = None

    def __iter__(self):
        yield self.Gplus
        yield self.Gminus


def extract_scatter_profiles(
    sol: ExteriorSolution,
    grid: GridSpec,
    *,
    tol: float | None = None,
    P_ref: tuple[RadialProfile, RadialProfile] | None = None,
) -> ScatterProfiles:
    """Scattering profiles of the Duhamel part of ``sol``.

    Primary: G^+(s) = P_{+T}(-s) and G^-(s) = P_{-T}(s) from the exact
    accumulation. Cross-check: r^2 times the Duhamel part of u_t at t = +-T,
    read along s = r - T, against G^+ and G^- on s > R. The reported
    disagreement is the larger relative L^2 mismatch of the two sides.
    """
    Pp = accumulated_profile(sol, 1, grid)
    Pm = accumulated_profile(sol, -1, grid)
    Gplus = Pp.reflect()
    Gminus = Pm
    T, R = sol.T, sol.R
    worst = 0.0
    window = (R, float(sol.r_grid[-1] - T))
    if T > 0 and sol.profile is not None:
        for sgn, Gs in ((1, Gplus), (-1, Gminus)):
            t = sgn * T
            k = sol.time_index(t)
            ext = sol.exterior(t)
            r = sol.r_grid[ext]
            _, utL, _ = evolve_free_all(sol.profile, r, t)
            samp = r**2 * (sol.ut[k, ext] - utL)
            sig = r - T
            keep = (sig >= grid.s_min) & (sig <= grid.s_max)
            exact = Gs(sig[keep])
            den = math.sqrt(float(np.sum(exact**2)))
            num = math.sqrt(float(np.sum((samp[keep] - exact) ** 2)))
            if den > 0:
                worst = max(worst, num / den)
            elif num > 0:
                worst = math.inf
    C = None
    if sol.source_l2 is not None and sol.step_times is not None:
        back = sol.step_times <= 1e-12
        ts, fl = sol.step_times[back], sol.source_l2[back]
        z = float(np.sum(0.5 * (fl[1:] + fl[:-1]) * np.diff(ts))) if ts.size > 1 else 0.0
        if z > 0:
            C = _half_line_l2(Gminus, max(R, grid.step)) / z
    if tol is not None and worst > tol:
        raise ExtractionError(f"extraction methods disagree by {worst:.3g} (> {tol}); increase T_extract")
    return ScatterProfiles(Gplus, Gminus, worst, window, C)


def _half_line_l2(G: RadialProfile, R: float) -> float:
    """||G||_{L^2([R, inf))}."""
    out = _outer(G, R)
    pos = out.grid.nodes > 0
    half = RadialProfile(out.grid, out.values * pos, out.left * pos, out.right * pos)
    return l2_norm(half)


# ------------------------------------------------------------- reference


@dataclass(frozen=True)
class Reference:
    """The first-order solution u^alpha that second characteristic numbers are measured against."""

    alpha: float
    R: float
    G_alpha: RadialProfile
    P_plus: RadialProfile
    P_minus: RadialProfile
    run_id: str
    config: dict[str, Any] = field(default_factory=dict)


def run_id(cfg: FixpointConfig, order: str, F: Nonlinearity) -> str:
    blob = json.dumps({"cfg": cfg.to_dict(), "order": order, "F": F.to_dict()}, sort_keys=True)
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


# ------------------------------------------------------------- the map


def _tail_map(Pp: RadialProfile, Pm: RadialProfile, R: float) -> RadialProfile:
    g = Pp.grid
    s = g.nodes
    tol = 1e-9 * g.step
    v = np.zeros(g.n)
    lft = np.zeros(g.n)
    rgt = np.zeros(g.n)
    hi = s > R + tol
    lo = s < -R - tol
    v[hi], lft[hi], rgt[hi] = -Pm.values[hi], -Pm.left[hi], -Pm.right[hi]
    v[lo], lft[lo], rgt[lo] = -Pp.values[lo], -Pp.left[lo], -Pp.right[lo]
    ip, im = g.node_index(R), g.node_index(-R)
    if ip is not None:
        rgt[ip] = -Pm.right[ip]
        v[ip] = 0.5 * rgt[ip]
    if im is not None:
        lft[im] = -Pp.left[im]
        v[im] = 0.5 * lft[im]
    return RadialProfile(g, v, lft, rgt)


def _full_profile(G_tail: RadialProfile, cfg: FixpointConfig, order: str, ref: Reference | None) -> RadialProfile:
    R = cfg.radius(order)
    if order == "first":
        return extend_profile_first(G_tail, cfg.alpha, R, cfg.fill)
    assert ref is not None
    return extend_profile_second(G_tail, cfg.beta, R, cfg.fill) + ref.G_alpha


def apply_T(
    G_tail: RadialProfile,
    cfg: FixpointConfig,
    F: Nonlinearity,
    order: str = "first",
    reference: Reference | None = None,
) -> tuple[RadialProfile, ExteriorSolution]:
    """One application of the tail map; returns (T G, solution built from G)."""
    if order not in ("first", "second"):
        raise ValueError("order must be 'first' or 'second'")
    if order == "second" and reference is None:
        raise ValueError("second-order map needs a reference solution")
    R = cfg.radius(order)
    full = _full_profile(G_tail, cfg, order, reference)
    sol = solve_exterior(
        full,
        F,
        R,
        cfg.horizon,
        cfg.step,
        mask=cfg.mask,
        mask_width=cfg.mask_width,
        r_max=cfg.radial_max,
        snapshot_dt=cfg.snapshot_dt,
        divergence_factor=cfg.divergence_factor,
    )
    Pp = accumulated_profile(sol, 1, cfg.grid)
    Pm = accumulated_profile(sol, -1, cfg.grid)
    if order == "second":
        assert reference is not None
        Pp = Pp - reference.P_plus
        Pm = Pm - reference.P_minus
    return _tail_map(Pp, Pm, R), sol


@dataclass
class FixpointResult:
    G_star: RadialProfile
    G_tail: RadialProfile
    sol: ExteriorSolution
    order: str
    R: float
    config: FixpointConfig
    iters: int
    distances: list[float]
    ratios: list[float]
    tail_norms: list[float]
    energy_trace: list[tuple[float, float, float]]
    iterates: list[RadialProfile] = field(default_factory=list)
    reference: Reference | None = None
    run_id: str = ""

    @property
    def energy_decreasing(self) -> bool:
        e_plus = [e for _, e, _ in self.energy_trace]
        e_minus = [e for _, _, e in self.energy_trace]
        return all(np.diff(e_plus) < 0) and all(np.diff(e_minus) < 0)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    def as_reference(self) -> Reference:
        if self.order != "first":
            raise ValueError("only first-order runs can serve as reference")
        g = self.config.grid
        return Reference(
            alpha=self.config.alpha,
            R=self.R,
            G_alpha=self.G_star,
            P_plus=accumulated_profile(self.sol, 1, g),
            P_minus=accumulated_profile(self.sol, -1, g),
            run_id=self.run_id,
            config=self.config.to_dict(),
        )

    def record(self) -> dict[str, Any]:
        return {
            "alpha": self.config.alpha,
            "beta": self.config.beta if self.order == "second" else None,
            "order": self.order,
            "R": self.R,
            "c": self.config.c,
            "iters": self.iters,
            "ratios": self.ratios,
            "distances": self.distances,
            "tail_norms": self.tail_norms,
            "energy_trace": [list(e) for e in self.energy_trace],
            "horizon": self.config.horizon,
            "run_id": self.run_id,
            "reference_id": self.reference.run_id if self.reference else None,
            "config": self.config.to_dict(),
        }


def iterate_to_fixed_point(
    cfg: FixpointConfig,
    F: Nonlinearity,
    order: str = "first",
    reference: Reference | None = None,
    *,
    keep_iterates: bool = False,
) -> FixpointResult:
    """Iterate G_{k+1} = T G_k from G_0 = 0 until the weighted step is below tol.

    A second-order run without an explicit reference first builds u^alpha
    with the same configuration.
    """
    if order == "second" and reference is None:
        ref_cfg = FixpointConfig(**{**cfg.to_dict(), "beta": 0.0, "R": cfg.R, "fill": "affine"})
        reference = iterate_to_fixed_point(ref_cfg, F, "first").as_reference()
    if order == "second":
        assert reference is not None
        if abs(reference.alpha - cfg.alpha) > 1e-12 or reference.config.get("step") != cfg.step:
            raise ValueError("reference run does not match alpha or grid")
    R = cfg.radius(order)
    grid = cfg.grid
    G = RadialProfile.zeros(grid)
    distances: list[float] = []
    ratios: list[float] = []
    tails: list[float] = []
    iterates: list[RadialProfile] = []
    sol = None
    for k in range(cfg.max_iters):
        TG, sol = apply_T(G, cfg, F, order, reference)
        d = weighted_distance(TG, G, R)
        distances.append(d)
        tails.append(float(l2_tail_many(TG, [R])[0]))
        if keep_iterates:
            iterates.append(TG)
        if len(distances) > 1 and distances[-2] > 0:
            ratios.append(d / distances[-2])
            if ratios[-1] >= 1 and d >= cfg.tol:
                raise NonContractionError(
                    f"contraction ratio {ratios[-1]:.3g} at iteration {k}; increase c (R = {R})"
                )
        G = TG
        if d < cfg.tol:
            break
    else:
        raise NonContractionError(f"no convergence in {cfg.max_iters} iterations (last step {distances[-1]:.3g})")
    assert sol is not None
    G_star = _full_profile(G, cfg, order, reference)
    trace = []
    for t in sol.times:
        if t < -1e-12:
            continue
        trace.append((float(t), exterior_energy(sol, t), exterior_energy(sol, -t)))
    return FixpointResult(
        G_star=G_star,
        G_tail=G,
        sol=sol,
        order=order,
        R=R,
        config=cfg,
        iters=len(distances),
        distances=distances,
        ratios=ratios,
        tail_norms=tails,
        energy_trace=trace,
        iterates=iterates,
        reference=reference,
        run_id=run_id(cfg, order, F),
    )
