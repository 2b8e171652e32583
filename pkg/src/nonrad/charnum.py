"""First and second characteristic numbers.

alpha = -integral G and beta = integral s (G - G_alpha) for full-line
profiles. From exterior data alone the same numbers follow from the interior
moment identities

    integral_{-rho}^{rho} G    = rho (G(rho) + G(-rho)) - rho^3 u1(rho),
    integral_{-rho}^{rho} s G  = rho^3 u0(rho),

plus the profile tails on |s| > rho, which exterior data determine.
Least-squares fits of the r^{-3} asymptotics are kept as cross-checks; they
carry a bias from the slowly decaying corrections.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Mapping

import numpy as np
import numpy.typing as npt

from .freewave import RadialData, profile_from_data
from .grid_profile import SIGMA4, Array, GridDomainError, GridSpec, RadialProfile, moment0, moment1


class ConvergenceError(RuntimeError):
    """A limiting procedure did not stabilise."""


class ReferenceMismatchError(ValueError):
    """Second characteristic numbers measured against different references."""


@dataclass(frozen=True)
class CharNumbers:
    alpha: float
    beta: float
    method: str
    fit_window: tuple[float, float] | None = None
    residual: float = 0.0
    reference_id: str | None = None

    def __post_init__(self) -> None:
        if self.method not in ("integral", "principal_value", "asymptotic_fit", "exterior"):
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["window"] = out.pop("fit_window")
        return out


def compare_beta(a: CharNumbers, b: CharNumbers) -> float:
    """beta difference, refusing numbers taken against different references."""
    if a.reference_id != b.reference_id:
        raise ReferenceMismatchError(f"references differ: {a.reference_id} vs {b.reference_id}")
    return a.beta - b.beta


# ------------------------------------------------------------ profiles


def alpha_of(G: RadialProfile) -> float:
    return -moment0(G)


def beta_relative(G: RadialProfile, G_ref: RadialProfile, atol: float = 1e-8) -> float:
    a, a_ref = alpha_of(G), alpha_of(G_ref)
    if abs(a - a_ref) > atol * max(1.0, abs(a_ref)):
        raise GridDomainError(f"first characteristic numbers differ ({a} vs {a_ref})")
    return moment1(G - G_ref)


def pv_truncations(G: RadialProfile, radii: npt.ArrayLike) -> Array:
    return np.array([moment1(G, -r, r) for r in np.asarray(radii, dtype=float)])


def beta_pv(G: RadialProfile, tol: float = 1e-6, r0: float = 1.0, ratio: float = math.sqrt(2)) -> tuple[float, float]:
    """Principal value of integral s G(s) ds over geometric truncations.

    Returns (value, tail estimate). Stops once the last three truncations
    agree within ``tol``; raises ConvergenceError when the grid runs out.
    """
    top = min(abs(G.grid.s_min), G.grid.s_max)
    radii = [r0]
    while radii[-1] * ratio <= top:
        radii.append(radii[-1] * ratio)
    radii.append(top)
    vals = pv_truncations(G, radii)
    for k in range(2, len(vals)):
        w = vals[k - 2 : k + 1]
        if np.ptp(w) <= tol:
            return float(vals[k]), float(np.ptp(w))
    raise ConvergenceError(f"p.v. truncations still move by {np.ptp(vals[-3:]):.3g} at r = {top}")


# ---------------------------------------------------------- exterior data


def _exterior_profile(d: RadialData, rho: float, grid: GridSpec | None) -> RadialProfile:
    if grid is None:
        grid = GridSpec(-d.r_max, d.r_max, d.step)
    return profile_from_data(d, grid, r_min=rho)


def _node(d: RadialData, rho: float) -> int:
    k = int(np.argmin(np.abs(d.r_grid - rho)))
    if abs(d.r_grid[k] - rho) > 1e-9 * d.step:
        raise GridDomainError("rho must be a radial grid node")
    return k


def full_moments_from_exterior(d: RadialData, rho: float, grid: GridSpec | None = None) -> tuple[float, float]:
    """(integral G, integral s G) of the data's profile using only r >= rho."""
    k = _node(d, rho)
    G = _exterior_profile(d, rho, grid)
    gp = float(G(np.array([rho]))[0])
    gm = float(G(np.array([-rho]))[0])
    s0, s1 = G.grid.s_min, G.grid.s_max
    tail0 = moment0(G, rho, s1) + moment0(G, s0, -rho)
    tail1 = moment1(G, rho, s1) + moment1(G, s0, -rho)
    inner0 = rho * (gp + gm) - rho**3 * d.u1[k]
    inner1 = rho**3 * d.u0[k]
    return inner0 + tail0, inner1 + tail1


def alpha_exterior(d: RadialData, rho: float, grid: GridSpec | None = None) -> float:
    return -full_moments_from_exterior(d, rho, grid)[0]


def beta_exterior(
    d: RadialData, rho: float, G_ref: RadialProfile, grid: GridSpec | None = None, atol: float = 1e-3
) -> float:
    """beta of exterior data relative to the full-line reference profile G_ref."""
    m0, m1 = full_moments_from_exterior(d, rho, grid)
    if abs(-m0 - alpha_of(G_ref)) > atol * max(1.0, abs(alpha_of(G_ref))):
        raise GridDomainError(f"first characteristic numbers differ ({-m0} vs {alpha_of(G_ref)})")
    return m1 - moment1(G_ref)


def charnums_exterior(
    d: RadialData, rho: float, G_ref: RadialProfile | None = None, reference_id: str | None = None
) -> CharNumbers:
    m0, m1 = full_moments_from_exterior(d, rho)
    beta = m1 - (moment1(G_ref) if G_ref is not None else 0.0)
    return CharNumbers(-m0, beta, "exterior", (rho, d.r_max), 0.0, reference_id)


# ------------------------------------------------------------------ fits


def _window(d: RadialData, window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    if not (d.r_grid[0] <= lo < hi <= d.r_max + 1e-12):
        raise GridDomainError("fit window must lie inside the radial grid")
    sel = (d.r_grid >= lo - 1e-12) & (d.r_grid <= hi + 1e-12)
    if np.count_nonzero(sel) < 3:
        raise GridDomainError("fit window holds fewer than three nodes")
    return sel


def _trap(y: Array, x: Array) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def alpha_fit(d: RadialData, window: tuple[float, float]) -> tuple[float, float]:
    """r^4-weighted least squares of u1 against alpha r^{-3}."""
    sel = _window(d, window)
    r, u1 = d.r_grid[sel], d.u1[sel]
    alpha = _trap(u1 * r, r) / _trap(r**-2, r)
    res = math.sqrt(SIGMA4 * _trap((u1 - alpha * r**-3) ** 2 * r**4, r))
    return alpha, res


def beta_fit(d: RadialData, d_ref: RadialData, window: tuple[float, float]) -> tuple[float, float]:
    """H^1-weighted least squares of u0 - u0_ref against beta r^{-3}."""
    if d.r_grid.shape != d_ref.r_grid.shape or not np.allclose(d.r_grid, d_ref.r_grid):
        raise GridDomainError("data and reference must share the radial grid")
    sel = _window(d, window)
    r = d.r_grid[sel]
    w = d.u0[sel] - d_ref.u0[sel]
    dw = np.gradient(w, d.step, edge_order=2)
    beta = -_trap(dw, r) / (3.0 * _trap(r**-4, r))
    v = d.u1[sel] - d_ref.u1[sel]
    res = math.sqrt(SIGMA4 * _trap(((dw + 3 * beta * r**-4) ** 2 + v**2) * r**4, r))
    return beta, res


def default_window(support_radius: float, r_max: float) -> tuple[float, float]:
    return 2.0 * support_radius, 0.5 * r_max


def decay_rate_fit(values: Mapping[float, float] | tuple[npt.ArrayLike, npt.ArrayLike]) -> float:
    """Least-squares slope of log(norm) against log(r)."""
    if isinstance(values, Mapping):
        r = np.array(list(values.keys()), dtype=float)
        v = np.array(list(values.values()), dtype=float)
    else:
        r, v = (np.asarray(a, dtype=float) for a in values)
    if r.size < 5:
        raise ValueError("need at least five sample radii")
    if np.any(r <= 0) or np.any(v <= 0):
        raise GridDomainError("radii and norms must be positive")
    if r.max() / r.min() < 10 * (1 - 1e-9):
        raise ValueError("sample radii must span a decade")
    return float(np.polyfit(np.log(r), np.log(v), 1)[0])
