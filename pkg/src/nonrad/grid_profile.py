"""Radiation profiles G(s) on a uniform line grid and their weighted norms.

A profile is stored as node samples with a piecewise-linear reconstruction
between nodes. Jumps are allowed at nodes: each node carries a left limit and
a right limit (equal for continuous profiles), and ``values`` holds the node
sample (the average of the two limits at a jump). Every quadrature runs cell
by cell on the reconstruction, so a box whose edges sit on nodes integrates
exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
import numpy.typing as npt

Array = npt.NDArray[np.float64]

SIGMA4 = 8.0 * math.pi**2 / 3.0
"""Surface area of the unit sphere S^4 in R^5."""

_NODE_TOL = 1e-9


class GridDomainError(ValueError):
    """A requested interval or shift leaves the grid."""


@dataclass(frozen=True)
class GridSpec:
    s_min: float = -64.0
    s_max: float = 64.0
    step: float = 2.0**-7
    sigma4: float = SIGMA4

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.s_min < self.s_max:
            raise ValueError("s_min must be below s_max")
        ncell = (self.s_max - self.s_min) / self.step
        if abs(ncell - round(ncell)) > 1e-6 * max(1.0, ncell):
            raise ValueError("grid extent is not a whole number of steps")
        if abs(self.sigma4 - SIGMA4) > 1e-12 * SIGMA4:
            raise ValueError("sigma4 must equal 8 pi^2 / 3")

    @classmethod
    def symmetric(cls, half_width: float, step: float) -> "GridSpec":
        return cls(-half_width, half_width, step)

    @property
    def n(self) -> int:
        return int(round((self.s_max - self.s_min) / self.step)) + 1

    @property
    def nodes(self) -> Array:
        return self.s_min + self.step * np.arange(self.n, dtype=float)

    @property
    def zero_aligned(self) -> bool:
        k = self.s_min / self.step
        return abs(k - round(k)) < _NODE_TOL * max(1.0, abs(k))

    def node_index(self, s: float) -> int | None:
        """Index of the node at ``s`` or None if ``s`` is not a node."""
        k = (s - self.s_min) / self.step
        kr = int(round(k))
        if abs(k - kr) < 1e-7 and 0 <= kr < self.n:
            return kr
        return None

    def to_dict(self) -> dict:
        return {"s_min": self.s_min, "s_max": self.s_max, "step": self.step}


def _frozen(a: Array) -> Array:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadialProfile:
    grid: GridSpec
    values: Array
    left: Array | None = field(default=None)
    right: Array | None = field(default=None)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got {vals.shape}")
        left = vals if self.left is None else np.asarray(self.left, dtype=float)
        right = vals if self.right is None else np.asarray(self.right, dtype=float)
        for a in (vals, left, right):
            if a.shape != vals.shape:
                raise ValueError("limit arrays must match values")
            if not np.all(np.isfinite(a)):
                raise ValueError("profile samples must be finite")
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "left", _frozen(left))
        object.__setattr__(self, "right", _frozen(right))

    # construction helpers
    @classmethod
    def zeros(cls, grid: GridSpec) -> "RadialProfile":
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def from_function(
        cls,
        grid: GridSpec,
        fn: Callable[[Array], Array],
        jumps: Iterable[float] = (),
    ) -> "RadialProfile":
        """Sample ``fn``; at each jump location (must be a node) store both limits."""
        s = grid.nodes
        vals = np.asarray(fn(s), dtype=float) * np.ones_like(s)
        left = vals.copy()
        right = vals.copy()
        eps = 1e-7 * grid.step
        for x in jumps:
            k = grid.node_index(x)
            if k is None:
                continue
            lo = float(np.asarray(fn(np.array([s[k] - eps])))[0])
            hi = float(np.asarray(fn(np.array([s[k] + eps])))[0])
            left[k], right[k] = lo, hi
            vals[k] = 0.5 * (lo + hi)
        return cls(grid, vals, left, right)

    @classmethod
    def indicator(
        cls, grid: GridSpec, a: float, b: float, weight: Callable[[Array], Array] | None = None
    ) -> "RadialProfile":
        """weight(s) on [a, b], zero elsewhere, with jumps at a and b."""
        w = weight if weight is not None else (lambda s: np.ones_like(s))

        s = grid.nodes
        tol = _NODE_TOL * grid.step
        inside = (s > a + tol) & (s < b - tol)
        ws = np.asarray(w(s), dtype=float) * np.ones_like(s)
        vals = np.where(inside, ws, 0.0)
        left, right = vals.copy(), vals.copy()
        ka, kb = grid.node_index(a), grid.node_index(b)
        if ka is not None:
            right[ka] = ws[ka]
        if kb is not None:
            left[kb] = ws[kb]
        if ka is None or kb is None:
            # an end off the grid nodes: fall back to sampling
            def fn(x: Array) -> Array:
                return np.where((x > a) & (x < b), w(x), 0.0)

            return cls.from_function(grid, fn, jumps=(a, b))
        return cls(grid, 0.5 * (left + right), left, right)

    @classmethod
    def from_cells(cls, grid: GridSpec, a: Array, b: Array) -> "RadialProfile":
        """Build from per-cell end values (a: left end, b: right end)."""
        n = grid.n
        right = np.empty(n)
        left = np.empty(n)
        right[:-1] = a
        right[-1] = b[-1]
        left[1:] = b
        left[0] = a[0]
        return cls(grid, 0.5 * (left + right), left, right)

    # reconstruction
    def cells(self) -> tuple[Array, Array]:
        """Cell end values: left end of cell j and right end of cell j."""
        return self.right[:-1], self.left[1:]

    @property
    def has_jumps(self) -> bool:
        return bool(np.any(self.left != self.right))

    def __call__(self, x: npt.ArrayLike) -> Array:
        """Evaluate the reconstruction (node samples at nodes, zero off-grid)."""
        x = np.asarray(x, dtype=float)
        g = self.grid
        pos = (x - g.s_min) / g.step
        j = np.clip(np.floor(pos).astype(int), 0, g.n - 2)
        th = pos - j
        a, b = self.cells()
        out = a[j] + (b[j] - a[j]) * th
        at_node = np.abs(pos - np.round(pos)) < _NODE_TOL
        k = np.clip(np.round(pos).astype(int), 0, g.n - 1)
        out = np.where(at_node, self.values[k], out)
        inside = (pos > -_NODE_TOL) & (pos < g.n - 1 + _NODE_TOL)
        return np.where(inside, out, 0.0)

    # arithmetic
    def _check(self, other: "RadialProfile") -> None:
        if other.grid != self.grid:
            raise ValueError("profiles live on different grids")

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        self._check(other)
        return RadialProfile(
            self.grid, self.values + other.values, self.left + other.left, self.right + other.right
        )

    def __sub__(self, other: "RadialProfile") -> "RadialProfile":
        self._check(other)
        return RadialProfile(
            self.grid, self.values - other.values, self.left - other.left, self.right - other.right
        )

    def __neg__(self) -> "RadialProfile":
        return RadialProfile(self.grid, -self.values, -self.left, -self.right)

    def scale(self, c: float) -> "RadialProfile":
        return RadialProfile(self.grid, c * self.values, c * self.left, c * self.right)

    def reflect(self) -> "RadialProfile":
        """s -> G(-s); requires a grid symmetric about 0."""
        g = self.grid
        if abs(g.s_min + g.s_max) > _NODE_TOL * g.step:
            raise GridDomainError("reflection needs a symmetric grid")
        return RadialProfile(g, self.values[::-1], self.right[::-1], self.left[::-1])

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.left)), np.max(np.abs(self.right))))


# ---------------------------------------------------------------- quadrature


def _cell_moments(G: RadialProfile) -> tuple[Array, Array]:
    a, b = G.cells()
    h = G.grid.step
    s = G.grid.nodes
    sl, sr = s[:-1], s[1:]
    m0 = 0.5 * h * (a + b)
    # s*G integrated exactly on each linear cell
    m1 = h / 6.0 * (a * (2 * sl + sr) + b * (sl + 2 * sr))
    return m0, m1


def cumulative(G: RadialProfile, x: npt.ArrayLike, order: int = 0) -> Array:
    """Integral of s^order * G from the left grid end up to x (order 0 or 1).

    Exact for the piecewise-linear reconstruction; x is clipped to the grid.
    """
    g = G.grid
    x = np.clip(np.asarray(x, dtype=float), g.s_min, g.s_max)
    m0, m1 = _cell_moments(G)
    cm = np.concatenate(([0.0], np.cumsum(m0 if order == 0 else m1)))
    h = g.step
    pos = (x - g.s_min) / h
    j = np.clip(np.floor(pos).astype(int), 0, g.n - 2)
    th = np.clip(pos - j, 0.0, 1.0)
    a, b = G.cells()
    aj, dj = a[j], b[j] - a[j]
    if order == 0:
        part = h * (aj * th + dj * th**2 / 2)
    elif order == 1:
        sj = g.nodes[j]
        part = h * (sj * aj * th + (sj * dj + h * aj) * th**2 / 2 + h * dj * th**3 / 3)
    else:
        raise ValueError("order must be 0 or 1")
    return cm[j] + part


def _interval(G: RadialProfile, a: float, b: float) -> tuple[float, float]:
    g = G.grid
    lo = g.s_min if a == -math.inf else a
    hi = g.s_max if b == math.inf else b
    if not lo < hi:
        raise ValueError("need a < b")
    tol = _NODE_TOL * g.step
    if lo < g.s_min - tol or hi > g.s_max + tol:
        raise GridDomainError(f"interval [{a}, {b}] leaves the grid")
    return lo, hi


def moment0(G: RadialProfile, a: float = -math.inf, b: float = math.inf) -> float:
    """Integral of G over [a, b]."""
    lo, hi = _interval(G, a, b)
    c = cumulative(G, [lo, hi], 0)
    return float(c[1] - c[0])


def moment1(G: RadialProfile, a: float = -math.inf, b: float = math.inf) -> float:
    """Integral of s G(s) over [a, b]."""
    lo, hi = _interval(G, a, b)
    c = cumulative(G, [lo, hi], 1)
    return float(c[1] - c[0])


def _sq_cells(G: RadialProfile) -> Array:
    a, b = G.cells()
    return 0.5 * G.grid.step * (a * a + b * b)


def l2_norm(G: RadialProfile) -> float:
    return float(math.sqrt(np.sum(_sq_cells(G))))


def l2_tail_many(G: RadialProfile, radii: npt.ArrayLike) -> Array:
    """sqrt of the trapezoid integral of G^2 over |s| > r for each r."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 0):
        raise ValueError("radius must be nonnegative")
    g = G.grid
    q = _sq_cells(G)
    cq = np.concatenate(([0.0], np.cumsum(q)))
    total = cq[-1]
    h = g.step
    a, b = G.cells()

    def upto(x: Array) -> Array:
        # trapezoid of G^2 from s_min to x, with a linear value at x inside a cell
        x = np.clip(x, g.s_min, g.s_max)
        pos = (x - g.s_min) / h
        j = np.clip(np.floor(pos).astype(int), 0, g.n - 2)
        th = np.clip(pos - j, 0.0, 1.0)
        gx = a[j] + (b[j] - a[j]) * th
        return cq[j] + 0.5 * th * h * (a[j] ** 2 + gx**2)

    inner = upto(radii) - upto(-radii)
    tail = np.maximum(total - inner, 0.0)
    return np.sqrt(tail)


def l2_tail(G: RadialProfile, r: float) -> float:
    """L^2 norm of G restricted to |s| > r."""
    return float(l2_tail_many(G, [r])[0])


# ------------------------------------------------------------- manipulation


def split_at(G: RadialProfile, r1: float) -> tuple[RadialProfile, RadialProfile]:
    """Split G = G1 + G2 with G1 on |s| <= r1 and G2 on |s| > r1."""
    if not r1 > 0:
        raise ValueError("r1 must be positive")
    g = G.grid
    s = g.nodes
    tol = _NODE_TOL * g.step
    inner = np.abs(s) <= r1 + tol
    v1 = np.where(inner, G.values, 0.0)
    l1 = np.where(inner, G.left, 0.0)
    r1a = np.where(inner, G.right, 0.0)
    v2 = G.values - v1
    l2 = G.left - l1
    r2 = G.right - r1a
    for x in (r1, -r1):
        k = g.node_index(x)
        if k is None:
            continue
        # the boundary node belongs to G1; the outer limit moves to G2
        if x > 0:
            r2[k], r1a[k] = G.right[k], 0.0
        else:
            l2[k], l1[k] = G.left[k], 0.0
    return RadialProfile(g, v1, l1, r1a), RadialProfile(g, v2, l2, r2)


def translate(G: RadialProfile, t0: float, overflow_tol: float | None = None) -> RadialProfile:
    """s -> G(s + t0), resampled on the same grid.

    Whole-step shifts move the arrays exactly; other shifts interpolate the
    reconstruction. Values above ``overflow_tol`` (default 1e-12 max|G|)
    pushed past a grid end raise GridDomainError.
    """
    g = G.grid
    if overflow_tol is None:
        overflow_tol = 1e-12 * G.max_abs()
    k = t0 / g.step
    kr = int(round(k))
    if abs(k - kr) < 1e-9:
        n = g.n
        out = []
        lost = 0.0
        for arr in (G.values, G.left, G.right):
            new = np.zeros(n)
            if kr >= 0:
                new[: n - kr] = arr[kr:] if kr < n else []
                lost = max(lost, float(np.max(np.abs(arr[:kr]), initial=0.0)))
            else:
                m = -kr
                new[m:] = arr[: n - m] if m < n else []
                lost = max(lost, float(np.max(np.abs(arr[n - m :]), initial=0.0)))
            out.append(new)
        if lost > overflow_tol:
            raise GridDomainError("shifted support leaves the grid")
        return RadialProfile(g, *out)
    s = g.nodes
    tol = _NODE_TOL * g.step
    dropped = s < g.s_min + t0 - tol if t0 > 0 else s > g.s_max + t0 + tol
    if np.any(np.abs(G.values[dropped]) > overflow_tol):
        raise GridDomainError("shifted support leaves the grid")
    return RadialProfile(g, G(s + t0))


def _positive_radii(g: GridSpec, R: float) -> Array:
    s = g.nodes
    r = np.unique(np.abs(s))
    return r[r >= R - _NODE_TOL * g.step]


def weighted_distance(G1: RadialProfile, G2: RadialProfile, R: float, exponent: float = 7 / 6) -> float:
    """sup over grid radii r >= R of r^exponent * ||G1 - G2||_{L2(|s|>r)}."""
    if not R > 0:
        raise ValueError("R must be positive")
    G1._check(G2)
    radii = _positive_radii(G1.grid, R)
    if radii.size == 0:
        return 0.0
    tails = l2_tail_many(G1 - G2, radii)
    return float(np.max(radii**exponent * tails))


def weighted_distance_two_regime(
    G1: RadialProfile, G2: RadialProfile, R: float, alpha: float, beta: float
) -> float:
    """Two-regime distance for the second-order ball.

    Inner radii R <= r <= |beta|/|alpha| use |beta|^{-7/3} r^{7/2}; outer radii
    use |alpha|^{-4/3} |beta|^{-1} r^{13/6}. A regime with no radii is skipped;
    alpha = 0 puts every radius in the inner regime.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if beta == 0:
        raise ValueError("beta must be nonzero for the two-regime distance")
    G1._check(G2)
    radii = _positive_radii(G1.grid, R)
    tails = l2_tail_many(G1 - G2, radii)
    cross = math.inf if alpha == 0 else abs(beta) / abs(alpha)
    inner = radii <= cross
    out = 0.0
    if np.any(inner):
        w = abs(beta) ** (-7 / 3) * radii[inner] ** 3.5
        out = max(out, float(np.max(w * tails[inner])))
    if np.any(~inner):
        w = abs(alpha) ** (-4 / 3) / abs(beta) * radii[~inner] ** (13 / 6)
        out = max(out, float(np.max(w * tails[~inner])))
    return out


# ---------------------------------------------------------------------- I/O


def save_profile_csv(path: str | Path, G: RadialProfile) -> None:
    from .io_utils import atomic_write_text

    lines = ["s,value"]
    lines += [f"{s:.17g},{v:.17g}" for s, v in zip(G.grid.nodes, G.values)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_profile_csv(path: str | Path) -> RadialProfile:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["s", "value"]:
            raise ValueError("profile CSV must have header 's,value'")
        rows = [(float(a), float(b)) for a, b in reader]
    if len(rows) < 2:
        raise ValueError("profile CSV needs at least two rows")
    s = np.array([r[0] for r in rows])
    v = np.array([r[1] for r in rows])
    d = np.diff(s)
    if np.any(d <= 0):
        raise ValueError("s must be strictly increasing")
    h = float(np.mean(d))
    if np.max(np.abs(d - h)) > 1e-9 * max(1.0, h):
        raise ValueError("profile grid must be uniform")
    grid = GridSpec(float(s[0]), float(s[-1]), h)
    return RadialProfile(grid, v)
