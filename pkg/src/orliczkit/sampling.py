"""Sampled nonnegative functions on R^n and the quadrature they carry.

Three representations share one interface:

* :class:`SimpleFunction` keeps exact level-set measures and no geometry.
* :class:`GridFunction` stores cell values on a uniform grid (n = 1, 2, 3);
  a cell belongs to a ball when its centre does.
* :class:`RadialProfile` stores f(|x|) on a log-spaced radius grid, with
  the first value extended down to 0 and zero beyond the last radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ResolutionError",
    "unit_ball_volume",
    "sphere_area",
    "Ball",
    "SimpleFunction",
    "GridFunction",
    "RadialProfile",
    "characteristic_ball",
    "integrate",
    "quadrature_data",
    "level_measures",
    "distribution",
    "restrict",
]


class ResolutionError(ValueError):
    pass


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n."""
    return n * unit_ball_volume(n)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim_n(self) -> int:
        return len(self.center)

    @property
    def measure(self) -> float:
        return unit_ball_volume(self.dim_n) * self.radius**self.dim_n

    def scaled(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor)


@dataclass(frozen=True, eq=False)
class SimpleFunction:
    """sum_i levels[i] * chi_{E_i} with disjoint E_i of the given measures."""

    levels: np.ndarray
    measures: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float).ravel()
        ms = np.asarray(self.measures, dtype=float).ravel()
        if lv.shape != ms.shape:
            raise ValueError("levels and measures must have equal length")
        if np.any(lv < 0) or np.any(ms < 0):
            raise ValueError("simple functions are nonnegative with nonnegative measures")
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "measures", ms)

    @classmethod
    def characteristic(cls, measure: float) -> "SimpleFunction":
        return cls(np.array([1.0]), np.array([float(measure)]))

    def scale(self, c: float) -> "SimpleFunction":
        return SimpleFunction(self.levels * c, self.measures)

    def power(self, beta: float) -> "SimpleFunction":
        return SimpleFunction(self.levels**beta, self.measures)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Cell values on the box prod_k [lo_k, lo_k + shape_k * h]."""

    lo: tuple
    h: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim not in (1, 2, 3):
            raise ValueError("grid functions live in dimension 1, 2 or 3")
        if np.any(vals < 0) or np.any(~np.isfinite(vals)):
            raise ValueError("grid values must be finite and nonnegative")
        lo = tuple(float(c) for c in np.atleast_1d(self.lo))
        if len(lo) != vals.ndim:
            raise ValueError("lower corner does not match the grid dimension")
        if not self.h > 0:
            raise ValueError("cell size must be positive")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "values", vals)

    @property
    def dim_n(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim_n

    @property
    def hi(self) -> tuple:
        return tuple(l + s * self.h for l, s in zip(self.lo, self.shape))

    def axis_centers(self, k: int) -> np.ndarray:
        return self.lo[k] + (np.arange(self.shape[k]) + 0.5) * self.h

    def centers(self) -> np.ndarray:
        """Cell centres, shape (N, n), in C order of ``values``."""
        axes = np.meshgrid(*[self.axis_centers(k) for k in range(self.dim_n)], indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=1)

    def like(self, values) -> "GridFunction":
        return GridFunction(self.lo, self.h, values)

    def scale(self, c: float) -> "GridFunction":
        return self.like(self.values * c)

    def power(self, beta: float) -> "GridFunction":
        return self.like(self.values**beta)

    def support_points(self) -> np.ndarray:
        return self.centers()[self.values.ravel() > 0]

    @classmethod
    def from_function(cls, fn, lo, hi, cells: int) -> "GridFunction":
        """Sample ``fn`` (taking an (N, n) array of points) at cell centres."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        lengths = hi - lo
        h = float(lengths[0] / cells)
        shape = tuple(int(round(L / h)) for L in lengths)
        if any(abs(s * h - L) > 1e-9 * max(L, 1.0) for s, L in zip(shape, lengths)):
            raise ValueError("box sides must be integer multiples of the cell size")
        probe = cls(tuple(lo), h, np.zeros(shape))
        vals = np.asarray(fn(probe.centers()), dtype=float).reshape(shape)
        return cls(tuple(lo), h, vals)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """f(x) = values(|x|) on a log grid; constant below the first radius, zero above the last."""

    dim_n: int
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.shape != v.shape or r.ndim != 1 or r.size < 2:
            raise ValueError("radii and values must be matching 1-d arrays")
        if np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise ValueError("radius grid must be positive and strictly increasing")
        if np.any(v < 0) or np.any(~np.isfinite(v)):
            raise ValueError("profile values must be finite and nonnegative")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fn, dim_n: int = 1, r_min: float = 1e-6, r_max: float = 1e6, per_decade: int = 64):
        """Sample ``fn`` on [r_min, r_max]; pass the support radius as ``r_max`` for cut-off profiles."""
        m = int(math.ceil(per_decade * math.log10(r_max / r_min)))
        radii = np.logspace(math.log10(r_min), math.log10(r_max), m + 1)
        return cls(dim_n, radii, np.asarray(fn(radii), dtype=float))

    def value_at(self, s: float) -> float:
        """Profile value at radius ``s``, log-log interpolated between nodes."""
        r, v = self.radii, self.values
        if s <= r[0]:
            return float(v[0])
        if s > r[-1]:
            return 0.0
        i = min(int(np.searchsorted(r, s)) - 1, r.size - 2)
        frac = (math.log(s) - math.log(r[i])) / (math.log(r[i + 1]) - math.log(r[i]))
        if v[i] > 0 and v[i + 1] > 0:
            return float(math.exp(math.log(v[i]) + frac * (math.log(v[i + 1]) - math.log(v[i]))))
        return float(v[i] + frac * (v[i + 1] - v[i]))

    def truncated(self, radius: float) -> "RadialProfile":
        """The profile times the indicator of |x| <= radius."""
        if radius >= self.radii[-1]:
            return self
        if radius <= self.radii[0]:
            raise ValueError("region smaller than the profile's innermost radius")
        keep = self.radii < radius
        radii = np.concatenate([self.radii[keep], [radius]])
        values = np.concatenate([self.values[keep], [self.value_at(radius)]])
        return RadialProfile(self.dim_n, radii, values)

    def like(self, values) -> "RadialProfile":
        return RadialProfile(self.dim_n, self.radii, values)

    def scale(self, c: float) -> "RadialProfile":
        return self.like(self.values * c)

    def power(self, beta: float) -> "RadialProfile":
        return self.like(self.values**beta)

    def node_weights(self) -> np.ndarray:
        """Measure weights so that sum w_i F(values_i) approximates the integral of F(f)."""
        n = self.dim_n
        u = np.log(self.radii)
        du = np.diff(u)
        w = np.zeros(self.radii.size)
        w[:-1] += 0.5 * du
        w[1:] += 0.5 * du
        return sphere_area(n) * self.radii**n * w

    def core_measure(self) -> float:
        return unit_ball_volume(self.dim_n) * self.radii[0] ** self.dim_n


def characteristic_ball(ball: Ball, lo, hi, cells: int) -> GridFunction:
    """chi_B on a uniform grid, membership by cell centre."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.size != ball.dim_n:
        raise ValueError("grid and ball dimensions differ")
    c = np.asarray(ball.center)
    if np.any(c - ball.radius < lo) or np.any(c + ball.radius > hi):
        raise ValueError("ball must lie inside the grid box")
    h = (hi[0] - lo[0]) / cells
    if 2 * ball.radius / h < 8:
        raise ResolutionError(f"only {2 * ball.radius / h:.2f} cells across the ball diameter (need 8)")

    def chi(points):
        return (np.linalg.norm(points - c[None, :], axis=1) < ball.radius).astype(float)

    return GridFunction.from_function(chi, lo, hi, cells)


# Quadrature views -------------------------------------------------------------


def _in_ball(points: np.ndarray, region: Ball) -> np.ndarray:
    c = np.asarray(region.center)
    return np.linalg.norm(points - c[None, :], axis=1) < region.radius


def restrict(f, region: Ball | None):
    """f * chi_region, with ``None`` meaning the whole space."""
    if region is None:
        return f
    if isinstance(f, GridFunction):
        if region.dim_n != f.dim_n:
            raise ValueError("region dimension differs from the grid")
        mask = _in_ball(f.centers(), region).reshape(f.shape)
        return f.like(np.where(mask, f.values, 0.0))
    if isinstance(f, RadialProfile):
        if any(c != 0 for c in region.center) or region.dim_n != f.dim_n:
            raise ValueError("radial profiles restrict only to balls centred at the origin")
        return f.truncated(region.radius)
    if isinstance(f, SimpleFunction):
        raise ValueError("simple functions carry no geometry; pass region=None")
    raise TypeError(f"unsupported function type {type(f).__name__}")


def quadrature_data(f, region: Ball | None = None):
    """(values, weights) with integral of F(f) over the region = sum weights * F(values)."""
    f = restrict(f, region)
    if isinstance(f, SimpleFunction):
        return f.levels, f.measures
    if isinstance(f, GridFunction):
        v = f.values.ravel()
        return v, np.full(v.shape, f.cell_volume)
    if isinstance(f, RadialProfile):
        return (
            np.concatenate([[f.values[0]], f.values]),
            np.concatenate([[f.core_measure()], f.node_weights()]),
        )
    raise TypeError(f"unsupported function type {type(f).__name__}")


def level_measures(f, region: Ball | None = None):
    """Distinct positive levels and the measure each occupies (exact for simple and grid data)."""
    vals, w = quadrature_data(f, region)
    pos = (vals > 0) & (w > 0)
    levels, inverse = np.unique(vals[pos], return_inverse=True)
    measures = np.bincount(inverse, weights=w[pos], minlength=levels.size)
    return levels, measures


def integrate(f, region: Ball | None = None) -> float:
    vals, w = quadrature_data(f, region)
    return float(np.sum(vals * w))


def _radial_superlevel(f: RadialProfile, t: float, inclusive: bool) -> float:
    n = f.dim_n
    vn = unit_ball_volume(n)
    r, v = f.radii, f.values
    above = (v >= t) if inclusive else (v > t)
    total = f.core_measure() if above[0] else 0.0
    a, b = v[:-1], v[1:]
    ra, rb = r[:-1], r[1:]
    both = above[:-1] & above[1:]
    total += vn * float(np.sum(rb[both] ** n - ra[both] ** n))
    mixed = above[:-1] ^ above[1:]
    for i in np.nonzero(mixed)[0]:
        va, vb = a[i], b[i]
        if va > 0 and vb > 0 and t > 0:
            frac = (math.log(t) - math.log(va)) / (math.log(vb) - math.log(va))
        else:
            frac = (t - va) / (vb - va)
        frac = min(max(frac, 0.0), 1.0)
        cross = math.exp(math.log(ra[i]) + frac * (math.log(rb[i]) - math.log(ra[i])))
        if above[i]:
            total += vn * (cross**n - ra[i] ** n)
        else:
            total += vn * (rb[i] ** n - cross**n)
    return total


def distribution(f, t, region: Ball | None = None, inclusive: bool = False):
    """Measure of {x in region : f(x) > t} (or >= t when ``inclusive``)."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ValueError("levels must be nonnegative")
    f = restrict(f, region)
    if isinstance(f, RadialProfile):
        out = np.array([_radial_superlevel(f, float(x), inclusive) for x in ts])
    else:
        vals, w = quadrature_data(f)
        order = np.argsort(vals)
        sv, sw = vals[order], w[order]
        tail = np.concatenate([np.cumsum(sw[::-1])[::-1], [0.0]])
        idx = np.searchsorted(sv, ts, side="left" if inclusive else "right")
        out = tail[idx]
    return float(out[0]) if np.ndim(t) == 0 else out
