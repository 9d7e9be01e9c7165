"""Luxemburg and weak Orlicz norms of sampled functions, and the small inequalities around them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import (
    Ball,
    GridFunction,
    RadialProfile,
    SimpleFunction,
    distribution,
    integrate,
    level_measures,
    quadrature_data,
    restrict,
)
from .young import YoungFunction, eval_young, generalized_inverse, power_scale

__all__ = [
    "NormResult",
    "InequalityReport",
    "distribution",
    "modular",
    "luxemburg_norm",
    "weak_norm",
    "holder_check",
    "mean_bound_check",
    "ScalingReport",
    "scaling_law_check",
    "region_measure",
    "prefix_norms",
]

BISECTION_RTOL = 1e-12
WEAK_FILL_LEVELS = 64


@dataclass(frozen=True)
class NormResult:
    value: float
    method: str  # "bisection", "exact-simple-function" or "sup-grid"
    residual: float
    unbounded: bool = False

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method, "residual": self.residual}


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    ratio: float
    holds: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio, "holds": self.holds}


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0:
        return 0.0
    return lhs / rhs if rhs > 0 else math.inf


def _is_exact(f) -> bool:
    return isinstance(f, (SimpleFunction, GridFunction))


def _levels(f, region):
    if isinstance(f, RadialProfile):
        vals, w = quadrature_data(f, region)
        keep = (vals > 0) & (w > 0)
        return vals[keep], w[keep]
    return level_measures(f, region)


def modular(f, phi: YoungFunction, lam: float, region: Ball | None = None) -> float:
    """Integral of Phi(|f| / lam) over the region, with 0 * inf = 0."""
    vals, w = _levels(f, region)
    return _modular(vals, w, phi, lam)


def _modular(vals, w, phi, lam) -> float:
    if vals.size == 0:
        return 0.0
    return float(np.sum(w * eval_young(phi, vals / lam)))


def luxemburg_norm(f, phi: YoungFunction, region: Ball | None = None, rtol: float = BISECTION_RTOL) -> NormResult:
    """inf{lam > 0 : integral of Phi(|f|/lam) <= 1}, located by log-scale bisection.

    Grid and simple data take the exact path: the modular is summed over
    exact level-set measures. Young functions that jump to infinity are only
    accepted on that path.
    """
    exact = _is_exact(f)
    method = "exact-simple-function" if exact else "bisection"
    if not phi.finite_valued and not exact:
        raise ValueError(f"{phi.label} takes the value inf; only simple or grid data are supported")
    vals, w = _levels(f, region)
    if vals.size == 0:
        return NormResult(0.0, method, 0.0)
    top = float(vals.max())
    if not math.isfinite(top):
        # an infinite value on a set of positive measure: Phi(inf / lam) = inf for every lam
        return NormResult(math.inf, method, math.inf, unbounded=True)

    def mod(lam):
        return _modular(vals, w, phi, lam)

    hi = top
    for _ in range(2000):
        if mod(hi) <= 1.0:
            break
        hi *= 2.0
        if not math.isfinite(hi):
            return NormResult(math.inf, method, math.inf, unbounded=True)
    else:
        return NormResult(math.inf, method, math.inf, unbounded=True)
    lo = hi / 2.0
    while mod(lo) <= 1.0:
        hi = lo
        lo /= 2.0
        if lo == 0.0:
            return NormResult(0.0, method, 0.0)
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        if mid in (lo, hi):
            break
        if mod(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return NormResult(hi, method, mod(hi))


def _weak_levels(f, region):
    """Levels c_k (ascending) with the measure of {f >= c_k}."""
    if isinstance(f, RadialProfile):
        g = restrict(f, region)
        nodes = np.unique(g.values[g.values > 0])
        if nodes.size == 0:
            return nodes, nodes
        fill = np.logspace(math.log10(nodes[0]), math.log10(nodes[-1]), WEAK_FILL_LEVELS)
        levels = np.unique(np.concatenate([nodes, fill]))
        return levels, distribution(g, levels, inclusive=True)
    levels, measures = level_measures(f, region)
    tails = np.cumsum(measures[::-1])[::-1]
    return levels, tails


def weak_norm(f, phi: YoungFunction, region: Ball | None = None) -> NormResult:
    """sup over levels t of t / Phi^{-1}(1 / m(t)), from the level sets {f >= t}.

    On a simple function the sup is approached just below each level, where
    the distribution function equals the measure of {f >= level}.
    """
    levels, tails = _weak_levels(f, region)
    if levels.size == 0:
        return NormResult(0.0, "sup-grid", 0.0)
    if not phi.finite_valued and not _is_exact(f):
        raise ValueError(f"{phi.label} takes the value inf; only simple or grid data are supported")
    if not math.isfinite(float(levels.max())):
        return NormResult(math.inf, "sup-grid", math.inf, unbounded=True)
    with np.errstate(divide="ignore"):
        inv = generalized_inverse(phi, np.where(tails > 0, 1.0 / tails, np.inf))
    with np.errstate(divide="ignore", invalid="ignore"):
        candidates = np.where(np.isinf(inv), 0.0, levels / inv)
    value = float(np.max(candidates))
    if value == 0.0:
        return NormResult(0.0, "sup-grid", 0.0)
    residual = float(np.max(eval_young(phi, levels / value) * tails))
    return NormResult(value, "sup-grid", residual)


def prefix_norms(values, cell_volume: float, ks, phi: YoungFunction, weak: bool = False, rtol: float = BISECTION_RTOL) -> np.ndarray:
    """Norms of the simple functions built from the first k entries of ``values``, for each k in ``ks``.

    Every cell carries ``cell_volume``. The strong norms come from one bisection
    run in lockstep over all prefixes.
    """
    vals = np.abs(np.asarray(values, dtype=float))
    ks = np.asarray(ks, dtype=int)
    out = np.zeros(ks.size)
    w = float(cell_volume)
    if weak:
        with np.errstate(divide="ignore"):
            inv = generalized_inverse(phi, 1.0 / (w * np.arange(1, vals.size + 1)))
        for i, k in enumerate(ks):
            if k == 0:
                continue
            desc = np.sort(vals[:k])[::-1]
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = np.where(np.isinf(inv[:k]) | (desc == 0), 0.0, desc / inv[:k])
            out[i] = float(np.max(cand))
        return out
    live = ks > 0
    if not np.any(live):
        return out
    kk = ks[live]
    m = int(kk.max())
    mask = np.arange(m)[None, :] < kk[:, None]
    data = np.where(mask, vals[None, :m], 0.0)

    def mod(lam):
        return np.sum(w * eval_young(phi, data / lam[:, None]), axis=1)

    hi = np.max(data, axis=1)
    if np.any(hi == 0):
        raise ValueError("prefixes must contain a nonzero value")
    for _ in range(2000):
        bad = mod(hi) > 1.0
        if not np.any(bad):
            break
        hi = np.where(bad, hi * 2.0, hi)
        if not np.all(np.isfinite(hi)):
            raise ArithmeticError("norm bracket overflow")
    lo = hi / 2.0
    for _ in range(2000):
        ok = mod(lo) <= 1.0
        if not np.any(ok):
            break
        hi = np.where(ok, lo, hi)
        lo = np.where(ok, lo / 2.0, lo)
    while np.max(hi / lo - 1.0) > rtol:
        mid = np.sqrt(lo * hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        ok = mod(mid) <= 1.0
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    out[live] = hi
    return out


def region_measure(f, region: Ball | None) -> float:
    """Measure of the region as the representation of ``f`` resolves it."""
    if isinstance(f, GridFunction):
        return integrate(f.like(np.ones(f.shape)), region)
    if isinstance(f, RadialProfile):
        return integrate(f.like(np.ones(f.radii.size)), region)
    if region is not None:
        raise ValueError("simple functions carry no geometry")
    return float(np.sum(f.measures))


def _product(f, g):
    if isinstance(f, GridFunction) and isinstance(g, GridFunction):
        if f.shape != g.shape or f.lo != g.lo or f.h != g.h:
            raise ValueError("grid functions must share a grid")
        return f.like(f.values * g.values)
    if isinstance(f, RadialProfile) and isinstance(g, RadialProfile):
        if f.dim_n != g.dim_n or not np.array_equal(f.radii, g.radii):
            raise ValueError("radial profiles must share a radius grid")
        return f.like(f.values * g.values)
    raise TypeError("products need two grid functions or two radial profiles")


def holder_check(f, g, phi: YoungFunction, region: Ball | None = None) -> InequalityReport:
    """Integral of |fg| against 2 ||f||_Phi ||g||_{conjugate of Phi}."""
    lhs = integrate(_product(f, g), region)
    rhs = 2.0 * luxemburg_norm(f, phi, region).value * luxemburg_norm(g, phi.conjugate(), region).value
    ratio = _ratio(lhs, rhs)
    return InequalityReport(lhs, rhs, ratio, ratio <= 1.0 + 1e-9)


def mean_bound_check(f, ball: Ball, phi: YoungFunction) -> InequalityReport:
    """Integral of |f| over B against 2 |B| Phi^{-1}(1/|B|) ||f||_{L^Phi(B)}."""
    measure = region_measure(f, ball)
    lhs = integrate(f, ball)
    rhs = 2.0 * measure * generalized_inverse(phi, 1.0 / measure) * luxemburg_norm(f, phi, ball).value
    ratio = _ratio(lhs, rhs)
    return InequalityReport(lhs, rhs, ratio, ratio <= 1.0 + 1e-9)


@dataclass(frozen=True)
class ScalingReport:
    strong_lhs: float
    strong_rhs: float
    weak_lhs: float
    weak_rhs: float

    @staticmethod
    def _rel(a, b):
        if a == b:
            return 0.0
        return abs(a - b) / max(abs(a), abs(b))

    @property
    def strong_error(self) -> float:
        return self._rel(self.strong_lhs, self.strong_rhs)

    @property
    def weak_error(self) -> float:
        return self._rel(self.weak_lhs, self.weak_rhs)

    def holds(self, tol: float = 1e-6) -> bool:
        return self.strong_error <= tol and self.weak_error <= tol


def scaling_law_check(f, phi: YoungFunction, beta: float, region: Ball | None = None) -> ScalingReport:
    """Compare ||f^beta|| in the Psi spaces with ||f||^beta in the Phi spaces, Psi(t) = Phi(t^(1/beta))."""
    psi = power_scale(phi, beta)
    g = f.power(beta)
    return ScalingReport(
        luxemburg_norm(g, psi, region).value,
        luxemburg_norm(f, phi, region).value ** beta,
        weak_norm(g, psi, region).value,
        weak_norm(f, phi, region).value ** beta,
    )
