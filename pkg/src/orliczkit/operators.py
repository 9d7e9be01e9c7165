"""The maximal operator M, the generalized fractional maximal operator M_rho and
the generalized fractional integral I_rho on sampled functions, with pointwise
lemma checkers.

Ball averages on a grid divide the sum of the cells whose centres lie in the
ball by the number of lattice points (the grid extended periodically beyond
its box) in the ball, so a constant function has constant averages on every
ball inside the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import Kernel, rho_star
from .quadrature import cumulative_log_integral, log_integral
from .sampling import Ball, GridFunction, RadialProfile, sphere_area, unit_ball_volume
from .young import YoungFunction, eval_young, generalized_inverse

__all__ = [
    "RADIUS_PER_DECADE",
    "RING_SUBDIVISIONS",
    "HypothesisError",
    "OperatorEvaluation",
    "lattice_count",
    "radius_grid",
    "ball_means",
    "hardy_littlewood",
    "frac_maximal",
    "frac_integral",
    "apply_operator",
    "LemmaReport",
    "hedberg_integral",
    "hedberg_maximal",
    "local_maximal",
    "pointwise_adams_integral",
    "pointwise_adams_maximal",
    "trivial_lower",
    "potential_lower_bound",
]

RADIUS_PER_DECADE = 64
RING_SUBDIVISIONS = 8
_EXACT_ROWS = {2: 4096, 3: 64}  # lattice counting by rows up to this many cells of radius


class HypothesisError(ValueError):
    """A lemma was invoked without its hypotheses certified."""


@dataclass(frozen=True, eq=False)
class OperatorEvaluation:
    operator: str
    points: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "points": self.points.tolist(),
            "values": self.values.tolist(),
            "metadata": self.metadata,
        }


# Lattice geometry ---------------------------------------------------------------


def _count_1d(x: float, r, lo: float, h: float):
    """Lattice points lo + (k + 1/2) h, k in Z, strictly within distance r of x."""
    r = np.asarray(r, dtype=float)
    a = (x - r - lo) / h - 0.5
    b = (x + r - lo) / h - 0.5
    return np.maximum(0, np.ceil(b) - np.floor(a) - 1)


def _count_rows(x, r: float, lo, h: float, n: int) -> float:
    if n == 1:
        return float(_count_1d(x[0], r, lo[0], h))
    k = np.arange(math.floor((x[0] - r - lo[0]) / h - 0.5), math.ceil((x[0] + r - lo[0]) / h - 0.5) + 1)
    dy = lo[0] + (k + 0.5) * h - x[0]
    inside = np.abs(dy) < r
    widths = np.sqrt(np.maximum(r * r - dy[inside] ** 2, 0.0))
    if n == 2:
        return float(np.sum(_count_1d(x[1], widths, lo[1], h)))
    return float(sum(_count_rows(x[1:], w, lo[1:], h, n - 1) for w in widths if w > 0))


def lattice_count(x, radii, lo, h: float) -> np.ndarray:
    """Number of lattice points in the open balls B(x, r) for each radius.

    Exact in dimension 1 and by row sums up to a size cap in dimensions 2
    and 3; beyond the cap the continuum count v_n r^n / h^n is used.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    n = x.size
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if n == 1:
        return _count_1d(x[0], radii, lo[0], h).astype(float)
    cap = _EXACT_ROWS[n] * h
    out = np.empty(radii.size)
    for i, r in enumerate(radii):
        out[i] = _count_rows(x, r, lo, h, n) if r <= cap else unit_ball_volume(n) * (r / h) ** n
    return out


def radius_grid(h: float, reach: float, per_decade: int = RADIUS_PER_DECADE, extra=()) -> np.ndarray:
    """h 10^(k/per_decade) up to at least ``reach``, merged with ``extra`` radii."""
    top = max(reach, h)
    k = int(math.ceil(per_decade * math.log10(top / h) - 1e-12))
    base = h * 10.0 ** (np.arange(k + 1) / per_decade)
    return np.unique(np.concatenate([base, np.asarray(extra, dtype=float)]))


def _support_reach(f: GridFunction, x: np.ndarray) -> float:
    pts = f.support_points()
    if pts.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(pts - x[None, :], axis=1)))


def _ball_sums(f: GridFunction, x: np.ndarray, radii: np.ndarray):
    """Sum of cell values and number of lattice points in each open ball B(x, r)."""
    dist = np.linalg.norm(f.centers() - x[None, :], axis=1)
    order = np.argsort(dist, kind="stable")
    running = np.concatenate([[0.0], np.cumsum(f.values.ravel()[order])])
    inbox = np.searchsorted(dist[order], radii, side="left")
    lo, hi = np.asarray(f.lo), np.asarray(f.hi)
    contained = np.all((x[None, :] - radii[:, None] >= lo) & (x[None, :] + radii[:, None] <= hi), axis=1)
    counts = inbox.astype(float)
    if not np.all(contained):
        out = ~contained
        counts[out] = np.maximum(counts[out], lattice_count(x, radii[out], f.lo, f.h))
    return running[inbox], counts


def ball_means(f: GridFunction, x, per_decade: int = RADIUS_PER_DECADE, extra_radii=()):
    """(radii, means) of |f| over B(x, r) on the radius grid from one cell to 4x the support reach."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != f.dim_n:
        raise ValueError("point dimension differs from the grid")
    reach = _support_reach(f, x)
    radii = radius_grid(f.h, 4.0 * reach, per_decade, extra_radii)
    if reach == 0.0:
        return radii, np.zeros(radii.size)
    sums, counts = _ball_sums(f, x, radii)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / counts, 0.0)
    return radii, means


def _radial_means(f: RadialProfile, radii: np.ndarray) -> np.ndarray:
    """Averages of a radial profile over B(0, r)."""
    n = f.dim_n
    sigma = sphere_area(n)
    mass = f.values[0] * f.core_measure() + sigma * cumulative_log_integral(
        lambda s: s**n * _interp_profile(f, s), np.concatenate([[f.radii[0]], radii]), 64
    )[1:]
    return mass / (unit_ball_volume(n) * radii**n)


def _interp_profile(f: RadialProfile, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    r, v = f.radii, f.values
    out = np.zeros_like(s)
    out[s <= r[0]] = v[0]
    mid = (s > r[0]) & (s <= r[-1])
    if np.any(mid):
        ls = np.log(s[mid])
        lr = np.log(r)
        lin = np.interp(ls, lr, v)
        with np.errstate(divide="ignore"):
            lv = np.log(v)
        i = np.clip(np.searchsorted(r, s[mid]) - 1, 0, r.size - 2)
        pos = (v[i] > 0) & (v[i + 1] > 0)
        logv = np.interp(ls, lr, np.where(np.isfinite(lv), lv, 0.0))
        out[mid] = np.where(pos, np.exp(logv), lin)
    return out


def _origin(x) -> bool:
    return bool(np.all(np.atleast_1d(np.asarray(x, dtype=float)) == 0.0))


def _maximal(f, x, weight, per_decade, extra_radii):
    if isinstance(f, RadialProfile):
        if not _origin(x):
            raise ValueError("radial profiles are evaluated at the origin only")
        radii = np.unique(np.concatenate([f.radii, 4.0 * f.radii[-1:], np.asarray(extra_radii, dtype=float)]))
        means = _radial_means(f, radii)
    else:
        radii, means = ball_means(f, x, per_decade, extra_radii)
    return float(np.max(weight(radii) * means))


def hardy_littlewood(f, x, per_decade: int = RADIUS_PER_DECADE, extra_radii=()) -> float:
    """sup over the radius grid of the average of |f| over B(x, r)."""
    return _maximal(f, x, np.ones_like, per_decade, extra_radii)


def frac_maximal(kernel: Kernel, f, x, per_decade: int = RADIUS_PER_DECADE, extra_radii=()) -> float:
    """sup over the radius grid of rho(r) times the average of |f| over B(x, r)."""
    return _maximal(f, x, kernel.fn, per_decade, extra_radii)


NEAR_RING_CELLS = 16  # rings inside this many cells use lattice means


def _cached(kernel: Kernel, key, compute):
    if key not in kernel._cache:
        kernel._cache[key] = compute()
    return kernel._cache[key]


def _grid_potential(kernel: Kernel, f: GridFunction, x: np.ndarray, subdivisions: int) -> float:
    """Rings t0 2^(j/s), t0 = h/2, around x.

    Near rings (outer radius within NEAR_RING_CELLS cells) weight the
    lattice mean of f by the ring's kernel mass, merging empty rings
    forward; the innermost group uses rho*. Far rings weight the cell mass
    of f by the ring average of rho(t)/t^n, which is exact for rho = t^n.
    """
    reach = _support_reach(f, x)
    if reach == 0.0:
        return 0.0
    h, n = f.h, f.dim_n
    t0 = h / 2.0
    count = max(1, int(math.ceil(subdivisions * math.log2(reach * 1.0001 / t0))) + 1)
    edges = t0 * 2.0 ** (np.arange(count + 1) / subdivisions)
    sums, counts = _ball_sums(f, x, edges)
    sigma = sphere_area(n)
    ring_mass = _cached(
        kernel, ("ring_mass", t0, subdivisions, count),
        lambda: sigma * np.diff(cumulative_log_integral(kernel.fn, edges, breaks=kernel.breaks)),
    )
    m = int(np.argmax(counts > 0))
    e_m = float(edges[m])
    total = sums[m] / counts[m] * sigma * _cached(kernel, ("rho_star", e_m), lambda: rho_star(kernel, e_m))
    ring_sums = np.diff(sums)
    ring_counts = np.diff(counts)
    near_rings = edges[1:] <= NEAR_RING_CELLS * h
    pend_sum = pend_count = pend_mass = 0.0
    for j in range(m, count):
        if not near_rings[j]:
            break
        pend_sum += ring_sums[j]
        pend_count += ring_counts[j]
        pend_mass += ring_mass[j]
        if pend_count > 0:
            total += pend_sum / pend_count * pend_mass
            pend_sum = pend_count = pend_mass = 0.0
    far = ~near_rings
    far[:m] = False
    if np.any(far):
        measure = unit_ball_volume(n) * (edges[1:] ** n - edges[:-1] ** n)
        total += float(np.sum(ring_sums[far] * h**n * ring_mass[far] / measure[far]))
    return float(total)


def _radial_potential(kernel: Kernel, f: RadialProfile) -> float:
    sigma = sphere_area(f.dim_n)
    core = f.values[0] * rho_star(kernel, float(f.radii[0]))
    body = log_integral(lambda s: kernel.fn(s) * _interp_profile(f, s), float(f.radii[0]), float(f.radii[-1])).value
    return sigma * (core + body)


def frac_integral(kernel: Kernel, f, x, subdivisions: int = RING_SUBDIVISIONS) -> float:
    """I_rho f(x) by rings t0 2^(j/subdivisions) around x, near field through rho*."""
    if isinstance(f, RadialProfile):
        if not _origin(x):
            raise ValueError("radial profiles are evaluated at the origin only")
        if f.dim_n != kernel.dim_n:
            raise ValueError("kernel and profile dimensions differ")
        return _radial_potential(kernel, f)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if f.dim_n != kernel.dim_n or x.size != f.dim_n:
        raise ValueError("kernel, grid and point dimensions differ")
    return _grid_potential(kernel, f, x, subdivisions)


def apply_operator(
    operator: str,
    f,
    points,
    kernel: Kernel | None = None,
    per_decade: int = RADIUS_PER_DECADE,
    subdivisions: int = RING_SUBDIVISIONS,
) -> OperatorEvaluation:
    """Evaluate ``M``, ``M_rho`` or ``I_rho`` at each row of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1 and pts.shape[1] != getattr(f, "dim_n", pts.shape[1]):
        pts = pts.T
    if operator == "M":
        vals = [hardy_littlewood(f, p, per_decade) for p in pts]
        meta = {"radius_per_decade": per_decade}
    elif operator == "M_rho":
        vals = [frac_maximal(kernel, f, p, per_decade) for p in pts]
        meta = {"radius_per_decade": per_decade, "kernel": kernel.label}
    elif operator == "I_rho":
        vals = [frac_integral(kernel, f, p, subdivisions) for p in pts]
        meta = {"ring_subdivisions": subdivisions, "kernel": kernel.label}
    else:
        raise ValueError(f"unknown operator {operator!r}")
    return OperatorEvaluation(operator, pts, np.asarray(vals, dtype=float), meta)


# Pointwise lemmas ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LemmaReport:
    lemma: str
    constant: float  # sup of lhs / rhs with the lemma's constant set to 1
    lhs: np.ndarray
    rhs: np.ndarray
    holds: bool

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "constant": self.constant,
            "lhs": self.lhs.tolist(),
            "rhs": self.rhs.tolist(),
            "holds": self.holds,
        }


def _require(hypotheses, lemma: str):
    for rep in hypotheses:
        if rep.verdict != "pass":
            raise HypothesisError(f"{lemma}: hypothesis {rep.condition} is {rep.verdict}")


def _report(lemma, lhs, rhs, exact=False) -> LemmaReport:
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(lhs == 0, 0.0, lhs / rhs)
    constant = float(np.max(ratios)) if ratios.size else 0.0
    holds = bool(np.all(lhs <= rhs)) if exact else math.isfinite(constant)
    return LemmaReport(lemma, constant, lhs, rhs, holds)


def _hedberg(lemma, operator, kernel, f, points, phi, psi, c0, source_norm, hypotheses, per_decade, subdivisions):
    from .norms import luxemburg_norm

    _require(hypotheses, lemma)
    norm = source_norm if source_norm is not None else luxemburg_norm(f, phi).value
    ev = apply_operator(operator, f, points, kernel, per_decade, subdivisions)
    mf = apply_operator("M", f, ev.points, per_decade=per_decade).values
    if norm == 0:
        return _report(lemma, ev.values, np.zeros_like(ev.values))
    rhs = norm * generalized_inverse(psi, eval_young(phi, mf / (c0 * norm)))
    return _report(lemma, ev.values, rhs)


def hedberg_integral(
    kernel: Kernel,
    f,
    points,
    phi: YoungFunction,
    psi: YoungFunction,
    c0: float = 1.0,
    source_norm: float | None = None,
    hypotheses=(),
    per_decade: int = RADIUS_PER_DECADE,
    subdivisions: int = RING_SUBDIVISIONS,
) -> LemmaReport:
    """I_rho f(x) against ||f|| Psi^{-1}(Phi(Mf(x) / (c0 ||f||))) with ||f|| in L^Phi."""
    return _hedberg("hedberg_integral", "I_rho", kernel, f, points, phi, psi, c0, source_norm, hypotheses, per_decade, subdivisions)


def hedberg_maximal(
    kernel: Kernel,
    f,
    points,
    phi: YoungFunction,
    psi: YoungFunction,
    c0: float = 1.0,
    source_norm: float | None = None,
    hypotheses=(),
    per_decade: int = RADIUS_PER_DECADE,
) -> LemmaReport:
    """M_rho f(x) against the same Hedberg majorant."""
    return _hedberg("hedberg_maximal", "M_rho", kernel, f, points, phi, psi, c0, source_norm, hypotheses, per_decade, RING_SUBDIVISIONS)


def local_maximal(kernel: Kernel, f: GridFunction, x, r: float, hypotheses=(), per_decade: int = RADIUS_PER_DECADE) -> LemmaReport:
    """For f supported in B(x, r): M_rho f(x) against rho(r) Mf(x)."""
    _require(hypotheses, "local_maximal")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if _support_reach(f, x) >= r:
        raise HypothesisError("local_maximal: support of f is not inside B(x, r)")
    lhs = frac_maximal(kernel, f, x, per_decade)
    rhs = float(kernel.fn(np.array([r]))[0]) * hardy_littlewood(f, x, per_decade)
    return _report("local_maximal", [lhs], [rhs])


def _adams(lemma, operator, kernel, f, points, beta, morrey_value, hypotheses, per_decade, subdivisions):
    _require(hypotheses, lemma)
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    ev = apply_operator(operator, f, points, kernel, per_decade, subdivisions)
    mf = apply_operator("M", f, ev.points, per_decade=per_decade).values
    rhs = mf**beta * morrey_value ** (1.0 - beta)
    return _report(lemma, ev.values, rhs)


def pointwise_adams_integral(
    kernel: Kernel, f, points, beta: float, morrey_value: float, hypotheses=(),
    per_decade: int = RADIUS_PER_DECADE, subdivisions: int = RING_SUBDIVISIONS,
) -> LemmaReport:
    """I_rho f(x) against Mf(x)^beta times the Orlicz-Morrey norm to the power 1 - beta."""
    return _adams("pointwise_adams_integral", "I_rho", kernel, f, points, beta, morrey_value, hypotheses, per_decade, subdivisions)


def pointwise_adams_maximal(
    kernel: Kernel, f, points, beta: float, morrey_value: float, hypotheses=(),
    per_decade: int = RADIUS_PER_DECADE,
) -> LemmaReport:
    return _adams("pointwise_adams_maximal", "M_rho", kernel, f, points, beta, morrey_value, hypotheses, per_decade, RING_SUBDIVISIONS)


def _centred_ball_grid(kernel: Kernel, radius: float, box: float, cells: int) -> GridFunction:
    n = kernel.dim_n
    from .sampling import characteristic_ball

    return characteristic_ball(Ball((0.0,) * n, radius), [-box] * n, [box] * n, cells)


def trivial_lower(kernel: Kernel, r: float, points, cells: int = 512, per_decade: int = RADIUS_PER_DECADE) -> LemmaReport:
    """rho(r) chi_{B(0,r)}(x) against M_rho chi_{B(0,2r)}(x); must hold with no constant."""
    g = _centred_ball_grid(kernel, 2.0 * r, 4.0 * r, cells)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != kernel.dim_n:
        pts = pts.T
    rho_r = float(kernel.fn(np.array([r]))[0])
    lhs = np.where(np.linalg.norm(pts, axis=1) < r, rho_r, 0.0)
    rhs = np.array([frac_maximal(kernel, g, p, per_decade, extra_radii=[r]) for p in pts])
    return _report("trivial_lower", lhs, rhs, exact=True)


def potential_lower_bound(
    kernel: Kernel, r: float, points, cells: int = 512, subdivisions: int = RING_SUBDIVISIONS
) -> LemmaReport:
    """rho*(r/2) against I_rho chi_{B(0,r)}(x) for x in B(0, r/2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != kernel.dim_n:
        pts = pts.T
    if np.any(np.linalg.norm(pts, axis=1) >= r / 2):
        raise ValueError("evaluation points must lie in B(0, r/2)")
    g = _centred_ball_grid(kernel, r, 2.0 * r, cells)
    lower = rho_star(kernel, r / 2.0)
    rhs = np.array([frac_integral(kernel, g, p, subdivisions) for p in pts])
    return _report("potential_lower_bound", np.full(rhs.size, lower), rhs)
