"""Orlicz-Morrey norms of the third kind, the weight class G_Phi, triviality and weight normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dsl
from .norms import luxemburg_norm, prefix_norms, weak_norm
from .sampling import Ball, GridFunction, RadialProfile, SimpleFunction
from .young import YoungFunction, default_probe, generalized_inverse

__all__ = [
    "SLACK",
    "MorreyWeight",
    "weight_from_text",
    "power_weight",
    "inverse_weight",
    "MorreyNormResult",
    "default_lattice",
    "morrey_norm",
    "weak_morrey_norm",
    "GPhiEvidence",
    "g_phi_check",
    "ClauseOutcome",
    "TrivialityReport",
    "triviality_check",
    "normalize_weight",
]

SLACK = 1.05  # almost-monotone verdicts tolerate 5% before failing
CAP = 1e8
TREND_SLOPE = 0.05


@dataclass(frozen=True, eq=False)
class MorreyWeight:
    fn: object
    label: str
    dim_n: int = 1
    text: str | None = None
    evidence: dict = field(default_factory=dict, repr=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("weights are defined on (0, inf)")
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            out = np.asarray(self.fn(np.atleast_1d(t)), dtype=float)
        return float(out[0]) if t.ndim == 0 else out


def weight_from_text(text: str, dim_n: int = 1, bindings=None, label: str | None = None) -> MorreyWeight:
    env = {"n": float(dim_n)}
    env.update(bindings or {})
    ast = dsl.parse(text, env)
    return MorreyWeight(lambda t: dsl.evaluate(ast, t), label or text, dim_n, dsl.render(ast))


def power_weight(exponent: float, dim_n: int = 1) -> MorreyWeight:
    return MorreyWeight(lambda t: t**exponent, f"t^{exponent:g}", dim_n, f"t^{exponent!r}")


def inverse_weight(phi: YoungFunction, dim_n: int = 1, factor=None, label: str | None = None) -> MorreyWeight:
    """t -> Phi^{-1}(t^-n), optionally times ``factor(t)``."""
    n = dim_n

    def fn(t):
        base = generalized_inverse(phi, t ** (-float(n)))
        return base if factor is None else base * np.asarray(factor(t), dtype=float)

    return MorreyWeight(fn, label or f"inverse[{phi.label}]", dim_n)


def _inv_scale(phi: YoungFunction, n: int, t: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", divide="ignore"):
        return generalized_inverse(phi, np.power(t, -float(n)))


# Norms ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MorreyNormResult:
    value: float
    arg_sup: tuple  # (centre, radius)
    centers: np.ndarray
    radii: np.ndarray
    weak: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "arg_sup": {"center": list(self.arg_sup[0]), "radius": self.arg_sup[1]},
            "centers": int(len(self.centers)),
            "radii": int(len(self.radii)),
            "weak": self.weak,
        }


def default_lattice(f, centers_per_axis: int = 9, radii_count: int = 48, extra_centers=(), extra_radii=()):
    """Centres spread over the support box and log-spaced radii from one cell to 10^3 diameters."""
    if isinstance(f, RadialProfile):
        centers = np.zeros((1, f.dim_n))
        lo_r, hi_r = float(f.radii[0]), 1e3 * 2.0 * float(f.radii[-1])
    elif isinstance(f, GridFunction):
        pts = f.support_points()
        if pts.size == 0:
            pts = f.centers()
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        axes = [np.linspace(a, b, centers_per_axis) for a, b in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        centers = np.stack([m.ravel() for m in mesh], axis=1)
        diam = max(float(np.linalg.norm(hi - lo)), f.h)
        lo_r, hi_r = f.h, 1e3 * diam
    else:
        raise TypeError("Morrey norms need geometry: use a grid function or a radial profile")
    radii = np.logspace(math.log10(lo_r), math.log10(hi_r), radii_count)
    if len(extra_centers):
        centers = np.unique(np.concatenate([centers, np.atleast_2d(np.asarray(extra_centers, dtype=float))]), axis=0)
    radii = np.unique(np.concatenate([radii, np.asarray(extra_radii, dtype=float)]))
    return centers, radii


def _morrey(f, phi, weight, centers, radii, weak, extra_centers, extra_radii):
    if centers is None or radii is None:
        dc, dr = default_lattice(f, extra_centers=extra_centers, extra_radii=extra_radii)
        centers = dc if centers is None else np.atleast_2d(np.asarray(centers, dtype=float))
        radii = dr if radii is None else np.asarray(radii, dtype=float)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.sort(np.asarray(radii, dtype=float))
    n = weight.dim_n
    scale = _inv_scale(phi, n, radii) / weight(radii)
    local = weak_norm if weak else luxemburg_norm
    best, arg = 0.0, (tuple(float(c) for c in centers[0]), float(radii[0]))
    if isinstance(f, GridFunction):
        vals = f.values.ravel()
        support = vals > 0
        pts, vals = f.centers()[support], vals[support]
    for c in centers:
        if isinstance(f, GridFunction):
            # balls about one centre are nested, so each holds a prefix of the sorted cells
            dist = np.linalg.norm(pts - c[None, :], axis=1)
            order = np.argsort(dist, kind="stable")
            counts = np.searchsorted(dist[order], radii, side="left")
            distinct = np.unique(counts[counts > 0])
            norms = prefix_norms(vals[order], f.cell_volume, distinct, phi, weak)
            lookup = dict(zip(distinct.tolist(), norms.tolist()))
            for k, r, s in zip(counts.tolist(), radii, scale):
                if k == 0:
                    continue
                q = s * lookup[k]
                if q > best:
                    best, arg = q, (tuple(float(v) for v in c), float(r))
        else:
            for r, s in zip(radii, scale):
                if r <= f.radii[0]:
                    continue
                q = s * local(f, phi, Ball(tuple(c), r)).value
                if q > best:
                    best, arg = q, (tuple(float(v) for v in c), float(r))
    return MorreyNormResult(float(best), arg, centers, radii, weak)


def morrey_norm(f, phi: YoungFunction, weight: MorreyWeight, centers=None, radii=None, extra_centers=(), extra_radii=()) -> MorreyNormResult:
    """max over the (centre, radius) lattice of Phi^{-1}(r^-n) ||f||_{L^Phi(B(x,r))} / phi(r)."""
    return _morrey(f, phi, weight, centers, radii, False, extra_centers, extra_radii)


def weak_morrey_norm(f, phi: YoungFunction, weight: MorreyWeight, centers=None, radii=None, extra_centers=(), extra_radii=()) -> MorreyNormResult:
    return _morrey(f, phi, weight, centers, radii, True, extra_centers, extra_radii)


# Weight class --------------------------------------------------------------------


def _almost_constant(grid: np.ndarray, q: np.ndarray, increasing: bool):
    """Smallest C with q(r) <= C q(s) (increasing) or q(s) <= C q(r) (decreasing) for r < s on the grid."""
    if increasing:
        # compare each q(r) with the minimum of q over s >= r
        ref = np.minimum.accumulate(q[::-1])[::-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = q / ref
    else:
        ref = np.minimum.accumulate(q)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = q / ref
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    i = int(np.argmax(ratio))
    if increasing:
        j = i + int(np.argmin(q[i:]))
        witness = (float(grid[i]), float(grid[j]))
    else:
        j = int(np.argmin(q[: i + 1]))
        witness = (float(grid[j]), float(grid[i]))
    return float(ratio[i]), witness


def _window_verdict(grid, q, increasing) -> tuple[float, tuple, str]:
    decade = 10.0
    constant, witness = _almost_constant(grid, q, increasing)
    inner = (grid >= grid[0] * decade) & (grid <= grid[-1] / decade)
    inner2 = (grid >= grid[0] * decade**2) & (grid <= grid[-1] / decade**2)
    c1, _ = _almost_constant(grid[inner], q[inner], increasing)
    c2, _ = _almost_constant(grid[inner2], q[inner2], increasing)
    if not math.isfinite(constant) or constant > CAP:
        verdict = "fail"
    elif constant > SLACK * c1 and c1 > SLACK * c2:
        verdict = "fail"
    elif constant > SLACK * c1:
        verdict = "inconclusive"
    else:
        verdict = "pass"
    return constant, witness, verdict


@dataclass(frozen=True)
class GPhiEvidence:
    inc_constant: float
    dec_constant: float
    inc_verdict: str
    dec_verdict: str
    inc_witness: tuple
    dec_witness: tuple
    probe_range: tuple
    almost_decreasing_constant: float

    @property
    def member(self) -> bool:
        return self.inc_verdict == "pass" and self.dec_verdict == "pass"

    @property
    def verdict(self) -> str:
        if self.member:
            return "pass"
        if "fail" in (self.inc_verdict, self.dec_verdict):
            return "fail"
        return "inconclusive"

    def to_dict(self) -> dict:
        return {
            "inc_constant": self.inc_constant,
            "dec_constant": self.dec_constant,
            "verdict": self.verdict,
            "probe_range": list(self.probe_range),
        }


def g_phi_check(weight: MorreyWeight, phi: YoungFunction, probe=None) -> GPhiEvidence:
    """Almost-monotonicity constants of phi/Phi^{-1}(t^-n) (increasing) and phi/(Phi^{-1}(t^-n) t^n) (decreasing)."""
    grid = default_probe() if probe is None else np.asarray(probe, dtype=float)
    if math.log10(grid[-1] / grid[0]) < 8 - 1e-9:
        raise ValueError("probe must span at least 8 decades")
    n = weight.dim_n
    w = weight(grid)
    inv = _inv_scale(phi, n, grid)
    q1 = w / inv
    q2 = q1 / grid**n
    c_inc, w_inc, v_inc = _window_verdict(grid, q1, True)
    c_dec, w_dec, v_dec = _window_verdict(grid, q2, False)
    c_wdec, _ = _almost_constant(grid, w, False)
    ev = GPhiEvidence(c_inc, c_dec, v_inc, v_dec, w_inc, w_dec, (float(grid[0]), float(grid[-1])), c_wdec)
    weight.evidence[phi.label] = ev
    return ev


# Triviality ----------------------------------------------------------------------


@dataclass(frozen=True)
class ClauseOutcome:
    diverges: bool
    sup: float
    slope: float
    end: str


@dataclass(frozen=True)
class TrivialityReport:
    verdict: str  # trivial | nontrivial
    clauses: dict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "clauses": {k: vars(v) for k, v in self.clauses.items()}}


def _end_trend(grid, q, end: str) -> ClauseOutcome:
    if end == "infinity":
        window = grid >= grid[-1] / 10.0
    else:
        window = grid <= grid[0] * 10.0
    sup = float(np.max(q[window]))
    x, y = np.log(grid[window]), q[window]
    if np.any(~np.isfinite(y)):
        return ClauseOutcome(True, math.inf, math.inf, end)
    keep = y > 0
    if keep.sum() < 2:
        # the ratio vanishes at this end
        return ClauseOutcome(False, sup, -math.inf if end == "infinity" else math.inf, end)
    x, y = x[keep], y[keep]
    slope = float(np.polyfit(x, np.log(y), 1)[0])
    toward = slope if end == "infinity" else -slope
    diverges = toward > TREND_SLOPE or not math.isfinite(sup)
    return ClauseOutcome(diverges, sup, slope, end)


def triviality_check(weight: MorreyWeight, phi: YoungFunction, probe=None) -> TrivialityReport:
    """Evaluate the three sup clauses that force the Orlicz-Morrey space to be trivial."""
    grid = default_probe() if probe is None else np.asarray(probe, dtype=float)
    n = weight.dim_n
    w = weight(grid)
    inv = _inv_scale(phi, n, grid)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        large_scale = inv / w
        small_scale = 1.0 / w
        measure_scale = inv * grid**n / w
    clauses = {
        "large_radius": _end_trend(grid, large_scale, "infinity"),
        "small_radius": _end_trend(grid, small_scale, "zero"),
        "measure_normalized": _end_trend(grid, measure_scale, "zero"),
    }
    verdict = "trivial" if any(c.diverges for c in clauses.values()) else "nontrivial"
    return TrivialityReport(verdict, clauses)


# Normalization -------------------------------------------------------------------


def normalize_weight(weight: MorreyWeight, phi: YoungFunction, direction: str, probe=None) -> MorreyWeight:
    """Monotone replacement psi <= phi with an equivalent Morrey norm.

    ``inverse-monotone``: psi(r) = Phi^{-1}(r^-n) inf_{t >= r} phi(t)/Phi^{-1}(t^-n).
    ``measure-monotone``: psi(r) = Phi^{-1}(r^-n) r^n / sup_{t <= r} Phi^{-1}(t^-n) t^n / phi(t).
    The inf and sup run over the probe grid together with r itself.
    """
    grid = default_probe() if probe is None else np.asarray(probe, dtype=float)
    n = weight.dim_n
    inv = _inv_scale(phi, n, grid)
    w = weight(grid)
    if direction == "inverse-monotone":
        q = w / inv
        tail_inf = np.minimum.accumulate(q[::-1])[::-1]
        if not np.all(tail_inf > 0):
            raise ValueError("infimum vanishes: the Orlicz-Morrey space is trivial for this weight")

        def fn(t):
            t = np.asarray(t, dtype=float)
            own = np.asarray(weight(t)) / _inv_scale(phi, n, t)
            idx = np.searchsorted(grid, t, side="left")
            ahead = np.where(idx < grid.size, tail_inf[np.minimum(idx, grid.size - 1)], np.inf)
            return _inv_scale(phi, n, t) * np.minimum(own, ahead)

    elif direction == "measure-monotone":
        with np.errstate(divide="ignore", over="ignore"):
            q = inv * grid**n / w
        head_sup = np.maximum.accumulate(q)
        if not np.all(np.isfinite(head_sup)):
            raise ValueError("supremum diverges: the Orlicz-Morrey space is trivial for this weight")

        def fn(t):
            t = np.asarray(t, dtype=float)
            scale = _inv_scale(phi, n, t) * t**n
            own = scale / np.asarray(weight(t))
            idx = np.searchsorted(grid, t, side="right") - 1
            behind = np.where(idx >= 0, head_sup[np.maximum(idx, 0)], 0.0)
            return scale / np.maximum(own, behind)

    else:
        raise ValueError("direction must be 'inverse-monotone' or 'measure-monotone'")
    return MorreyWeight(fn, f"{direction}[{weight.label}]", n)
