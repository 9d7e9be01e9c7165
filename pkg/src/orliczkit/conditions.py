"""Boundedness conditions as suprema of explicit ratios over a radius grid.

Every condition reads ``numerator(r) <= C denominator(r)`` for all r > 0.
A check evaluates the ratio on a log grid, takes its sup, and fits the
slope of log(ratio) against log(r) over the outermost decade at each end.
Verdicts only certify the declared grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import Kernel, rho_star_many, weighted_tail_many
from .morrey import MorreyWeight, g_phi_check
from .young import YoungFunction, default_probe, generalized_inverse

__all__ = [
    "CONDITION_IDS",
    "FLAT_SLOPE",
    "CAP",
    "ConditionInputs",
    "ConditionReport",
    "default_grid",
    "check",
    "check_many",
    "example39_bounds",
]

FLAT_SLOPE = 0.05
CAP = 1e8
TAIL_EXTENSION = 1e3  # the shifted grid for sup_{t > r} reaches this factor past the top radius


def default_grid(lo: float = 1e-6, hi: float = 1e6, per_decade: int = 48) -> np.ndarray:
    return default_probe(lo, hi, per_decade)


@dataclass(frozen=True, eq=False)
class ConditionInputs:
    kernel: Kernel | None = None
    phi: YoungFunction | None = None
    psi: YoungFunction | None = None
    weight1: MorreyWeight | None = None
    weight2: MorreyWeight | None = None
    beta: float | None = None
    dim_n: int | None = None

    @property
    def n(self) -> int:
        if self.dim_n is not None:
            return self.dim_n
        if self.kernel is not None:
            return self.kernel.dim_n
        if self.weight1 is not None:
            return self.weight1.dim_n
        return 1

    def need(self, *names):
        missing = [k for k in names if getattr(self, k) is None]
        if missing:
            raise ValueError(f"missing inputs: {', '.join(missing)}")


@dataclass(frozen=True, eq=False)
class ConditionReport:
    condition: str
    sup_ratio: float
    arg_sup: float
    trend: dict  # {"low": ..., "high": ...}
    verdict: str
    grid: np.ndarray
    numerator: np.ndarray
    denominator: np.ndarray
    ratio: np.ndarray
    slopes: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "condition": self.condition,
            "sup_ratio": self.sup_ratio,
            "arg_sup": self.arg_sup,
            "trend": dict(self.trend),
            "slopes": dict(self.slopes),
            "verdict": self.verdict,
            "grid": [float(self.grid[0]), float(self.grid[-1]), int(self.grid.size)],
            "certified_range": "verdict certified on the declared grid only",
            **({"detail": self.detail} if self.detail else {}),
        }


def _trend(grid: np.ndarray, ratio: np.ndarray, end: str) -> tuple[str, float]:
    window = grid <= grid[0] * 10.0 if end == "low" else grid >= grid[-1] / 10.0
    y = ratio[window]
    if np.any(~np.isfinite(y)):
        return "growing", math.inf
    if np.all(y == 0) or (y[0 if end == "low" else -1] == 0):
        return "decaying", -math.inf
    keep = y > 0
    slope = float(np.polyfit(np.log(grid[window][keep]), np.log(y[keep]), 1)[0])
    # orient so that positive means growth toward the end of the grid
    toward = slope if end == "high" else -slope
    if abs(toward) < FLAT_SLOPE:
        return "flat", toward
    return ("growing" if toward > 0 else "decaying"), toward


def _report(cid: str, grid, num, den, detail=None) -> ConditionReport:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(num == 0, 0.0, num / den)
    undefined = np.isnan(ratio)
    ratio = np.where(undefined, np.inf, ratio)
    i = int(np.argmax(ratio))
    sup = float(ratio[i])
    low, s_low = _trend(grid, ratio, "low")
    high, s_high = _trend(grid, ratio, "high")
    if not math.isfinite(sup) or sup > CAP or "growing" in (low, high):
        verdict = "fail"
    else:
        verdict = "pass"
    return ConditionReport(
        cid, sup, float(grid[i]), {"low": low, "high": high}, verdict,
        np.asarray(grid, dtype=float), num, den, ratio, {"low": s_low, "high": s_high}, detail or {},
    )


def _inv(phi: YoungFunction, n: int, t: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", divide="ignore"):
        return generalized_inverse(phi, np.power(t, -float(n)))


def _morrey_evidence(inputs: ConditionInputs, pairs) -> dict:
    out = {}
    for wname, yname in pairs:
        w, y = getattr(inputs, wname), getattr(inputs, yname)
        if w is None or y is None:
            continue
        ev = w.evidence.get(y.label) or g_phi_check(w, y)
        out[f"{wname}_in_G[{yname}]"] = ev.verdict
    return out


def _orlicz_parts(inputs: ConditionInputs, grid):
    inputs.need("kernel", "phi", "psi")
    n = inputs.n
    inv_phi = _inv(inputs.phi, n, grid)
    head = inv_phi * rho_star_many(inputs.kernel, grid)
    tail = weighted_tail_many(inputs.kernel, lambda t: _inv(inputs.phi, n, np.asarray(t, dtype=float)), grid)
    return head, tail, _inv(inputs.psi, n, grid)


def _orlicz_sufficient(inputs, grid):
    head, tail, den = _orlicz_parts(inputs, grid)
    return head + tail, den, {}


def _orlicz_necessary(inputs, grid):
    inputs.need("kernel", "phi", "psi")
    n = inputs.n
    return _inv(inputs.phi, n, grid) * rho_star_many(inputs.kernel, grid), _inv(inputs.psi, n, grid), {}


def _orlicz_tail(inputs, grid):
    inputs.need("kernel", "phi", "psi")
    n = inputs.n
    tail = weighted_tail_many(inputs.kernel, lambda t: _inv(inputs.phi, n, np.asarray(t, dtype=float)), grid)
    return tail, _inv(inputs.psi, n, grid), {}


def _maximal_condition(inputs, grid):
    inputs.need("kernel", "phi", "psi")
    n = inputs.n
    return inputs.kernel.fn(grid) * _inv(inputs.phi, n, grid), _inv(inputs.psi, n, grid), {}


def _spanne_compat(inputs, grid):
    inputs.need("phi", "psi", "weight1", "weight2")
    n = inputs.n
    num = inputs.weight1(grid) / _inv(inputs.phi, n, grid)
    den = inputs.weight2(grid) / _inv(inputs.psi, n, grid)
    return num, den, _morrey_evidence(inputs, [("weight1", "phi"), ("weight2", "psi")])


def _weighted_kernel_tail(kernel: Kernel, weight: MorreyWeight, grid):
    return weighted_tail_many(kernel, lambda t: weight(np.asarray(t, dtype=float)), grid)


def _spanne_tail(inputs, grid):
    inputs.need("kernel", "weight1", "weight2")
    ev = _morrey_evidence(inputs, [("weight1", "phi"), ("weight2", "psi")])
    return _weighted_kernel_tail(inputs.kernel, inputs.weight1, grid), inputs.weight2(grid), ev


def _spanne_necessary(inputs, grid):
    inputs.need("kernel", "weight1", "weight2")
    ev = _morrey_evidence(inputs, [("weight1", "phi"), ("weight2", "psi")])
    return inputs.weight1(grid) * rho_star_many(inputs.kernel, grid), inputs.weight2(grid), ev


def _spanne_tail_selfbound(inputs, grid):
    inputs.need("kernel", "weight1")
    ev = _morrey_evidence(inputs, [("weight1", "phi")])
    num = _weighted_kernel_tail(inputs.kernel, inputs.weight1, grid)
    return num, inputs.weight1(grid) * inputs.kernel.fn(grid), ev


def _eta(inputs, grid):
    inputs.need("beta")
    return inputs.weight1(grid) ** inputs.beta


def _adams_sufficient(inputs, grid):
    inputs.need("kernel", "weight1", "beta")
    ev = _morrey_evidence(inputs, [("weight1", "phi")])
    w = inputs.weight1(grid)
    num = w * rho_star_many(inputs.kernel, grid) + _weighted_kernel_tail(inputs.kernel, inputs.weight1, grid)
    return num, _eta(inputs, grid), ev


def _adams_necessary(inputs, grid):
    inputs.need("kernel", "weight1", "beta")
    ev = _morrey_evidence(inputs, [("weight1", "phi")])
    return inputs.weight1(grid) * rho_star_many(inputs.kernel, grid), _eta(inputs, grid), ev


def _adams_tail_selfbound(inputs, grid):
    inputs.need("kernel", "weight1")
    ev = _morrey_evidence(inputs, [("weight1", "phi")])
    num = _weighted_kernel_tail(inputs.kernel, inputs.weight1, grid)
    return num, inputs.kernel.fn(grid) * inputs.weight1(grid), ev


def _spanne_max_sup(inputs, grid):
    inputs.need("kernel", "weight1", "weight2")
    ev = _morrey_evidence(inputs, [("weight1", "phi"), ("weight2", "psi")])
    step = math.log(grid[1] / grid[0])
    extra = int(math.ceil(math.log(TAIL_EXTENSION) / step))
    shifted = np.concatenate([grid, grid[-1] * np.exp(step * np.arange(1, extra + 1))])
    with np.errstate(over="ignore", invalid="ignore"):
        prod = inputs.weight1(shifted) * inputs.kernel.fn(shifted)
    prod = np.where(np.isnan(prod), 0.0, prod)
    # sup over t > r: suffix maximum starting one node to the right
    suffix = np.maximum.accumulate(prod[::-1])[::-1]
    num = suffix[1 : grid.size + 1]
    return num, inputs.weight2(grid), ev


def _spanne_max_necessary(inputs, grid):
    inputs.need("kernel", "weight1", "weight2")
    ev = _morrey_evidence(inputs, [("weight1", "phi"), ("weight2", "psi")])
    return inputs.weight1(grid) * inputs.kernel.fn(grid), inputs.weight2(grid), ev


def _adams_max(inputs, grid):
    inputs.need("kernel", "weight1", "beta")
    ev = _morrey_evidence(inputs, [("weight1", "phi")])
    return inputs.kernel.fn(grid), inputs.weight1(grid) ** (inputs.beta - 1.0), ev


_EVALUATORS = {
    "orlicz_sufficient": _orlicz_sufficient,
    "orlicz_necessary": _orlicz_necessary,
    "orlicz_tail": _orlicz_tail,
    "maximal_condition": _maximal_condition,
    "spanne_compat": _spanne_compat,
    "spanne_tail": _spanne_tail,
    "spanne_necessary": _spanne_necessary,
    "spanne_tail_selfbound": _spanne_tail_selfbound,
    "adams_sufficient": _adams_sufficient,
    "adams_necessary": _adams_necessary,
    "adams_tail_selfbound": _adams_tail_selfbound,
    "spanne_max_sup": _spanne_max_sup,
    "spanne_max_necessary": _spanne_max_necessary,
    "adams_max": _adams_max,
}
CONDITION_IDS = tuple(_EVALUATORS)


def check(condition: str, inputs: ConditionInputs, grid=None) -> ConditionReport:
    """Evaluate one condition on the grid (default 1e-6 .. 1e6, 48 points per decade)."""
    if condition not in _EVALUATORS:
        raise ValueError(f"unknown condition {condition!r}; expected one of {', '.join(CONDITION_IDS)}")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 8 or np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise ValueError("grid must be positive, increasing and hold at least 8 points")
    num, den, detail = _EVALUATORS[condition](inputs, grid)
    return _report(condition, grid, num, den, detail)


def check_many(conditions, inputs: ConditionInputs, grid=None) -> dict:
    return {c: check(c, inputs, grid) for c in conditions}


def example39_bounds(kernel: Kernel, phi: YoungFunction, psi: YoungFunction, grid=None) -> dict:
    """Constants in the three asymptotic bounds attached to the example39 kernel and Young pair.

    Returns, per bound, the largest ratio against its profile (and for the
    two-sided Psi^{-1} bound also the reciprocal), together with the overall
    constant.
    """
    grid = default_grid(1e-4, 1e4) if grid is None else np.asarray(grid, dtype=float)
    n = kernel.dim_n
    e = math.e
    power = grid ** (-2.0 * n / 3.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        inner = np.log(np.exp(e) / grid)
        loglog = np.where(inner > 1.0, np.log(np.maximum(inner, 1.0)), np.inf)
    head_profile = np.minimum(1.0, power)
    tail_profile = np.minimum(loglog, power)
    head = _inv(phi, n, grid) * rho_star_many(kernel, grid)
    tail = weighted_tail_many(kernel, lambda t: _inv(phi, n, np.asarray(t, dtype=float)), grid)
    inv_psi = _inv(psi, n, grid)
    c_head = float(np.max(head / head_profile))
    c_tail = float(np.max(tail / tail_profile))
    psi_ratio = inv_psi / tail_profile
    c_psi = float(max(np.max(psi_ratio), np.max(1.0 / psi_ratio)))
    return {
        "head": c_head,
        "tail": c_tail,
        "psi_inverse": c_psi,
        "constant": max(c_head, c_tail, c_psi),
        "grid": [float(grid[0]), float(grid[-1]), int(grid.size)],
    }
