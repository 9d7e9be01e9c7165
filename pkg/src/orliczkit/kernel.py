"""Kernels rho on (0, inf): derived integrals and admissibility checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dsl
from .quadrature import (
    PER_DECADE,
    Integral,
    cumulative_log_integral,
    improper_log_integral,
    log_integral,
)
from .young import parse_exponent

__all__ = [
    "Kernel",
    "ConditionOutcome",
    "KernelReport",
    "builtin_kernel",
    "kernel_from_text",
    "rho_star",
    "rho_star_many",
    "rho_tilde",
    "weighted_tail",
    "weighted_tail_many",
    "check_kernel_conditions",
    "check_maximal_admissible",
    "dyadic_sums",
    "K_LATTICE",
]

K_LATTICE = tuple((a, b) for a in (0.25, 0.5, 1.0) for b in (2.0, 4.0, 8.0))
PAPER16_TEXT = "piecewise(t<1: t^n*ln(e/t)^(-1/2); t>=1: exp(-(t-1)))"


@dataclass(frozen=True, eq=False)
class Kernel:
    fn: Callable[[np.ndarray], np.ndarray]
    dim_n: int = 1
    k1: float = 0.5
    k2: float = 2.0
    label: str = "kernel"
    text: str | None = None
    breaks: tuple = ()  # abscissae where rho may have a kink
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.dim_n < 1:
            raise ValueError("dimension must be a positive integer")
        if not (0 < self.k1 < self.k2):
            raise ValueError("kernel constants need 0 < k1 < k2")

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr <= 0):
            raise ValueError("kernels are evaluated on (0, inf)")
        with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
            out = np.asarray(self.fn(np.atleast_1d(arr)), dtype=float)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def with_constants(self, k1: float, k2: float) -> "Kernel":
        return Kernel(self.fn, self.dim_n, k1, k2, self.label, self.text, self.breaks)

    def __repr__(self) -> str:
        return f"Kernel({self.label!r}, n={self.dim_n})"


def kernel_from_text(text: str, dim_n: int = 1, bindings=None, k1: float = 0.5, k2: float = 2.0) -> Kernel:
    env = {"n": dim_n}
    env.update(bindings or {})
    ast = dsl.parse(text, env)
    return Kernel(lambda t: dsl.evaluate(ast, t), dim_n, k1, k2, text, dsl.render(ast), dsl.breakpoints(ast))


def builtin_kernel(name: str, dim_n: int = 1, k1: float = 0.5, k2: float = 2.0) -> Kernel:
    """Builtin kernels: ``power:alpha``, ``paper16`` and ``one``."""
    if name.startswith("power:"):
        alpha = parse_exponent(name.split(":", 1)[1])
        return Kernel(lambda t: np.power(t, alpha), dim_n, k1, k2, name, f"t^{alpha!r}")
    if name == "one":
        return Kernel(lambda t: np.ones_like(t), dim_n, k1, k2, "one", "1")
    if name == "paper16":
        n = dim_n

        def fn(t):
            out = np.empty_like(t)
            lo = t < 1.0
            out[lo] = t[lo] ** n / np.sqrt(np.log(math.e / t[lo]))
            out[~lo] = np.exp(-(t[~lo] - 1.0))
            return out

        return Kernel(fn, dim_n, k1, k2, "paper16", dsl.render(dsl.parse(PAPER16_TEXT, {"n": n})), (1.0,))
    raise ValueError(f"unknown kernel {name!r}")


# rho_star lives on a fixed log lattice per kernel: the integral below FLOOR plus
# running sums of positive Gauss-Legendre cell increments. Every query reads the
# same table, so values are nondecreasing in r and independent of call order.
STAR_FLOOR_DECADE = -200
STAR_TOP_DECADE = 300
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(5)


def _gauss_log(fn, lo, hi):
    """Integral of fn(t) dt/t over [exp(lo), exp(hi)] per row, lo and hi in log space."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    mid, half = (hi + lo) / 2.0, (hi - lo) / 2.0
    u = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        vals = np.asarray(fn(np.exp(u).ravel()), dtype=float).reshape(u.shape)
        return half * (vals @ _GAUSS_W)


def _star_table(kernel: Kernel, per_decade: int):
    key = ("star_table", per_decade)
    if key not in kernel._cache:
        cells = max(8, per_decade // 4)
        steps = np.arange(STAR_FLOOR_DECADE * cells, STAR_TOP_DECADE * cells + 1) / cells
        extra = [math.log10(b) for b in kernel.breaks if STAR_FLOOR_DECADE < math.log10(b) < STAR_TOP_DECADE]
        nodes = np.unique(np.concatenate([steps, extra])) * math.log(10.0)
        tail = improper_log_integral(kernel.fn, math.exp(nodes[0]), "zero", 10.0, per_decade, breaks=kernel.breaks)
        if tail.diverged:
            run = np.full(nodes.size, math.inf)
        else:
            inc = _gauss_log(kernel.fn, nodes[:-1], nodes[1:])
            inc = np.where(np.isnan(inc), math.inf, np.maximum(inc, 0.0))
            run = tail.value + np.concatenate([[0.0], np.cumsum(inc)])
        kernel._cache[key] = (nodes, run, tail)
    return kernel._cache[key]


def _star_values(kernel: Kernel, rs: np.ndarray, per_decade: int) -> np.ndarray:
    nodes, run, tail = _star_table(kernel, per_decade)
    u = np.log(rs)
    out = np.empty(rs.shape)
    low = u < nodes[0]
    for i in np.flatnonzero(low):
        out[i] = improper_log_integral(kernel.fn, float(rs[i]), "zero", 10.0, per_decade, breaks=kernel.breaks).value
    high = u > nodes[-1]
    out[high] = math.inf
    mid = ~(low | high)
    if np.any(mid):
        j = np.clip(np.searchsorted(nodes, u[mid], side="right") - 1, 0, nodes.size - 2)
        with np.errstate(invalid="ignore"):
            part = _gauss_log(kernel.fn, nodes[j], u[mid])
            part = np.clip(np.nan_to_num(part, nan=0.0), 0.0, run[j + 1] - run[j])
            out[mid] = np.where(np.isfinite(run[j]), run[j] + part, math.inf)
    return out


def rho_star_detail(kernel: Kernel, r: float, per_decade: int = PER_DECADE) -> Integral:
    if r <= 0:
        raise ValueError("r must be positive")
    tail = _star_table(kernel, per_decade)[2]
    value = float(_star_values(kernel, np.array([float(r)]), per_decade)[0])
    return Integral(value, tail.error, tail.diverged or not math.isfinite(value), float(r))


def rho_star(kernel: Kernel, r: float, per_decade: int = PER_DECADE) -> float:
    """Integral of rho(t)/t over (0, r); ``inf`` flags divergence at 0."""
    return rho_star_detail(kernel, r, per_decade).value


def rho_star_many(kernel: Kernel, rs, per_decade: int = PER_DECADE) -> np.ndarray:
    rs = np.asarray(rs, dtype=float)
    if np.any(rs <= 0):
        raise ValueError("r must be positive")
    return _star_values(kernel, rs.ravel(), per_decade).reshape(rs.shape)


def rho_tilde(kernel: Kernel, r, per_decade: int = PER_DECADE):
    """Integral of rho(s)/s over [k1 r, k2 r]."""
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(arr <= 0):
        raise ValueError("r must be positive")
    m = 2 * max(8, int(math.ceil(per_decade * math.log10(kernel.k2 / kernel.k1))))
    frac = np.linspace(0.0, 1.0, m + 1)
    u = np.log(kernel.k1 * arr)[:, None] + frac[None, :] * math.log(kernel.k2 / kernel.k1)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        vals = kernel.fn(np.exp(u).ravel()).reshape(u.shape)
        fine = np.trapezoid(vals, u, axis=1)
        coarse = np.trapezoid(vals[:, ::2], u[:, ::2], axis=1)
        out = fine + (fine - coarse) / 3.0
    return float(out[0]) if np.ndim(r) == 0 else out


def _tail_integrand(kernel: Kernel, g):
    def fn(t):
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            prod = kernel.fn(t) * np.asarray(g(t), dtype=float)
        return np.where(np.isnan(prod), 0.0, prod)

    return fn


def weighted_tail_detail(kernel: Kernel, g, r: float, per_decade: int = PER_DECADE) -> Integral:
    if r <= 0:
        raise ValueError("r must be positive")
    return improper_log_integral(_tail_integrand(kernel, g), r, "infinity", 2.0, per_decade, breaks=kernel.breaks)


def weighted_tail(kernel: Kernel, g, r: float, per_decade: int = PER_DECADE) -> float:
    """Integral of rho(t) g(t)/t over (r, inf); ``inf`` flags divergence."""
    return weighted_tail_detail(kernel, g, r, per_decade).value


def weighted_tail_many(kernel: Kernel, g, rs, per_decade: int = PER_DECADE) -> np.ndarray:
    rs = np.asarray(rs, dtype=float)
    order = np.argsort(rs)
    sorted_r = rs[order]
    fn = _tail_integrand(kernel, g)
    top = improper_log_integral(fn, float(sorted_r[-1]), "infinity", 2.0, per_decade, breaks=kernel.breaks).value
    run = cumulative_log_integral(fn, sorted_r, per_decade, kernel.breaks)
    vals = top + (run[-1] - run)
    out = np.empty_like(rs)
    out[order] = vals
    return out


# Admissibility -----------------------------------------------------------------


@dataclass(frozen=True)
class ConditionOutcome:
    holds: str  # pass | fail | inconclusive
    empirical_constant: float
    witness: tuple = ()
    detail: str = ""


@dataclass(frozen=True)
class KernelReport:
    outcomes: dict
    probe_range: tuple
    constants: tuple = ()  # (k1, k2) used for the local sup bound

    def __getitem__(self, key: str) -> ConditionOutcome:
        return self.outcomes[key]


GROWTH_PER_DECADE = 0.01
CAP = 1e8


def default_kernel_probe() -> np.ndarray:
    return np.logspace(-6, 6, 12 * 48 + 1)


def _running_growth(grid: np.ndarray, q_low: np.ndarray, q_high: np.ndarray):
    """Log-increase of the running sup over the outer decades at each end.

    ``q_low[i]`` is the largest ratio with smaller point ``grid[i]`` and
    ``q_high[i]`` the largest ratio whose larger point is ``grid[i]``.
    """
    lg = np.log10(grid)

    def increments(mask_fn, q):
        marks = []
        for j in range(4):
            sel = mask_fn(j)
            vals = q[sel]
            marks.append(float(np.max(vals)) if vals.size else 0.0)
        out = []
        for j in range(3):
            a, b = marks[j], marks[j + 1]
            if a == b:
                out.append(0.0)
            elif b <= 0 or not math.isfinite(a):
                out.append(math.inf if a > b else 0.0)
            else:
                out.append(math.log(a / b))
        return out

    low = increments(lambda j: lg >= lg[0] + j, q_low)
    high = increments(lambda j: lg <= lg[-1] - j, q_high)
    return low, high


def _verdict(grid, q_low, q_high, sup_value, witness, label) -> ConditionOutcome:
    low, high = _running_growth(grid, q_low, q_high)
    if not math.isfinite(sup_value) or sup_value > CAP:
        return ConditionOutcome("fail", sup_value, witness, f"{label}: ratio unbounded on probe")
    for side, inc in (("lower", low), ("upper", high)):
        if inc[0] > GROWTH_PER_DECADE and inc[1] > GROWTH_PER_DECADE:
            return ConditionOutcome("fail", sup_value, witness, f"{label}: ratio still growing at the {side} end")
    for side, inc in (("lower", low), ("upper", high)):
        if inc[0] > GROWTH_PER_DECADE:
            return ConditionOutcome("inconclusive", sup_value, witness, f"{label}: trend at the {side} end")
    return ConditionOutcome("pass", sup_value, witness, label)


def _positive_span(kernel: Kernel, grid: np.ndarray, lo_factor: float, hi_factor: float) -> np.ndarray:
    """Probe points where rho is positive and finite over [lo_factor r, hi_factor r]."""
    keep = np.ones(grid.shape, dtype=bool)
    for f in np.linspace(lo_factor, hi_factor, 9):
        v = kernel(grid * f)
        keep &= (v > 0) & np.isfinite(v)
    return grid[keep]


def _integrability(kernel: Kernel) -> ConditionOutcome:
    res = rho_star_detail(kernel, 1.0)
    if res.diverged:
        return ConditionOutcome("fail", math.inf, (res.reach,), "integral of rho(t)/t diverges near 0")
    return ConditionOutcome("pass", res.value, (1.0,), "integral of rho(t)/t over (0, 1)")


def _doubling(kernel: Kernel, grid: np.ndarray) -> ConditionOutcome:
    g = _positive_span(kernel, grid, 0.5, 2.0)
    if g.size < 2:
        return ConditionOutcome("inconclusive", math.nan, (), "doubling: empty probe")
    base = kernel(g)
    q = np.ones(g.shape)
    arg = np.zeros(g.shape)
    for j in range(-8, 9):
        other = kernel(g * 2.0 ** (j / 8.0))
        with np.errstate(divide="ignore", over="ignore"):
            cand = np.maximum(other / base, base / other)
        better = cand > q
        q = np.where(better, cand, q)
        arg = np.where(better, j, arg)
    i = int(np.argmax(q))
    witness = (float(g[i]), float(g[i] * 2.0 ** (arg[i] / 8.0)))
    return _verdict(g, q, q, float(q[i]), witness, "doubling")


def _almost_decreasing(kernel: Kernel, grid: np.ndarray) -> ConditionOutcome:
    g = _positive_span(kernel, grid, 1.0, 1.0)
    if g.size < 2:
        return ConditionOutcome("inconclusive", math.nan, (), "almost decreasing: empty probe")
    h = kernel(g) / g**kernel.dim_n
    suffix = np.maximum.accumulate(h[::-1])[::-1]
    later = np.concatenate([suffix[1:], [0.0]])
    q_low = later / h
    prefix = np.minimum.accumulate(h)
    earlier = np.concatenate([[np.inf], prefix[:-1]])
    q_high = h / earlier
    i = int(np.argmax(q_low))
    j = i + 1 + int(np.argmax(h[i + 1 :])) if i + 1 < h.size else i
    sup = max(1.0, float(q_low[i]))
    return _verdict(g, q_low, q_high, sup, (float(g[i]), float(g[j])), "almost decreasing")


def _local_sup_ratio(kernel: Kernel, g: np.ndarray) -> np.ndarray:
    peak = np.zeros(g.shape)
    for j in range(17):
        peak = np.maximum(peak, kernel(g * 2.0 ** (-j / 16.0)))
    return peak / rho_tilde(kernel, g)


def _local_sup(kernel: Kernel, grid: np.ndarray) -> ConditionOutcome:
    g = _positive_span(kernel, grid, min(0.5, kernel.k1), kernel.k2)
    if g.size < 2:
        return ConditionOutcome("inconclusive", math.nan, (), "local sup: empty probe")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = _local_sup_ratio(kernel, g)
    q = np.where(np.isnan(q), np.inf, q)
    i = int(np.argmax(q))
    return _verdict(g, q, q, float(q[i]), (float(g[i]),), f"local sup with k1={kernel.k1:g}, k2={kernel.k2:g}")


def check_kernel_conditions(kernel: Kernel, probe=None, lattice=K_LATTICE) -> KernelReport:
    """Integrability at 0, doubling, almost-decreasing rho/t^n and the local sup bound.

    The local sup bound is tried with the kernel's own (k1, k2) first and
    then with every pair in ``lattice``; the first passing pair is reported.
    """
    grid = np.sort(np.asarray(default_kernel_probe() if probe is None else probe, dtype=float))
    if math.log10(grid[-1] / grid[0]) < 8 - 1e-9:
        raise ValueError("kernel probes must span at least 8 decades")
    outcomes = {
        "integrability": _integrability(kernel),
        "doubling": _doubling(kernel, grid),
        "almost_decreasing": _almost_decreasing(kernel, grid),
    }
    local = _local_sup(kernel, grid)
    used = (kernel.k1, kernel.k2)
    if local.holds != "pass":
        for k1, k2 in lattice:
            cand = _local_sup(kernel.with_constants(k1, k2), grid)
            if cand.holds == "pass":
                local, used = cand, (k1, k2)
                break
    outcomes["local_sup"] = local
    return KernelReport(outcomes, (float(grid[0]), float(grid[-1])), used)


def check_maximal_admissible(kernel: Kernel, probe=None) -> KernelReport:
    """rho nondecreasing and t^-n rho(t) nonincreasing across consecutive probes."""
    grid = np.sort(np.asarray(default_kernel_probe() if probe is None else probe, dtype=float))
    v = kernel(grid)
    h = v / grid**kernel.dim_n
    out = {}
    for name, arr, bad_fn in (
        ("increasing", v, lambda a: a[1:] < a[:-1] * (1 - 1e-12)),
        ("normalized_decreasing", h, lambda a: a[1:] > a[:-1] * (1 + 1e-12)),
    ):
        bad = np.nonzero(bad_fn(arr))[0]
        if bad.size:
            i = int(bad[0])
            out[name] = ConditionOutcome("fail", math.nan, (float(grid[i]), float(grid[i + 1])))
        else:
            out[name] = ConditionOutcome("pass", 1.0)
    return KernelReport(out, (float(grid[0]), float(grid[-1])))


def dyadic_sums(kernel: Kernel, r: float, tau=None, terms_rtol: float = 1e-12):
    """Dyadic sums of rho-tilde and the integrals that dominate them.

    Returns ``(low_sum, low_integral, high_sum, high_integral)`` where the
    low pair compares the sum over j <= -1 of rho-tilde(2^j r) with the
    integral of rho(s)/s over (0, k2 r), and the high pair compares the sum
    over j >= 0 of rho-tilde(2^j r) tau((2^j r)^-n) with the integral of
    rho(s) tau(s^-n)/s over (k1 r, inf).
    """
    n = kernel.dim_n
    tau = tau or (lambda u: np.ones_like(np.asarray(u, dtype=float)))

    def summed(sign):
        # a sum whose terms have not fallen below terms_rtol by the end of the float range diverges
        total, j = 0.0, 0 if sign > 0 else -1
        while 1e-300 < 2.0**j * r < 1e300:
            s = 2.0**j * r
            term = float(rho_tilde(kernel, s)) * (float(np.asarray(tau(np.array([s ** (-n)])))[0]) if sign > 0 else 1.0)
            total += term
            if not math.isfinite(total):
                return math.inf
            if term <= terms_rtol * total:
                return total
            j += sign
        return math.inf

    low = summed(-1)
    high = summed(+1)
    low_int = rho_star(kernel, kernel.k2 * r)
    high_int = weighted_tail(kernel, lambda s: np.asarray(tau(np.asarray(s, dtype=float) ** (-n)), dtype=float), kernel.k1 * r)
    return low, low_int, high, high_int
