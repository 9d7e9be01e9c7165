"""Young functions: evaluation, generalized inverse, conjugate and growth tests.

A :class:`YoungFunction` wraps a vectorised callable defined for finite
``t >= 0``. ``Phi(inf)`` is always ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import dsl

__all__ = [
    "YoungFunction",
    "GrowthReport",
    "InverseIdentityReport",
    "young_from_text",
    "builtin_young",
    "eval_young",
    "generalized_inverse",
    "complementary",
    "growth_class",
    "verify_inverse_identities",
    "power_scale",
    "default_probe",
]

_BISECT_STEPS = 200
_DOUBLING_CAP = 100  # upper bracket never exceeds 2**100
_HALVING_CAP = 1074  # down to the smallest subnormal


def default_probe(lo: float = 1e-6, hi: float = 1e6, per_decade: int = 48) -> np.ndarray:
    decades = math.log10(hi / lo)
    return np.logspace(math.log10(lo), math.log10(hi), int(round(decades * per_decade)) + 1)


@dataclass(frozen=True, eq=False)
class YoungFunction:
    fn: Callable[[np.ndarray], np.ndarray]
    label: str
    finite_valued: bool = True
    jump_point: float | None = None
    text: str | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, r):
        return eval_young(self, r)

    def inverse(self, s):
        return generalized_inverse(self, s)

    def conjugate(self) -> "YoungFunction":
        if "conjugate" not in self._cache:
            self._cache["conjugate"] = complementary(self)
        return self._cache["conjugate"]

    def __repr__(self) -> str:
        return f"YoungFunction({self.label!r})"


def young_from_text(text: str, bindings=None, label: str | None = None) -> YoungFunction:
    """Build a Young function from DSL text; a literal ``inf`` marks a jump."""
    ast = dsl.parse(text, bindings)
    phi = YoungFunction(lambda t: dsl.evaluate(ast, t), label or text, True, None, dsl.render(ast))
    if dsl.contains_inf(ast):
        jump = _locate_jump(phi)
        phi = YoungFunction(phi.fn, phi.label, jump is None, jump, phi.text)
    return phi


def _locate_jump(phi: YoungFunction) -> float | None:
    hi = 1.0
    for _ in range(_DOUBLING_CAP):
        if np.isinf(phi.fn(np.array([hi])))[0]:
            break
        hi *= 2.0
    else:
        return None
    lo = 0.0
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if np.isinf(phi.fn(np.array([mid])))[0]:
            hi = mid
        else:
            lo = mid
    return lo


def _power(p: float) -> YoungFunction:
    if p < 1:
        raise ValueError(f"t^{p} is not convex for p < 1")
    return YoungFunction(lambda t: np.power(t, p), f"power:{p:g}", True, None, f"t^{p!r}")


def _linf_fn(t):
    return np.where(t <= 1.0, 0.0, np.inf)


def _ex39_phi(t):
    out = np.empty_like(t)
    lo = t <= 1.0
    out[lo] = t[lo] ** 1.5
    hi = ~lo
    out[hi] = t[hi] * np.sqrt(np.log(math.e * t[hi]))
    return out


_EX39_SCALE = 2.0 * math.e / 3.0


def _ex39_psi(t):
    out = np.empty_like(t)
    lo = t <= 1.0
    out[lo] = _EX39_SCALE * t[lo] ** 1.5
    hi = ~lo
    with np.errstate(over="ignore"):
        # exp(exp(t) - e) keeps the quotient exp(exp t)/exp(exp 1) representable longer
        out[hi] = _EX39_SCALE * np.exp(np.exp(t[hi]) - math.e)
    return out


EX39_PHI_TEXT = "piecewise(t<=1: t^(3/2); t>1: t*ln(e*t)^(1/2))"
EX39_PSI_TEXT = "piecewise(t<=1: (2*e/3)*t^(3/2); t>1: (2*e/3)*exp(exp(t) - e))"


def parse_exponent(text: str) -> float:
    """A decimal or a fraction such as ``4/3``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad exponent {text!r}") from exc


def builtin_young(name: str) -> YoungFunction:
    """Builtin families: ``power:p``, ``linf``, ``example39_phi``, ``example39_psi``."""
    if name.startswith("power:"):
        return _power(parse_exponent(name.split(":", 1)[1]))
    if name == "linf":
        return YoungFunction(_linf_fn, "linf", False, 1.0, "piecewise(t<=1: 0; t>1: inf)")
    if name == "example39_phi":
        return YoungFunction(_ex39_phi, "example39_phi", True, None, EX39_PHI_TEXT)
    if name == "example39_psi":
        return YoungFunction(_ex39_psi, "example39_psi", True, None, EX39_PSI_TEXT)
    raise ValueError(f"unknown Young function {name!r}")


def _as_array(r):
    arr = np.asarray(r, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise ValueError("Young functions are defined on [0, inf]")
    return arr


def eval_young(phi: YoungFunction, r):
    """Phi(r) for scalar or array ``r`` in [0, inf]."""
    arr = _as_array(r)
    flat = np.atleast_1d(arr).ravel()
    out = np.full(flat.shape, np.inf)
    finite = np.isfinite(flat)
    if np.any(finite):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
            vals = np.asarray(phi.fn(flat[finite]), dtype=float)
        if np.any(np.isnan(vals)):
            raise ValueError(f"{phi.label}: evaluation produced NaN")
        out[finite] = vals
    out = out.reshape(np.atleast_1d(arr).shape)
    return float(out[0]) if arr.ndim == 0 else out


def generalized_inverse(phi: YoungFunction, s):
    """inf{r >= 0 : Phi(r) > s}, by bracket doubling and bisection.

    The returned value is the lower end of the final bracket, so
    ``Phi(result) <= s`` holds exactly.
    """
    arr = _as_array(s)
    flat = np.atleast_1d(arr).ravel().copy()
    out = np.full(flat.shape, np.inf)
    todo = np.isfinite(flat)
    if np.any(todo):
        target = flat[todo]
        lo = np.zeros_like(target)
        hi = np.ones_like(target)
        unbounded = np.zeros(target.shape, dtype=bool)
        for _ in range(_DOUBLING_CAP + 1):
            grow = (eval_young(phi, hi) <= target) & ~unbounded
            if not np.any(grow):
                break
            lo = np.where(grow, hi, lo)
            hi = np.where(grow, hi * 2.0, hi)
            unbounded |= grow & (hi > 2.0**_DOUBLING_CAP)
        # small s: shrink the bracket geometrically so bisection keeps relative precision
        for _ in range(_HALVING_CAP):
            shrink = (lo == 0.0) & (target > 0.0) & (eval_young(phi, 0.5 * hi) > target)
            if not np.any(shrink):
                break
            hi = np.where(shrink, 0.5 * hi, hi)
        for _ in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            above = eval_young(phi, mid) > target
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        res = np.where(unbounded, np.inf, lo)
        out[todo] = res
    out = out.reshape(np.atleast_1d(arr).shape)
    return float(out[0]) if arr.ndim == 0 else out


# Conjugate ------------------------------------------------------------------

_S_GRID = np.concatenate([[0.0], np.logspace(-9, 9, 18 * 20 + 1)])
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_GOLDEN_STEPS = 90


def _golden_max(phi: YoungFunction, r: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Maximise s -> r*s - Phi(s) on [a, b] (concave objective)."""

    def obj(s):
        with np.errstate(invalid="ignore", over="ignore"):
            v = r * s - eval_young(phi, s)
        return np.where(np.isnan(v), -np.inf, v)

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = obj(c), obj(d)
    for _ in range(_GOLDEN_STEPS):
        left = fc >= fd
        nb = np.where(left, d, b)
        na = np.where(left, a, c)
        probe = np.where(left, nb - _GOLDEN * (nb - na), na + _GOLDEN * (nb - na))
        fp = obj(probe)
        c, d = np.where(left, probe, d), np.where(left, c, probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        a, b = na, nb
    return np.maximum(fc, fd)


def _bracket_max(phi: YoungFunction, r: np.ndarray, grid: np.ndarray):
    """Grid argmax of r*s - Phi(s) followed by golden refinement around it."""
    phis = eval_young(phi, grid)
    with np.errstate(invalid="ignore", over="ignore"):
        table = r[:, None] * grid[None, :] - phis[None, :]
    table = np.where(np.isnan(table), -np.inf, table)
    idx = np.argmax(table, axis=1)
    best = table[np.arange(r.size), idx]
    last = grid.size - 1
    lo_i = np.maximum(idx - 1, 0)
    hi_i = np.minimum(idx + 1, last)
    refined = _golden_max(phi, r, grid[lo_i], grid[hi_i])
    return np.maximum(refined, best), idx


_S_HIGH = np.logspace(8, 300, 293)
_S_LOW = np.logspace(-300, -8, 293)


def _conjugate_values(phi: YoungFunction, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape)
    pos = r > 0
    if not np.any(pos):
        return out
    rp = r[pos]
    value, idx = _bracket_max(phi, rp, _S_GRID)
    value = np.maximum(value, 0.0)
    # objective still increasing at the upper bracket: widen before flagging infinity
    top = idx == _S_GRID.size - 1
    if np.any(top):
        v2, i2 = _bracket_max(phi, rp[top], _S_HIGH)
        value[top] = np.where(i2 == _S_HIGH.size - 1, np.inf, v2)
    # maximiser below the lower bracket end
    bottom = idx == 1
    if np.any(bottom):
        v3, _ = _bracket_max(phi, rp[bottom], _S_LOW)
        value[bottom] = np.maximum(value[bottom], v3)
    out[pos] = value
    return out


def complementary(phi: YoungFunction) -> YoungFunction:
    """The complementary function sup_s (r s - Phi(s)) as a new Young function."""

    def fn(r):
        return _conjugate_values(phi, r)

    conj = YoungFunction(fn, f"conj({phi.label})")
    probe = 2.0 ** np.arange(-20, 64)
    vals = fn(probe)
    if np.any(np.isinf(vals)):
        jump = _locate_jump(conj)
        conj = YoungFunction(fn, conj.label, False, jump)
    return conj


# Growth and identities ------------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    delta2_constant: float
    delta2_observed: float
    delta2_growing: bool
    nabla2_witness: tuple | None
    probe_range: tuple


def _log_slope(x: np.ndarray, y: np.ndarray) -> float:
    ok = np.isfinite(y) & (y > 0)
    if ok.sum() < 2:
        return math.inf
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


NABLA2_LADDER = np.round(np.arange(11, 641) / 10.0, 1)


def growth_class(phi: YoungFunction, probe=None) -> GrowthReport:
    """Empirical Delta_2 constant and smallest nabla_2 ladder constant on ``probe``."""
    probe = np.sort(np.asarray(default_probe(1e-4, 1e4) if probe is None else probe, dtype=float))
    base = eval_young(phi, probe)
    twice = eval_young(phi, 2.0 * probe)
    pos = base > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.isinf(twice) & np.isfinite(base), np.inf, twice / base)
    ratio = ratio[pos & ~(np.isinf(twice) & np.isinf(base))]
    observed = float(np.max(ratio)) if ratio.size else math.inf
    decade = probe >= probe[-1] / 10.0
    tail_x = probe[decade & pos]
    with np.errstate(divide="ignore", invalid="ignore"):
        tail_r = (eval_young(phi, 2.0 * tail_x) / eval_young(phi, tail_x)) if tail_x.size else np.array([])
    growing = (not math.isfinite(observed)) or (tail_x.size >= 2 and _log_slope(tail_x, tail_r) > 0.05)
    witness = None
    for c in NABLA2_LADDER:
        big = eval_young(phi, c * probe) / (2.0 * c)
        if np.all(base <= big * (1 + 1e-12)):
            with np.errstate(divide="ignore", invalid="ignore"):
                margin = np.where(pos, big / base - 1.0, np.inf)
            witness = (float(c), float(np.min(margin)))
            break
    return GrowthReport(
        delta2_constant=math.inf if growing else observed,
        delta2_observed=observed,
        delta2_growing=bool(growing),
        nabla2_witness=witness,
        probe_range=(float(probe[0]), float(probe[-1])),
    )


@dataclass(frozen=True)
class InverseIdentityReport:
    max_violation: float
    violations: tuple  # of (identity, r, lhs, rhs)
    probe_range: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_inverse_identities(phi: YoungFunction, probe=None, slack: float = 1e-3) -> InverseIdentityReport:
    """Check Phi(Phi^-1(r)) <= r <= Phi^-1(Phi(r)) and r <= Phi^-1(r) conj^-1(r) <= 2r."""
    probe = np.sort(np.asarray(default_probe() if probe is None else probe, dtype=float))
    inv = generalized_inverse(phi, probe)
    left = eval_young(phi, inv)
    right = generalized_inverse(phi, eval_young(phi, probe))
    conj_inv = generalized_inverse(phi.conjugate(), probe)
    with np.errstate(invalid="ignore"):
        prod = inv * conj_inv
    checks = [
        ("phi_of_inverse", left, probe, left - probe),
        ("inverse_of_phi", probe, right, probe - right),
        ("sandwich_lower", probe, prod, probe - prod),
        ("sandwich_upper", prod, 2.0 * probe, prod - 2.0 * probe),
    ]
    violations = []
    worst = 0.0
    for name, lhs, rhs, excess in checks:
        with np.errstate(invalid="ignore"):
            rel = np.where(np.isnan(excess), np.inf, excess / probe)
        worst = max(worst, float(np.max(rel)))
        for i in np.nonzero(rel > slack)[0]:
            violations.append((name, float(probe[i]), float(lhs[i]), float(rhs[i])))
    return InverseIdentityReport(max(worst, 0.0), tuple(violations), (float(probe[0]), float(probe[-1])))


def power_scale(phi: YoungFunction, beta: float) -> YoungFunction:
    """Psi(t) = Phi(t^(1/beta)) for 0 < beta <= 1."""
    if not (0 < beta <= 1):
        raise ValueError("power_scale requires 0 < beta <= 1")
    if beta == 1:
        return phi
    inv_beta = 1.0 / beta

    def fn(t):
        return eval_young(phi, np.power(t, inv_beta))

    jump = None if phi.jump_point is None else phi.jump_point**beta
    return YoungFunction(fn, f"{phi.label}^(1/{beta:g})", phi.finite_valued, jump)
