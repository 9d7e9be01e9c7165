"""Trapezoid quadrature in the logarithmic variable, for integrals against dt/t."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PER_DECADE = 256
STALL_RATIO = 1.0 - 1e-9  # block ratios this close to 1 are rounding noise on a non-decaying tail


@dataclass(frozen=True)
class Integral:
    value: float
    error: float
    diverged: bool = False
    reach: float = math.nan  # furthest abscissa visited


def _evaluate(fn, t):
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        return np.asarray(fn(t), dtype=float)


def log_trapz(fn, a: float, b: float, per_decade: int = PER_DECADE, breaks=()) -> float:
    """Composite trapezoid value of the integral of fn(t) dt/t over [a, b].

    The range is split at any ``breaks`` inside it, so kinks in fn sit on panel edges.
    """
    if b <= a:
        return 0.0
    inner = [c for c in breaks if a < c < b]
    if inner:
        edges = [a, *inner, b]
        return sum(log_trapz(fn, lo, hi, per_decade) for lo, hi in zip(edges[:-1], edges[1:]))
    m = max(2, int(math.ceil(per_decade * math.log10(b / a))))
    u = np.linspace(math.log(a), math.log(b), 2 * m + 1)
    vals = _evaluate(fn, np.exp(u))
    return _richardson(vals, u[1] - u[0])


def _richardson(vals: np.ndarray, h: float) -> float:
    """Trapezoid on 2m panels extrapolated against the m-panel rule."""
    fine = h * (0.5 * vals[0] + vals[1:-1].sum() + 0.5 * vals[-1])
    even = vals[::2]
    coarse = 2 * h * (0.5 * even[0] + even[1:-1].sum() + 0.5 * even[-1])
    if not (math.isfinite(fine) and math.isfinite(coarse)):
        return fine
    return (4.0 * fine - coarse) / 3.0


def log_integral(fn, a: float, b: float, per_decade: int = PER_DECADE, breaks=()) -> Integral:
    """Integral over [a, b] with its change under doubled density as error estimate."""
    coarse = log_trapz(fn, a, b, per_decade, breaks)
    fine = log_trapz(fn, a, b, 2 * per_decade, breaks)
    return Integral(fine, abs(fine - coarse), not math.isfinite(fine), b)


def improper_log_integral(
    fn,
    anchor: float,
    toward: str,
    block: float,
    per_decade: int = PER_DECADE,
    rtol: float = 1e-8,
    breaks=(),
) -> Integral:
    """Integral of fn(t) dt/t from ``anchor`` to 0 or to infinity.

    The range is consumed in geometric blocks (factor ``block``). The run
    stops when a block contributes less than ``rtol`` of the running total,
    or when three consecutive block contributions decay with a stable
    ratio, in which case the remaining geometric tail is added. Blocks that
    do not decay signal divergence.
    """
    if toward not in ("zero", "infinity"):
        raise ValueError("toward must be 'zero' or 'infinity'")
    limit = 1e-300 if toward == "zero" else 1e300

    def far(x):
        # non-decay only signals divergence once well past the unit scale and the anchor
        if toward == "zero":
            return x <= 1e-3 * min(anchor, 1.0)
        return x >= 1e3 * max(anchor, 1.0)

    total = 0.0
    contributions: list[float] = []
    edge = anchor
    while True:
        nxt = edge / block if toward == "zero" else edge * block
        if (toward == "zero" and nxt < limit) or (toward == "infinity" and nxt > limit):
            break
        a, b = (nxt, edge) if toward == "zero" else (edge, nxt)
        piece = log_trapz(fn, a, b, per_decade, breaks)
        edge = nxt
        if not math.isfinite(piece):
            return Integral(math.inf, math.inf, True, edge)
        contributions.append(piece)
        total += piece
        k = len(contributions)
        if piece == 0.0 and total > 0 and k >= 2 and contributions[-2] == 0.0:
            return Integral(total, 0.0, False, edge)
        if total == 0.0 and k >= 3 and far(edge):
            # the integrand has underflowed to zero on every block so far
            return Integral(0.0, 0.0, False, edge)
        if total > 0 and piece <= rtol * total and k >= 2:
            prev = contributions[-2]
            q = piece / prev if prev > 0 else 0.0
            tail = piece * q / (1.0 - q) if q < 1 else 0.0
            return Integral(total + tail, tail, False, edge)
        if k >= 3:
            d0, d1, d2 = contributions[-3:]
            if d0 <= 0 or d1 <= 0:
                continue
            q1, q2 = d1 / d0, d2 / d1
            if q1 >= STALL_RATIO and q2 >= STALL_RATIO and far(edge):
                return Integral(math.inf, math.inf, True, edge)
            if q2 < STALL_RATIO and abs(q2 - q1) <= 1e-3 * q2:
                tail = d2 * q2 / (1.0 - q2)
                return Integral(total + tail, tail * 1e-3, False, edge)
    if total == 0.0:
        return Integral(0.0, 0.0, False, edge)
    if len(contributions) >= 2 and contributions[-2] > 0:
        q = contributions[-1] / contributions[-2]
        if q < 1.0:
            tail = contributions[-1] * q / (1.0 - q)
            return Integral(total + tail, tail, False, edge)
    return Integral(math.inf, math.inf, True, edge)


def cumulative_log_integral(fn, rs, per_decade: int = PER_DECADE, breaks=()) -> np.ndarray:
    """Running integrals of fn(t) dt/t from rs[0] to each rs[i] (rs sorted, positive)."""
    rs = np.asarray(rs, dtype=float)
    if rs.size == 0:
        return np.zeros(0)
    if np.any(np.diff(rs) < 0) or rs[0] <= 0:
        raise ValueError("abscissae must be positive and sorted")
    inner = np.array([c for c in breaks if rs[0] < c < rs[-1]], dtype=float)
    if inner.size:
        merged = np.concatenate([rs, inner])
        order = np.argsort(merged, kind="stable")
        run = cumulative_log_integral(fn, merged[order], per_decade)
        back = np.empty(merged.size, dtype=int)
        back[order] = np.arange(merged.size)
        return run[back[: rs.size]]
    logs = np.log(rs)
    gaps = np.diff(logs)
    counts = np.maximum(1, np.ceil(per_decade * gaps / math.log(10.0)).astype(int))
    counts[gaps == 0] = 0
    pieces = [np.array([logs[0]])]
    for i, m in enumerate(counts):
        if m:
            pieces.append(np.linspace(logs[i], logs[i + 1], 2 * m + 1)[1:])
    u = np.concatenate(pieces)
    vals = _evaluate(fn, np.exp(u))
    # Simpson pairs: the Richardson extrapolation of trapezoid panels two by two
    left, mid, right = vals[0:-1:2], vals[1::2], vals[2::2]
    width = u[2::2] - u[0:-1:2]
    with np.errstate(invalid="ignore"):
        seg = width * (left + 4.0 * mid + right) / 6.0
    seg = np.where(np.isnan(seg), np.inf, seg)
    run = np.concatenate([[0.0], np.cumsum(seg)])
    idx = np.concatenate([[0], np.cumsum(counts)])
    return run[idx]
