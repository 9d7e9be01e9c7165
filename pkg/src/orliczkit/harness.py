"""Empirical verification runs: operator-norm estimates over test-function
families, necessity probes on characteristic functions, split estimates and
refinement studies, all driven by a scenario description.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__, dsl
from .conditions import ConditionInputs, ConditionReport, check, default_grid
from .kernel import Kernel, builtin_kernel, check_kernel_conditions, kernel_from_text, rho_star, weighted_tail
from .morrey import MorreyWeight, inverse_weight, morrey_norm, power_weight, weak_morrey_norm, weight_from_text
from .norms import luxemburg_norm, weak_norm
from .operators import HypothesisError, apply_operator, hedberg_integral, hedberg_maximal
from .sampling import Ball, GridFunction, ResolutionError, SimpleFunction, unit_ball_volume
from .young import YoungFunction, builtin_young, generalized_inverse, power_scale, young_from_text

__all__ = [
    "REPORT_HEADER",
    "ScenarioError",
    "ScenarioSpec",
    "build_young",
    "build_kernel",
    "build_weight",
    "TestFunction",
    "generate_family",
    "sample",
    "VerificationReport",
    "empirical_norm",
    "necessity_probe",
    "split_estimate_check",
    "refinement_study",
    "hedberg_study",
    "morrey_lattice",
]

REPORT_HEADER = (
    "PASS means finite, refinement-stable empirical constants over the declared "
    "test-function family on the declared grids; boundedness is never claimed globally."
)
OPERATORS = ("I_rho", "M_rho", "M")


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario content."""


# Building blocks from JSON ---------------------------------------------------------


def build_young(spec, bindings=None, source: YoungFunction | None = None) -> YoungFunction:
    """A Young function from ``"power:p"``-style names, ``{"expr": ...}`` or ``{"scale_of": "source", "beta": b}``."""
    if isinstance(spec, str):
        return builtin_young(spec)
    if isinstance(spec, dict):
        if "builtin" in spec:
            return builtin_young(spec["builtin"])
        if "expr" in spec:
            return young_from_text(spec["expr"], {**(bindings or {}), **spec.get("bindings", {})}, spec.get("label"))
        if "scale_of" in spec:
            if source is None:
                raise ScenarioError("scale_of needs a source Young function")
            return power_scale(source, float(spec["beta"]))
    raise ScenarioError(f"cannot build a Young function from {spec!r}")


def build_kernel(spec, dim_n: int, bindings=None) -> Kernel:
    if isinstance(spec, str):
        return builtin_kernel(spec, dim_n)
    if isinstance(spec, dict):
        k1, k2 = float(spec.get("k1", 0.5)), float(spec.get("k2", 2.0))
        if "builtin" in spec:
            return builtin_kernel(spec["builtin"], dim_n, k1, k2)
        if "expr" in spec:
            return kernel_from_text(spec["expr"], dim_n, {**(bindings or {}), **spec.get("bindings", {})}, k1, k2)
    raise ScenarioError(f"cannot build a kernel from {spec!r}")


def build_weight(spec, dim_n: int, phi: YoungFunction | None, bindings=None, base: MorreyWeight | None = None) -> MorreyWeight:
    """Weights: ``{"power": e}``, ``{"expr": ...}``, ``{"inverse": true}`` or ``{"source_power": beta}``."""
    if not isinstance(spec, dict):
        raise ScenarioError(f"cannot build a weight from {spec!r}")
    if "power" in spec:
        return power_weight(float(spec["power"]), dim_n)
    if "expr" in spec:
        return weight_from_text(spec["expr"], dim_n, {**(bindings or {}), **spec.get("bindings", {})})
    if spec.get("inverse"):
        if phi is None:
            raise ScenarioError("an inverse weight needs its Young function")
        return inverse_weight(phi, dim_n)
    if "source_power" in spec:
        if base is None:
            raise ScenarioError("source_power needs a source weight")
        beta = float(spec["source_power"])
        return MorreyWeight(lambda t: np.asarray(base(t)) ** beta, f"({base.label})^{beta:g}", dim_n)
    raise ScenarioError(f"cannot build a weight from {spec!r}")


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """A parsed scenario; ``raw`` keeps the JSON echo used in reports."""

    raw: dict
    name: str
    dim_n: int
    operator: str | None
    kernel: Kernel | None
    phi: YoungFunction | None
    psi: YoungFunction | None
    weight1: MorreyWeight | None
    weight2: MorreyWeight | None
    target_norm: str
    beta: float | None
    conditions: tuple
    expected: dict
    seed: int
    grid: dict
    family: dict
    refinement: dict
    condition_grid: dict
    necessity: dict | None
    functions: tuple
    points: tuple
    kernel_conditions: bool

    @property
    def space(self) -> str:
        return "morrey" if self.weight1 is not None else "orlicz"

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        try:
            name = str(data.get("name", "scenario"))
            n = int(data.get("dim_n", 1))
            if n not in (1, 2, 3):
                raise ScenarioError("dim_n must be 1, 2 or 3")
            bindings = {"n": float(n), **{k: float(v) for k, v in data.get("bindings", {}).items()}}
            op = data.get("operator")
            if op is not None and op not in OPERATORS:
                raise ScenarioError(f"operator must be one of {', '.join(OPERATORS)}")
            kernel = build_kernel(data["kernel"], n, bindings) if "kernel" in data else None
            if op == "M":
                kernel = kernel or builtin_kernel("one", n)
            src = data.get("source", {})
            tgt = data.get("target", {})
            phi = build_young(src["young"], bindings) if "young" in src else None
            psi = build_young(tgt["young"], bindings, phi) if "young" in tgt else None
            w1 = build_weight(src["weight"], n, phi, bindings) if "weight" in src else None
            w2 = build_weight(tgt["weight"], n, psi, bindings, w1) if "weight" in tgt else None
            target_norm = tgt.get("norm", "weak")
            if target_norm not in ("weak", "strong"):
                raise ScenarioError("target norm must be 'weak' or 'strong'")
            conditions = tuple(data.get("conditions", ()))
            grid = {"cells": 256, "half_width": 4.0, "radius_per_decade": 64, "ring_subdivisions": 8}
            grid.update(data.get("grid", {}))
            family = {"char_ball": 10, "simple": 10, "radial_power": [0.1]}
            family.update(data.get("family", {}))
            refinement = {"levels": 2, "tolerance": 0.05}
            refinement.update(data.get("refinement", {}))
            cgrid = {"lo": 1e-6, "hi": 1e6, "per_decade": 48}
            cgrid.update(data.get("condition_grid", {}))
            return cls(
                raw=copy.deepcopy(data), name=name, dim_n=n, operator=op, kernel=kernel, phi=phi, psi=psi,
                weight1=w1, weight2=w2, target_norm=target_norm,
                beta=float(data["beta"]) if "beta" in data else None,
                conditions=conditions, expected=dict(data.get("expected", {})),
                seed=int(data.get("seed", 0)), grid=grid, family=family, refinement=refinement,
                condition_grid=cgrid, necessity=data.get("necessity"),
                functions=tuple(data.get("functions", ())), points=tuple(tuple(np.atleast_1d(p)) for p in data.get("points", ())),
                kernel_conditions=bool(data.get("kernel_conditions", False)),
            )
        except (KeyError, TypeError) as exc:
            raise ScenarioError(f"missing or malformed field: {exc}") from exc
        except dsl.DslError as exc:
            raise ScenarioError(f"expression error: {exc}") from exc

    def refined(self, level: int) -> "ScenarioSpec":
        """The same scenario with grid densities doubled ``level`` times."""
        factor = 2**level
        grid = dict(self.grid)
        grid["cells"] = int(grid["cells"]) * factor
        grid["radius_per_decade"] = int(grid["radius_per_decade"]) * factor
        grid["ring_subdivisions"] = int(grid["ring_subdivisions"]) * factor
        grid["level"] = int(grid.get("level", 0)) + level
        return _replace(self, grid=grid)

    def with_seed(self, seed: int) -> "ScenarioSpec":
        raw = dict(self.raw)
        raw["seed"] = seed
        return _replace(self, seed=seed, raw=raw)

    def inputs(self) -> ConditionInputs:
        return ConditionInputs(self.kernel, self.phi, self.psi, self.weight1, self.weight2, self.beta, self.dim_n)

    def condition_r_grid(self) -> np.ndarray:
        g = self.condition_grid
        return default_grid(float(g["lo"]), float(g["hi"]), int(g["per_decade"]))

    def echo(self) -> dict:
        """Scenario JSON with resolved expression text for every function object."""
        out = copy.deepcopy(self.raw)
        resolved = {}
        for key, obj in (("kernel", self.kernel), ("source_young", self.phi), ("target_young", self.psi),
                         ("source_weight", self.weight1), ("target_weight", self.weight2)):
            if obj is not None:
                resolved[key] = {"label": obj.label, "text": getattr(obj, "text", None)}
        out["resolved"] = resolved
        return out


def _replace(spec: ScenarioSpec, **changes) -> ScenarioSpec:
    fields_ = {k: getattr(spec, k) for k in spec.__dataclass_fields__}
    fields_.update(changes)
    return ScenarioSpec(**fields_)


# Test functions ----------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A resolution-independent description that can be sampled on any grid."""

    __test__ = False  # not a pytest class
    kind: str  # char_ball | simple | radial_power | radial_expr | grid_expr
    params: dict

    def label(self) -> str:
        return f"{self.kind}:{_fmt(self.params)}"


def _fmt(obj) -> str:
    if isinstance(obj, dict):
        return "{" + ",".join(f"{k}={_fmt(v)}" for k, v in sorted(obj.items())) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_fmt(v) for v in obj) + "]"
    if isinstance(obj, float):
        return f"{obj:.6g}"
    return str(obj)


def _random_ball(rng, n: int, half_width: float) -> dict:
    center = rng.uniform(-half_width / 4, half_width / 4, size=n)
    radius = math.exp(rng.uniform(math.log(half_width / 32), math.log(half_width / 4)))
    return {"center": [float(c) for c in center], "radius": float(radius)}


def generate_family(spec: ScenarioSpec) -> list[TestFunction]:
    """Balls with log-uniform radii, random simple functions (at most 8 levels) and radial powers."""
    rng = np.random.default_rng(spec.seed)
    L = float(spec.grid["half_width"])
    n = spec.dim_n
    fam = spec.family
    out: list[TestFunction] = []
    for _ in range(int(fam.get("char_ball", 0))):
        out.append(TestFunction("char_ball", _random_ball(rng, n, L)))
    for _ in range(int(fam.get("simple", 0))):
        k = int(rng.integers(1, 9))
        levels = np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=k))
        balls = [_random_ball(rng, n, L) for _ in range(k)]
        out.append(TestFunction("simple", {"levels": [float(c) for c in levels], "balls": balls}))
    for gamma in fam.get("radial_power", ()):
        out.append(TestFunction("radial_power", {"gamma": float(gamma), "radius": L / 4}))
    return out


def _dist(points: np.ndarray, center) -> np.ndarray:
    return np.linalg.norm(points - np.asarray(center, dtype=float)[None, :], axis=1)


def sample(tf: TestFunction, n: int, half_width: float, cells: int, bindings=None) -> GridFunction:
    """Sample a test function at the cell centres of [-half_width, half_width]^n."""
    lo, hi = [-half_width] * n, [half_width] * n
    h = 2 * half_width / cells
    p = tf.params
    if tf.kind == "char_ball":
        if 2 * p["radius"] / h < 8:
            raise ResolutionError("fewer than 8 cells across the ball")
        return GridFunction.from_function(lambda x: (_dist(x, p["center"]) < p["radius"]).astype(float), lo, hi, cells)
    if tf.kind == "simple":
        def fn(x):
            out = np.zeros(x.shape[0])
            for c, b in zip(p["levels"], p["balls"]):
                out += c * (_dist(x, b["center"]) < b["radius"])
            return out
        return GridFunction.from_function(fn, lo, hi, cells)
    if tf.kind == "radial_power":
        gamma, radius = p["gamma"], p["radius"]

        def fn(x):
            d = _dist(x, [0.0] * n)
            with np.errstate(divide="ignore"):
                return np.where(d < radius, d ** (-gamma), 0.0)
        return GridFunction.from_function(fn, lo, hi, cells)
    if tf.kind in ("grid_expr", "radial_expr"):
        ast = dsl.parse(p["expr"], {"n": float(n), **(bindings or {})})
        center = p.get("center", [0.0] * n)
        cutoff = float(p.get("cutoff", math.inf))

        def fn(x):
            d = _dist(x, center)
            vals = np.zeros(d.size)
            inside = d < cutoff
            vals[inside] = dsl.evaluate(ast, d[inside])
            return vals
        return GridFunction.from_function(fn, lo, hi, cells)
    raise ScenarioError(f"unknown test function kind {tf.kind!r}")


# Norm plumbing -------------------------------------------------------------------------


LATTICE_CENTERS = {1: 33, 2: 9, 3: 5}
LATTICE_RADII_PER_DECADE = 24


def morrey_lattice(spec: ScenarioSpec, tf: TestFunction | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Centres and radii for Morrey norms, fixed across refinement levels.

    Radii sit on the anchored ladder 10^(k/24) from two coarse cells up to
    10^3 box widths; centres fill [-L/2, L/2]^n and include the centres of the
    test function's own balls.
    """
    n, L = spec.dim_n, float(spec.grid["half_width"])
    h0 = 2 * L / int(spec.grid["cells"]) * 2 ** int(spec.grid.get("level", 0))
    per = LATTICE_RADII_PER_DECADE
    k_lo = math.ceil(per * math.log10(2 * h0))
    k_hi = math.floor(per * math.log10(2e3 * L))
    radii = 10.0 ** (np.arange(k_lo, k_hi + 1) / per)
    axis = np.linspace(-L / 2, L / 2, LATTICE_CENTERS[n])
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    centers = [np.stack([m.ravel() for m in mesh], axis=1)]
    extra_r = []
    if tf is not None:
        balls = [tf.params] if tf.kind == "char_ball" else tf.params.get("balls", [])
        for b in balls:
            centers.append(np.atleast_2d(b["center"]))
            extra_r.append(b["radius"])
        if tf.kind in ("radial_power", "radial_expr", "grid_expr"):
            centers.append(np.atleast_2d(tf.params.get("center", [0.0] * n)))
    radii = np.unique(np.concatenate([radii, np.asarray(extra_r, dtype=float)]))
    return np.unique(np.concatenate(centers), axis=0), radii


def _source_norm(spec: ScenarioSpec, f, lattice=None) -> float:
    if spec.weight1 is not None:
        centers, radii = lattice if lattice is not None else (None, None)
        return morrey_norm(f, spec.phi, spec.weight1, centers, radii).value
    return luxemburg_norm(f, spec.phi).value


def _target_norm(spec: ScenarioSpec, g, weak: bool, lattice=None) -> float:
    if spec.weight2 is not None:
        centers, radii = lattice if lattice is not None else (None, None)
        return (weak_morrey_norm if weak else morrey_norm)(g, spec.psi, spec.weight2, centers, radii).value
    return (weak_norm if weak else luxemburg_norm)(g, spec.psi).value


def _apply(spec: ScenarioSpec, f: GridFunction) -> GridFunction:
    ev = apply_operator(
        spec.operator, f, f.centers(), spec.kernel,
        int(spec.grid["radius_per_decade"]), int(spec.grid["ring_subdivisions"]),
    )
    return f.like(ev.values.reshape(f.shape))


# Verification --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VerificationReport:
    scenario: str
    ratios: list  # per function: {"function", "ratio", "weak_ratio", "strong_ratio"} or {"function", "error"}
    empirical_norm: float
    weak_max: float
    strong_max: float
    drift: float | None
    prechecks: dict
    summary: str
    exploratory: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "header": REPORT_HEADER,
            "summary": self.summary,
            "exploratory": self.exploratory,
            "empirical_norm": self.empirical_norm,
            "weak_max": self.weak_max,
            "strong_max": self.strong_max,
            "drift": self.drift,
            "prechecks": self.prechecks,
            "functions": self.ratios,
            **self.extra,
        }


def _expected_ok(spec: ScenarioSpec, key: str, verdict: str) -> bool:
    return verdict == spec.expected.get(key, "pass")


def run_prechecks(spec: ScenarioSpec) -> tuple[dict, dict]:
    """Condition verdicts (id -> summary) and the reports themselves."""
    grid = spec.condition_r_grid()
    reports = {}
    for cid in spec.conditions:
        reports[cid] = check(cid, spec.inputs(), grid)
    summaries = {}
    for cid, rep in reports.items():
        s = rep.summary()
        s["expected"] = spec.expected.get(cid, "pass")
        s["met"] = _expected_ok(spec, cid, rep.verdict)
        summaries[cid] = s
    return summaries, reports


def _family_ratios(spec: ScenarioSpec, family) -> list:
    rows = []
    n, L, cells = spec.dim_n, float(spec.grid["half_width"]), int(spec.grid["cells"])
    for tf in family:
        try:
            f = sample(tf, n, L, cells)
            lattice = morrey_lattice(spec, tf)
            src = _source_norm(spec, f, lattice)
            if not src > 0 or not math.isfinite(src):
                raise ValueError(f"source norm {src}")
            g = _apply(spec, f)
            weak = _target_norm(spec, g, True, lattice)
            strong = _target_norm(spec, g, False, lattice)
            chosen = weak if spec.target_norm == "weak" else strong
            rows.append({
                "function": tf.label(), "source_norm": src, "ratio": chosen / src,
                "weak_ratio": weak / src, "strong_ratio": strong / src,
            })
        except (ValueError, ArithmeticError) as exc:
            rows.append({"function": tf.label(), "error": f"{type(exc).__name__}: {exc}"})
    return rows


def _max(rows, key) -> float:
    vals = [r[key] for r in rows if key in r]
    return float(max(vals)) if vals else math.nan


def empirical_norm(spec: ScenarioSpec, refine: bool = True) -> VerificationReport:
    """Ratios ||Tf||_target / ||f||_source over the declared family, with a refinement rerun."""
    if spec.operator is None:
        raise ScenarioError("verification needs an operator")
    if spec.phi is None or spec.psi is None:
        raise ScenarioError("verification needs source and target Young functions")
    summaries, _ = run_prechecks(spec)
    all_met = all(s["met"] for s in summaries.values())
    family = generate_family(spec)
    rows = _family_ratios(spec, family)
    emp = _max(rows, "ratio")
    drift = None
    extra = {}
    if refine and int(spec.refinement.get("levels", 2)) >= 2:
        study = refinement_study(spec, int(spec.refinement["levels"]), family=family, base_rows=rows)
        drift = study["drift"]
        extra["refinement"] = study
    tol = float(spec.refinement.get("tolerance", 0.05))
    ok = all_met and math.isfinite(emp) and (drift is None or drift < tol)
    summary = "PASS" if ok else "FAIL"
    return VerificationReport(
        spec.name, rows, emp, _max(rows, "weak_ratio"), _max(rows, "strong_ratio"), drift,
        summaries, summary, not all_met, extra,
    )


def refinement_study(spec: ScenarioSpec, levels: int = 2, family=None, base_rows=None) -> dict:
    """Rerun at doubled grid densities; drift is the largest relative change of the empirical norm."""
    if not 2 <= levels <= 3:
        raise ValueError("levels must be 2 or 3")
    family = family if family is not None else generate_family(spec)
    table = []
    rows = base_rows if base_rows is not None else _family_ratios(spec, family)
    table.append({"cells": int(spec.grid["cells"]), "empirical_norm": _max(rows, "ratio")})
    prev_rows = rows
    drift = 0.0
    per_function = 0.0
    for level in range(1, levels):
        finer = spec.refined(level)
        rows = _family_ratios(finer, family)
        value = _max(rows, "ratio")
        before = table[-1]["empirical_norm"]
        change = abs(value - before) / abs(before) if before else math.inf
        if not math.isfinite(change):
            change = math.inf
        drift = max(drift, change)
        for a, b in zip(prev_rows, rows):
            if "ratio" in a and "ratio" in b and a["ratio"] > 0:
                per_function = max(per_function, abs(b["ratio"] - a["ratio"]) / a["ratio"])
        table.append({"cells": int(finer.grid["cells"]), "empirical_norm": value, "drift": change})
        prev_rows = rows
    tol = float(spec.refinement.get("tolerance", 0.05))
    return {"levels": table, "drift": drift, "per_function_drift": per_function, "flagged": drift >= tol}


# Necessity ----------------------------------------------------------------------------


def _char_norm(spec: ScenarioSpec, f: GridFunction, which: str) -> float:
    if which == "source":
        return _source_norm(spec, f)
    return _target_norm(spec, f, spec.target_norm == "weak")


def necessity_probe(spec: ScenarioSpec, r_min: float = 1e-2, r_max: float = 1e2, count: int = 9, cells: int = 256) -> dict:
    """Sweep f_r = chi_{B(0,r)} and compare the norm ratio with a lower-bound functional.

    For I_rho the functional is rho*(r/2) ||chi_{B(0,r/2)}||_target / ||f_r||_source,
    from the pointwise bound rho*(r/2) <= C I_rho f_r on B(0,r/2). For M_rho
    the probe is chi_{B(0,2r)} and the functional uses rho(r) chi_{B(0,r)} <= M_rho f.
    A growing norm ratio means the operator norm is unbounded along the sweep.
    """
    if spec.operator is None:
        raise ScenarioError("a necessity probe needs an operator")
    n = spec.dim_n
    radii = np.logspace(math.log10(r_min), math.log10(r_max), count)
    lower, ratio = [], []
    for r in radii:
        if spec.operator == "I_rho":
            support, inner = r, r / 2.0
            gain = rho_star(spec.kernel, r / 2.0)
        else:
            support, inner = 2.0 * r, r
            gain = float(spec.kernel.fn(np.array([r]))[0])
        half = 4.0 * support
        f = sample(TestFunction("char_ball", {"center": [0.0] * n, "radius": support}), n, half, cells)
        g_inner = sample(TestFunction("char_ball", {"center": [0.0] * n, "radius": inner}), n, half, cells)
        src = _char_norm(spec, f, "source")
        tgt_inner = _char_norm(spec, g_inner, "target")
        lower.append(gain * tgt_inner / src)
        tf = _apply(_replace(spec, grid={**spec.grid, "cells": cells}), f)
        ratio.append(_char_norm(spec, tf, "target") / src)
    lower = np.asarray(lower)
    ratio = np.asarray(ratio)
    link = lower / ratio
    slope = float(np.polyfit(np.log(radii), np.log(ratio), 1)[0])
    decades = math.log10(r_max / r_min)
    growth = float(ratio.max() / ratio.min())
    trend = "flat" if abs(slope) < 0.05 else ("growing" if slope > 0 else "decaying")
    return {
        "radii": radii.tolist(),
        "lower_bound": lower.tolist(),
        "norm_ratio": ratio.tolist(),
        "link_constant": float(link.max()),
        "slope": slope,
        "growth_factor": growth,
        "decades": decades,
        "trend": trend,
        "verdict": "pass" if trend != "growing" else "fail",
    }


# Split estimates ------------------------------------------------------------------------


def _local_norms(f: GridFunction, phi: YoungFunction, x: np.ndarray, radii: np.ndarray) -> np.ndarray:
    dist = _dist(f.centers(), x)
    vals = f.values.ravel()
    out = np.zeros(radii.size)
    for i, t in enumerate(radii):
        inside = vals[(dist < t) & (vals > 0)]
        if inside.size:
            out[i] = luxemburg_norm(SimpleFunction(inside, np.full(inside.size, f.cell_volume)), phi).value
    return out


def split_estimate_check(spec: ScenarioSpec, f: GridFunction, ball: Ball, hypotheses=(), per_decade: int = 64) -> dict:
    """The local split bound for T f on a ball: near term ||f||_{L^Phi(2B)} plus the far tail term.

    For I_rho the tail is the integral from 2 k1 r to infinity of
    ||f||_{L^Phi(B(x,t))} Phi^{-1}(t^-n) rho(t) dt/t; for M_rho it is the sup
    over t > r of ||f||_{L^Phi(B(x,2t))} Phi^{-1}(t^-n) rho(t). Both are
    divided by Psi^{-1}(r^-n).
    """
    for rep in hypotheses:
        if isinstance(rep, ConditionReport) and rep.verdict != "pass":
            raise HypothesisError(f"split estimate: hypothesis {rep.condition} is {rep.verdict}")
    if spec.operator not in ("I_rho", "M_rho"):
        raise ScenarioError("split estimates apply to I_rho and M_rho")
    n, phi, psi, kernel = spec.dim_n, spec.phi, spec.psi, spec.kernel
    x = np.asarray(ball.center, dtype=float)
    r = ball.radius
    dist = _dist(f.centers(), x)
    in_ball = dist < r
    if not np.any(f.values.ravel() > 0):
        return {"lhs": 0.0, "near": 0.0, "tail": 0.0, "constant": 0.0}
    ev = apply_operator(spec.operator, f, f.centers()[in_ball], kernel, int(spec.grid["radius_per_decade"]), int(spec.grid["ring_subdivisions"]))
    lhs = weak_norm(SimpleFunction(ev.values, np.full(ev.values.size, f.cell_volume)), psi).value if ev.values.size else 0.0
    near = _local_norms(f, phi, x, np.array([2 * r]))[0]
    reach = float(np.max(dist[f.values.ravel() > 0]))
    inv = lambda t: generalized_inverse(phi, np.power(np.asarray(t, dtype=float), -float(n)))
    if spec.operator == "I_rho":
        start = 2 * kernel.k1 * r
        top = max(reach * 1.01, start * 1.01)
        ts = np.logspace(math.log10(start), math.log10(top), max(8, int(per_decade * math.log10(top / start)) + 1))
        norms = _local_norms(f, phi, x, ts)
        integrand = norms * inv(ts) * kernel.fn(ts)
        body = float(np.trapezoid(integrand, np.log(ts)))
        full = luxemburg_norm(f, phi).value
        tail = body + full * weighted_tail(kernel, inv, top)
    else:
        top = max(reach, r) * 4.0
        ts = np.logspace(math.log10(r), math.log10(top), max(8, int(per_decade * math.log10(top / r)) + 1))[1:]
        norms = _local_norms(f, phi, x, 2 * ts)
        # beyond the reach the local norm is constant, and rho Phi^{-1}(t^-n) is checked on the grid
        tail = float(np.max(norms * inv(ts) * kernel.fn(ts)))
    tail /= float(generalized_inverse(psi, r ** (-float(n))))
    rhs = near + tail
    return {"lhs": lhs, "near": near, "tail": tail, "constant": (lhs / rhs) if lhs > 0 else 0.0}


def _probe_points(spec: ScenarioSpec, count: int = 9) -> np.ndarray:
    n, L = spec.dim_n, float(spec.grid["half_width"])
    per_axis = max(2, round(count ** (1.0 / n)))
    axis = np.linspace(-L / 2, L / 2, per_axis)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def hedberg_study(spec: ScenarioSpec, points=None, levels: int = 2, max_functions: int = 6) -> dict:
    """Hedberg-type pointwise checks over the family with C0 set to the measured norm of M.

    C0 is the largest weak-type ratio ||Mf||_{WL^Phi} / ||f||_{L^Phi} seen on
    the family at the coarsest level; the induced C1 is the largest pointwise
    ratio. Both are reported per refinement level.
    """
    if spec.operator not in ("I_rho", "M_rho") or spec.weight1 is not None:
        raise ScenarioError("Hedberg checks need I_rho or M_rho between Orlicz spaces")
    pts = np.atleast_2d(np.asarray(points, dtype=float)) if points is not None else _probe_points(spec)
    family = generate_family(spec)[:max_functions]
    n, L = spec.dim_n, float(spec.grid["half_width"])
    check_fn = hedberg_integral if spec.operator == "I_rho" else hedberg_maximal
    c0 = None
    table = []
    for level in range(levels):
        s = spec.refined(level) if level else spec
        cells = int(s.grid["cells"])
        per, sub = int(s.grid["radius_per_decade"]), int(s.grid["ring_subdivisions"])
        sampled = [sample(tf, n, L, cells) for tf in family]
        norms = [luxemburg_norm(f, spec.phi).value for f in sampled]
        if c0 is None:
            ratios = []
            for f, nf in zip(sampled, norms):
                mf = apply_operator("M", f, f.centers(), per_decade=per).values
                ratios.append(weak_norm(f.like(mf.reshape(f.shape)), spec.phi).value / nf)
            c0 = float(max(ratios))
        c1 = 0.0
        for f, nf in zip(sampled, norms):
            kwargs = {"per_decade": per}
            if spec.operator == "I_rho":
                kwargs["subdivisions"] = sub
            rep = check_fn(spec.kernel, f, pts, spec.phi, spec.psi, c0=c0, source_norm=nf, **kwargs)
            c1 = max(c1, rep.constant)
        table.append({"cells": cells, "c1": c1})
    base = table[0]["c1"]
    drift = max((abs(row["c1"] - base) / base for row in table[1:]), default=0.0) if base else math.inf
    return {"c0": c0, "levels": table, "drift": drift, "points": pts.tolist()}


def kernel_precheck(spec: ScenarioSpec) -> dict:
    """Kernel admissibility outcomes, compared against any expected verdicts."""
    rep = check_kernel_conditions(spec.kernel)
    out = {}
    for key, oc in rep.outcomes.items():
        expected = spec.expected.get(key, "pass")
        out[key] = {
            "verdict": oc.holds,
            "empirical_constant": oc.empirical_constant,
            "witness": list(oc.witness) if isinstance(oc.witness, tuple) else oc.witness,
            "expected": expected,
            "met": oc.holds == expected,
        }
    return out


def provenance(spec: ScenarioSpec) -> dict:
    return {"tool_version": __version__, "seed": spec.seed, "grid": spec.grid, "condition_grid": spec.condition_grid}


def ball_measure(n: int, radius: float) -> float:
    return unit_ball_volume(n) * radius**n
