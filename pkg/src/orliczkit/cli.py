"""Command-line front end: ``orliczkit SUBCOMMAND --scenario PATH [options]``.

Exit codes: 0 when every verdict passes, 2 when any verdict fails, 1 on usage
or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, dsl, harness
from .harness import ScenarioError, ScenarioSpec
from .morrey import morrey_norm, weak_morrey_norm
from .norms import luxemburg_norm, weak_norm
from .operators import apply_operator
from .sampling import Ball, RadialProfile, ResolutionError, SimpleFunction, characteristic_ball

SCHEMA_VERSION = 1
CURVE_COLUMNS = ("r", "lhs", "rhs", "ratio", "flag")
SUBCOMMANDS = ("check-conditions", "norm", "apply-op", "verify", "report")


class UsageError(Exception):
    """Raised instead of exiting so that ``run`` can map it to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orliczkit", description="Numerical checks for Orlicz and Orlicz-Morrey operator bounds.")
    parser.add_argument("--version", action="version", version=f"orliczkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "check-conditions": "evaluate the declared condition checks and kernel conditions",
        "norm": "compute norms of the declared functions",
        "apply-op": "evaluate the operator on the declared functions at the declared points",
        "verify": "estimate the operator norm over the test-function family",
        "report": "run every block the scenario declares",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--scenario", required=True, help="scenario JSON file or builtin scenario name")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--grid-density", type=int, help="override grid cells per axis")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    return parser


# Scenario loading -------------------------------------------------------------------


def builtin_scenarios() -> list[str]:
    root = resources.files("orliczkit") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _read_scenario(ref: str) -> tuple[str, str]:
    path = Path(ref)
    if path.is_file():
        return str(path), path.read_text(encoding="utf-8")
    name = ref[:-5] if ref.endswith(".json") else ref
    if name in builtin_scenarios():
        res = resources.files("orliczkit") / "scenarios" / f"{name}.json"
        return f"<builtin>/{name}.json", res.read_text(encoding="utf-8")
    raise ScenarioError(f"{ref}: no such file or builtin scenario")


def load_scenario(ref: str, grid_density: int | None = None, seed: int | None = None) -> ScenarioSpec:
    origin, text = _read_scenario(ref)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{origin}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if grid_density is not None:
        if grid_density < 8:
            raise ScenarioError("--grid-density must be at least 8")
        data.setdefault("grid", {})["cells"] = grid_density
    if seed is not None:
        data["seed"] = seed
    try:
        return ScenarioSpec.from_dict(data)
    except ScenarioError as exc:
        raise ScenarioError(f"{origin}: {exc}") from exc
    except ValueError as exc:
        raise ScenarioError(f"{origin}: {exc}") from exc


# Declared functions ---------------------------------------------------------------------


def build_function(entry: dict, spec: ScenarioSpec):
    """A function object from a scenario ``functions`` entry."""
    n = spec.dim_n
    kind = entry.get("kind")
    L = float(entry.get("half_width", spec.grid["half_width"]))
    cells = int(entry.get("cells", spec.grid["cells"]))
    bindings = {"n": float(n), **{k: float(v) for k, v in spec.raw.get("bindings", {}).items()}}
    if kind == "char_ball":
        center = tuple(float(c) for c in entry.get("center", [0.0] * n))
        ball = Ball(center, float(entry["radius"]))
        if entry.get("representation", "exact") == "exact":
            return SimpleFunction(np.array([1.0]), np.array([ball.measure]))
        return characteristic_ball(ball, [-L] * n, [L] * n, cells)
    if kind == "simple":
        return SimpleFunction(np.asarray(entry["levels"], dtype=float), np.asarray(entry["measures"], dtype=float))
    if kind == "radial_expr":
        ast = dsl.parse(entry["expr"], bindings)
        return RadialProfile.from_function(
            lambda s: dsl.evaluate(ast, s), n,
            float(entry.get("r_min", 1e-6)), float(entry.get("r_max", 1e6)), int(entry.get("per_decade", 64)),
        )
    if kind == "grid_expr":
        tf = harness.TestFunction("grid_expr", {k: v for k, v in entry.items() if k not in ("kind", "cells", "half_width", "name")})
        return harness.sample(tf, n, L, cells, bindings)
    raise ScenarioError(f"unknown function kind {kind!r}")


def _function_name(entry: dict, i: int) -> str:
    return str(entry.get("name", f"f{i}"))


# Report assembly ---------------------------------------------------------------------------


def jsonable(obj):
    """Plain JSON types; non-finite floats become the strings "inf", "-inf" and "nan"."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _curve_rows(r, lhs, rhs, ratio):
    rows = []
    order = np.argsort(np.asarray(r, dtype=float), kind="stable")
    for i in order:
        vals = [float(r[i]), float(lhs[i]), float(rhs[i]), float(ratio[i])]
        flag = ""
        cells = []
        for v in vals:
            if math.isfinite(v):
                cells.append(repr(v))
            else:
                cells.append("")
                flag = "nan" if math.isnan(v) else "diverges"
        rows.append(cells + [flag])
    return rows


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


class Run:
    """Collects result blocks, curves and verdicts for one invocation."""

    def __init__(self, spec: ScenarioSpec, command: str):
        self.spec = spec
        self.command = command
        self.results: dict = {}
        self.curves: dict[str, str] = {}
        self.failures: list[str] = []

    def verdict(self, key: str, ok: bool):
        if not ok:
            self.failures.append(key)

    def document(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "header": harness.REPORT_HEADER,
            "scenario": self.spec.echo(),
            "results": self.results,
            "provenance": harness.provenance(self.spec),
            "status": "FAIL" if self.failures else "PASS",
            "failed": sorted(set(self.failures)),
        }


def do_conditions(run: Run):
    spec = run.spec
    if not spec.conditions and not spec.kernel_conditions:
        raise ScenarioError("scenario declares no conditions")
    block = {}
    if spec.conditions:
        summaries, reports = harness.run_prechecks(spec)
        for cid, rep in reports.items():
            run.curves[f"condition_{cid}"] = render_csv(CURVE_COLUMNS, _curve_rows(rep.grid, rep.numerator, rep.denominator, rep.ratio))
            run.verdict(cid, summaries[cid]["met"])
        block["conditions"] = summaries
    if spec.kernel_conditions:
        kern = harness.kernel_precheck(spec)
        for key, entry in kern.items():
            run.verdict(f"kernel_{key}", entry["met"])
        block["kernel_conditions"] = kern
    run.results["check-conditions"] = block


def _norm_entry(spec: ScenarioSpec, f) -> dict:
    out = {}
    if spec.phi is None:
        raise ScenarioError("norm needs a source Young function")
    if spec.weight1 is not None:
        if isinstance(f, SimpleFunction):
            raise ScenarioError("Morrey norms need geometry; use representation 'grid'")
        out["morrey"] = morrey_norm(f, spec.phi, spec.weight1).to_dict()
        out["weak_morrey"] = weak_morrey_norm(f, spec.phi, spec.weight1).to_dict()
    else:
        out["luxemburg"] = luxemburg_norm(f, spec.phi).to_dict()
        out["weak"] = weak_norm(f, spec.phi).to_dict()
    return out


def do_norm(run: Run):
    spec = run.spec
    if not spec.functions:
        raise ScenarioError("scenario declares no functions")
    block = {}
    for i, entry in enumerate(spec.functions):
        name = _function_name(entry, i)
        try:
            block[name] = _norm_entry(spec, build_function(entry, spec))
        except (ResolutionError, ArithmeticError) as exc:
            block[name] = {"error": str(exc)}
            run.verdict(f"norm_{name}", False)
    run.results["norm"] = block


def do_apply(run: Run):
    spec = run.spec
    if spec.operator is None or not spec.functions or not spec.points:
        raise ScenarioError("apply-op needs an operator, functions and points")
    block = {}
    per, sub = int(spec.grid["radius_per_decade"]), int(spec.grid["ring_subdivisions"])
    for i, entry in enumerate(spec.functions):
        name = _function_name(entry, i)
        f = build_function(entry, spec)
        if isinstance(f, SimpleFunction):
            raise ScenarioError(f"{name}: operators need geometry; use representation 'grid'")
        ev = apply_operator(spec.operator, f, np.asarray(spec.points, dtype=float), spec.kernel, per, sub)
        block[name] = ev.to_dict()
        rows = [[";".join(repr(float(c)) for c in p), repr(float(v)) if math.isfinite(v) else ""] for p, v in zip(ev.points, ev.values)]
        run.curves[f"apply_{name}"] = render_csv(("point", "value"), rows)
    run.results["apply-op"] = block


def do_verify(run: Run):
    spec = run.spec
    rep = harness.empirical_norm(spec)
    block = rep.to_dict()
    run.verdict("verify", rep.summary == "PASS")
    if spec.necessity is not None:
        nec = spec.necessity
        probe = harness.necessity_probe(
            spec, float(nec.get("r_min", 1e-2)), float(nec.get("r_max", 1e2)),
            int(nec.get("count", 9)), int(nec.get("cells", 256)),
        )
        block["necessity"] = probe
        run.verdict("necessity", probe["verdict"] == spec.expected.get("necessity", "pass"))
        lower = np.asarray(probe["lower_bound"])
        ratio = np.asarray(probe["norm_ratio"])
        run.curves["necessity"] = render_csv(CURVE_COLUMNS, _curve_rows(probe["radii"], lower, ratio, lower / ratio))
    hed = spec.raw.get("hedberg")
    if hed:
        study = harness.hedberg_study(spec, hed.get("points"), int(hed.get("levels", 2)))
        block["hedberg"] = study
        tol = float(hed.get("tolerance", 0.1))
        run.verdict("hedberg", math.isfinite(study["levels"][-1]["c1"]) and study["drift"] < tol)
    run.results["verify"] = block


def do_report(run: Run):
    spec = run.spec
    ran = False
    if spec.conditions or spec.kernel_conditions:
        do_conditions(run)
        ran = True
    if spec.functions:
        do_norm(run)
        ran = True
        if spec.operator is not None and spec.points:
            do_apply(run)
    if spec.operator is not None and spec.phi is not None and spec.psi is not None:
        do_verify(run)
        ran = True
    if not ran:
        raise ScenarioError("scenario declares nothing to run")


HANDLERS = {
    "check-conditions": do_conditions,
    "norm": do_norm,
    "apply-op": do_apply,
    "verify": do_verify,
    "report": do_report,
}


def write_outputs(run: Run, out: Path, fmt: str) -> list[Path]:
    """Render everything in memory first, then write each file once."""
    files = {}
    if fmt in ("json", "both"):
        files["report.json"] = json.dumps(jsonable(run.document()), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if fmt in ("csv", "both"):
        for name, text in sorted(run.curves.items()):
            files[f"{name}.csv"] = text
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    try:
        spec = load_scenario(args.scenario, args.grid_density, args.seed)
        job = Run(spec, args.command)
        HANDLERS[args.command](job)
    except dsl.DslError as exc:
        print(f"orliczkit: expression error: {exc}", file=sys.stderr)
        return 1
    except (ScenarioError, ResolutionError, OSError) as exc:
        print(f"orliczkit: {exc}", file=sys.stderr)
        return 1
    written = write_outputs(job, Path(args.out), args.format)
    status = "FAIL" if job.failures else "PASS"
    detail = f" ({', '.join(sorted(set(job.failures)))})" if job.failures else ""
    print(f"{spec.name}: {args.command} {status}{detail}; wrote {len(written)} file(s) to {args.out}")
    return 2 if job.failures else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
