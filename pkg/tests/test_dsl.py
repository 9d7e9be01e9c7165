import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczkit import dsl
from orliczkit.young import builtin_young, eval_young

EX39_TEXT = "piecewise(t<1: t^(3/2); t>=1: t*ln(e*t)^(1/2))"
KERNEL16_TEXT = "piecewise(t<1: t^n*ln(e/t)^(-1/2); t>=1: exp(-(t-1)))"


def test_power_node():
    ast = dsl.parse("t^2")
    assert isinstance(ast, dsl.Bin) and ast.op == "^"
    assert dsl.evaluate(ast, 3.0) == pytest.approx(9.0)


def test_example_phi_text_matches_builtin():
    ast = dsl.parse(EX39_TEXT)
    t = np.logspace(-3, 3, 61)
    assert np.allclose(dsl.evaluate(ast, t), eval_young(builtin_young("example39_phi"), t), rtol=1e-12)


def test_example_phi_continuous_at_one():
    ast = dsl.parse(EX39_TEXT)
    assert dsl.evaluate(ast, 1.0) == pytest.approx(1.0)
    cont = [d for d in dsl.validate_young(ast) if d.check == "continuity"]
    assert cont and all(d.ok for d in cont)


def test_kernel_text_needs_binding():
    with pytest.raises(dsl.DslError):
        dsl.parse(KERNEL16_TEXT)
    ast = dsl.parse(KERNEL16_TEXT, {"n": 1})
    assert dsl.evaluate(ast, 1.0) == pytest.approx(1.0)
    assert dsl.evaluate(ast, 0.5) == pytest.approx(0.5 / math.sqrt(math.log(2 * math.e)))


def test_precedence():
    assert dsl.evaluate(dsl.parse("-2^2"), 0.0) == pytest.approx(-4.0)
    assert dsl.evaluate(dsl.parse("1+2*3^2"), 0.0) == pytest.approx(19.0)
    assert dsl.evaluate(dsl.parse("2^3^2"), 0.0) == pytest.approx(512.0)
    assert dsl.evaluate(dsl.parse("8/2/2"), 0.0) == pytest.approx(2.0)


def test_overflow_saturates():
    assert dsl.evaluate(dsl.parse("exp(t)"), 1e4) == math.inf


def test_zero_times_infinity_is_zero():
    assert dsl.evaluate(dsl.parse("t*exp(1/t)"), 0.0) == 0.0


def test_domain_errors():
    with pytest.raises(dsl.DslDomainError):
        dsl.evaluate(dsl.parse("ln(t-1)"), 0.5)
    with pytest.raises(dsl.DslDomainError):
        dsl.evaluate(dsl.parse("(t-1)^(1/2)"), 0.5)


def test_syntax_error_offset():
    with pytest.raises(dsl.DslSyntaxError) as info:
        dsl.parse("t^2 + * 3")
    assert info.value.offset == 6


def test_guard_coverage_gap_and_overlap():
    with pytest.raises(dsl.GuardCoverageError):
        dsl.parse("piecewise(t<1: t; t>2: t)")
    with pytest.raises(dsl.GuardCoverageError):
        dsl.parse("piecewise(t<2: t; t>=1: t)")


def test_validate_young_square_ok():
    assert all(d.ok for d in dsl.validate_young(dsl.parse("t^2")))


def test_validate_young_log_not_convex():
    diags = {d.check: d for d in dsl.validate_young(dsl.parse("ln(1+t)"))}
    assert not diags["convex"].ok
    a, b = diags["convex"].witness
    assert a < b


def test_sqrt_kernel_ok_but_not_young():
    ast = dsl.parse("t^(1/2)")
    assert all(d.ok for d in dsl.validate_kernel(ast))
    diags = {d.check: d for d in dsl.validate_young(ast)}
    assert not diags["convex"].ok


def test_deterministic_parse():
    assert dsl.parse(EX39_TEXT) == dsl.parse(EX39_TEXT)


# Generated expressions for round-trip and determinism properties

leaf = st.one_of(
    st.just("t"),
    st.just("e"),
    st.integers(min_value=0, max_value=50).map(str),
    st.floats(min_value=0.01, max_value=10, allow_nan=False).map(lambda x: f"{x:.3f}"),
)


def _combine(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*", "/", "^"]), children).map(lambda x: f"({x[0]}{x[1]}{x[2]})")
    calls = st.tuples(st.sampled_from(["ln", "exp"]), children).map(lambda x: f"{x[0]}({x[1]})")
    pair = st.tuples(st.sampled_from(["min", "max"]), children, children).map(lambda x: f"{x[0]}({x[1]}, {x[2]})")
    return st.one_of(binary, calls, pair, children.map(lambda c: f"-{c}"))


expressions = st.recursive(leaf, _combine, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(expressions)
def test_render_round_trip(text):
    ast = dsl.parse(text)
    assert dsl.parse(dsl.render(ast)) == ast


@settings(max_examples=100, deadline=None)
@given(expressions, st.floats(min_value=0.0, max_value=20.0))
def test_evaluation_deterministic(text, t):
    ast = dsl.parse(text)
    try:
        a = dsl.evaluate(ast, t)
    except dsl.DslDomainError:
        with pytest.raises(dsl.DslDomainError):
            dsl.evaluate(dsl.parse(text), t)
        return
    b = dsl.evaluate(dsl.parse(text), t)
    assert (math.isnan(a) and math.isnan(b)) or a == b
