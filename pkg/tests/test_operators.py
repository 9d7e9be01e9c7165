import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczkit.conditions import ConditionInputs, check
from orliczkit.kernel import builtin_kernel, kernel_from_text
from orliczkit.norms import luxemburg_norm
from orliczkit.operators import (
    HypothesisError,
    apply_operator,
    frac_integral,
    frac_maximal,
    hardy_littlewood,
    hedberg_integral,
    hedberg_maximal,
    lattice_count,
    local_maximal,
    potential_lower_bound,
    radius_grid,
    trivial_lower,
)
from orliczkit.sampling import Ball, GridFunction, characteristic_ball, integrate
from orliczkit.young import builtin_young

BOX = ((-4.0,), (4.0,))
UNIT = characteristic_ball(Ball((0.5,), 0.5), *BOX, 2048)  # chi_(0,1)


def blocks(values, lo=-1.0, width=2.0, per=32):
    vals = np.repeat(np.asarray(values, dtype=float), per)
    pad = np.zeros(int(round(3.0 / (width / vals.size))))
    return GridFunction((lo - 3.0,), width / vals.size, np.concatenate([pad, vals, pad]))


def test_maximal_of_constant():
    f = GridFunction.from_function(lambda p: np.full(len(p), 3.0), *BOX, 512)
    assert hardy_littlewood(f, (0.0,)) == pytest.approx(3.0, rel=1e-12)


def test_maximal_away_from_support():
    # the best ball around x = 2 is (0, 4), attained at r = 2
    assert hardy_littlewood(UNIT, (2.0,), per_decade=1024) == pytest.approx(0.25, abs=1e-3)


def test_maximal_inside_support():
    assert hardy_littlewood(UNIT, (0.5,)) == pytest.approx(1.0, rel=1e-12)


def test_maximal_grid_refinement_is_monotone():
    coarse = hardy_littlewood(UNIT, (2.0,), per_decade=32)
    fine = hardy_littlewood(UNIT, (2.0,), per_decade=64, extra_radii=radius_grid(UNIT.h, 8.0, 32))
    assert fine >= coarse


def test_frac_maximal_scaled_mean():
    # rho(r) = r: r |B|^{-1} int f -> ||f||_1 / v_1 = 1/2 as r grows
    k = kernel_from_text("t")
    for x in (-1.0, 0.3, 2.5):
        assert frac_maximal(k, UNIT, (x,)) == pytest.approx(0.5, rel=1e-2)


def test_frac_maximal_constant_kernel_is_hardy_littlewood():
    rng = np.random.default_rng(7)
    k = builtin_kernel("one")
    for x in rng.uniform(-3.0, 3.0, 10):
        assert frac_maximal(k, UNIT, (x,)) == hardy_littlewood(UNIT, (x,))


def test_frac_maximal_half_power_lower_bound():
    # the witness radius 1/2 fills the support exactly
    k = builtin_kernel("power:0.5")
    assert frac_maximal(k, UNIT, (0.5,), extra_radii=(0.5,)) >= math.sqrt(0.5)
    # without it the sup is off by at most one grid step of the square root
    assert frac_maximal(k, UNIT, (0.5,)) >= math.sqrt(0.5) / 10 ** (1 / 128)


def test_frac_integral_unit_kernel_gives_mass():
    k = kernel_from_text("t")
    assert frac_integral(k, UNIT, (0.3,)) == pytest.approx(1.0, rel=1e-2)
    assert frac_integral(k, UNIT, (3.0,)) == pytest.approx(1.0, rel=1e-2)


def test_frac_integral_half_power_centred():
    k = builtin_kernel("power:0.5")
    f = characteristic_ball(Ball((0.0,), 1.0), *BOX, 2048)
    assert frac_integral(k, f, (0.0,)) == pytest.approx(4.0, rel=1e-2)


def test_potential_lower_bound_half_power():
    k = builtin_kernel("power:0.5")
    rep = potential_lower_bound(k, 2.0, np.array([[0.25]]))
    assert rep.lhs[0] == pytest.approx(2.0, rel=1e-9)
    assert math.isfinite(rep.constant) and rep.constant > 0


def test_trivial_lower_example():
    k = builtin_kernel("power:0.5")
    rep = trivial_lower(k, 1.0, np.array([[0.0]]))
    assert rep.holds
    assert rep.lhs[0] == 1.0 and rep.rhs[0] >= 1.0


def test_local_maximal_constant_kernel():
    f = characteristic_ball(Ball((0.0,), 0.5), *BOX, 1024)
    rep = local_maximal(builtin_kernel("one"), f, (0.0,), 0.5)
    assert rep.constant == pytest.approx(1.0, rel=1e-12)


def test_local_maximal_requires_support_in_ball():
    with pytest.raises(HypothesisError):
        local_maximal(builtin_kernel("one"), UNIT, (0.0,), 0.1)


def test_hedberg_on_classical_triple():
    k = builtin_kernel("power:0.5")
    phi, psi = builtin_young("power:4/3"), builtin_young("power:4")
    rng = np.random.default_rng(3)
    for _ in range(3):
        f = blocks(rng.uniform(0.0, 2.0, 6))
        pts = np.array([[-0.5], [0.2], [1.5]])
        for lemma in (hedberg_integral, hedberg_maximal):
            rep = lemma(k, f, pts, phi, psi)
            assert math.isfinite(rep.constant) and rep.constant > 0


def test_hedberg_refuses_failed_hypothesis():
    inputs = ConditionInputs(kernel=builtin_kernel("power:0.5"), phi=builtin_young("power:4/3"), psi=builtin_young("power:2"), dim_n=1)
    failed = check("orlicz_necessary", inputs)
    assert failed.verdict == "fail"
    with pytest.raises(HypothesisError):
        hedberg_integral(inputs.kernel, UNIT, np.array([[0.0]]), inputs.phi, inputs.psi, hypotheses=[failed])


def test_lattice_count_matches_cell_count():
    counts = lattice_count((0.0,), np.array([0.5, 1.0]), (-4.0,), 8.0 / 2048)
    assert counts.tolist() == [2 * round(0.5 / (8.0 / 2048)), 2 * round(1.0 / (8.0 / 2048))]


def test_apply_operator_records_metadata():
    ev = apply_operator("I_rho", UNIT, np.array([[0.0], [0.5]]), kernel=builtin_kernel("power:0.5"))
    assert ev.values.shape == (2,) and np.all(ev.values > 0)
    assert ev.metadata["kernel"] == "power:0.5"


OPERATORS = [
    ("M", None),
    ("M_rho", "power:0.5"),
    ("I_rho", "power:0.5"),
]


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(OPERATORS), st.lists(st.floats(0.0, 3.0), min_size=4, max_size=4), st.floats(1e-3, 1e3))
def test_positive_homogeneity(op, values, c):
    name, kname = op
    kernel = builtin_kernel(kname) if kname else None
    f = blocks(values)
    pts = np.array([[-0.7], [0.1], [2.0]])
    base = apply_operator(name, f, pts, kernel=kernel).values
    scaled = apply_operator(name, f.scale(c), pts, kernel=kernel).values
    assert np.allclose(scaled, c * base, rtol=1e-12, atol=0.0)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(OPERATORS), st.lists(st.floats(0.0, 3.0), min_size=4, max_size=4), st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4))
def test_monotone_in_f(op, values, bumps):
    name, kname = op
    kernel = builtin_kernel(kname) if kname else None
    f = blocks(values)
    g = blocks(np.asarray(values) + np.asarray(bumps))
    pts = np.array([[-0.7], [0.1], [2.0]])
    low = apply_operator(name, f, pts, kernel=kernel).values
    high = apply_operator(name, g, pts, kernel=kernel).values
    assert np.all(low <= high * (1 + 1e-12))


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(0.0, 3.0), min_size=5, max_size=5), st.floats(-2.0, 2.0))
def test_unit_kernel_integrates(values, x):
    f = blocks(values)
    mass = integrate(f)
    if mass > 1e-3:
        assert frac_integral(kernel_from_text("t"), f, (x,)) == pytest.approx(mass, rel=1e-2)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(-0.45, 0.45))
def test_trivial_lower_exact(r, frac):
    rep = trivial_lower(builtin_kernel("power:0.5"), r, np.array([[frac * r]]))
    assert rep.holds
