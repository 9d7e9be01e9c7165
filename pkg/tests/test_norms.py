import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczkit.norms import (
    holder_check,
    luxemburg_norm,
    mean_bound_check,
    modular,
    prefix_norms,
    scaling_law_check,
    weak_norm,
)
from orliczkit.sampling import (
    Ball,
    GridFunction,
    RadialProfile,
    SimpleFunction,
    characteristic_ball,
    distribution,
)
from orliczkit.young import builtin_young, generalized_inverse

YOUNG = ["power:1", "power:1.5", "power:2", "power:4", "example39_phi"]

levels_st = st.lists(st.floats(min_value=0.01, max_value=50.0), min_size=1, max_size=8)
measures_st = st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=8, max_size=8)


def simple(levels, measures):
    return SimpleFunction(np.array(levels), np.array(measures[: len(levels)]))


def unit_blocks(values):
    """Piecewise constant function on [0, 1] with equal blocks, sampled on a fine grid."""
    per = 64
    return GridFunction((0.0,), 1.0 / (per * len(values)), np.repeat(np.asarray(values, dtype=float), per))


@pytest.mark.parametrize("name", YOUNG)
@pytest.mark.parametrize("measure", [0.1, 1.0, 10.0])
def test_characteristic_norms(name, measure):
    phi = builtin_young(name)
    f = SimpleFunction.characteristic(measure)
    expected = 1.0 / generalized_inverse(phi, 1.0 / measure)
    assert luxemburg_norm(f, phi).value == pytest.approx(expected, rel=1e-6)
    assert weak_norm(f, phi).value == pytest.approx(expected, rel=1e-6)


def test_power_norm_is_lp():
    f = characteristic_ball(Ball((1.0,), 1.0), (-4.0,), (4.0,), 1024)
    assert luxemburg_norm(f, builtin_young("power:2")).value == pytest.approx(math.sqrt(2.0), rel=1e-9)


def test_homogeneity_example():
    res = luxemburg_norm(SimpleFunction(np.array([3.0]), np.array([1.0])), builtin_young("power:2"))
    assert res.value == pytest.approx(3.0, rel=1e-12)


def test_zero_function():
    phi = builtin_young("power:2")
    zero = SimpleFunction(np.array([0.0]), np.array([1.0]))
    assert luxemburg_norm(zero, phi).value == 0.0
    assert weak_norm(zero, phi).value == 0.0


def test_weak_norm_radial_power():
    # m(t) = 2 t^{-2}, so t (2 t^{-2})^{1/2} = sqrt(2) for every large t
    p = RadialProfile.from_function(lambda t: t**-0.5, 1, r_max=1e6)
    assert weak_norm(p, builtin_young("power:2")).value == pytest.approx(math.sqrt(2.0), rel=1e-3)


def test_unbounded_flag():
    f = SimpleFunction(np.array([math.inf]), np.array([1.0]))
    for norm in (luxemburg_norm, weak_norm):
        res = norm(f, builtin_young("power:2"))
        assert res.unbounded and res.value == math.inf


def test_holder_char_ball():
    # the conjugate of t^2 is t^2/4, whose norm of chi_B is |B|^{1/2}/2, so rhs = 2 |B|^{1/2} |B|^{1/2}/2 = lhs
    f = characteristic_ball(Ball((0.0,), 0.5), (-2.0,), (2.0,), 1024)
    rep = holder_check(f, f, builtin_young("power:2"))
    assert rep.ratio == pytest.approx(1.0, rel=1e-6)
    assert rep.holds


def test_holder_zero():
    f = characteristic_ball(Ball((0.0,), 0.5), (-2.0,), (2.0,), 1024)
    rep = holder_check(f, f.scale(0.0), builtin_young("power:2"))
    assert rep.lhs == 0.0 and rep.ratio == 0.0


def test_mean_bound_char_ball():
    ball = Ball((0.0,), 1.0)
    f = characteristic_ball(ball, (-4.0,), (4.0,), 1024)
    assert mean_bound_check(f, ball, builtin_young("power:2")).ratio == pytest.approx(0.5, rel=1e-6)


def test_mean_bound_distance():
    ball = Ball((0.0,), 1.0)
    f = GridFunction.from_function(lambda p: np.abs(p[:, 0]) * (np.abs(p[:, 0]) <= 1.0), (-2.0,), (2.0,), 1024)
    rep = mean_bound_check(f, ball, builtin_young("power:2"))
    assert rep.holds and rep.ratio <= 1.0
    zero = mean_bound_check(f.scale(0.0), ball, builtin_young("power:2"))
    assert zero.ratio == 0.0


def test_scaling_char():
    f = SimpleFunction.characteristic(2.0)
    rep = scaling_law_check(f, builtin_young("power:2"), 0.5)
    assert rep.strong_lhs == pytest.approx(2.0**0.25, rel=1e-9)
    assert rep.strong_rhs == pytest.approx(2.0**0.25, rel=1e-9)


def test_scaling_identity():
    f = SimpleFunction(np.array([1.0, 4.0]), np.array([0.5, 0.2]))
    rep = scaling_law_check(f, builtin_young("example39_phi"), 1.0)
    assert rep.strong_lhs == pytest.approx(rep.strong_rhs, rel=1e-12)
    assert rep.weak_lhs == pytest.approx(rep.weak_rhs, rel=1e-12)


def test_prefix_norms_match_direct():
    phi = builtin_young("power:1.5")
    values = np.array([5.0, 3.0, 3.0, 1.0, 0.5])
    ks = np.array([1, 3, 5])
    strong = prefix_norms(values, 0.1, ks, phi)
    weak = prefix_norms(values, 0.1, ks, phi, weak=True)
    for k, s, w in zip(ks, strong, weak):
        f = SimpleFunction(values[:k], np.full(k, 0.1))
        assert s == pytest.approx(luxemburg_norm(f, phi).value, rel=1e-9)
        assert w == pytest.approx(weak_norm(f, phi).value, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(YOUNG), levels_st, measures_st)
def test_norm_modular_duality(name, levels, measures):
    phi = builtin_young(name)
    f = simple(levels, measures)
    strong = luxemburg_norm(f, phi).value
    assert 1 - 1e-6 <= modular(f, phi, strong) <= 1 + 1e-12
    w = weak_norm(f, phi).value
    # the left limit of Phi(t) m(f/w, t) at each level is Phi(c/w) |{f >= c}|
    for c in set(levels):
        assert float(phi(np.array([c / w]))[0]) * distribution(f, c, inclusive=True) <= 1 + 1e-6


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(YOUNG), levels_st, measures_st, st.floats(min_value=1e-3, max_value=1e3))
def test_homogeneity(name, levels, measures, c):
    phi = builtin_young(name)
    f = simple(levels, measures)
    for norm in (luxemburg_norm, weak_norm):
        assert norm(f.scale(c), phi).value == pytest.approx(c * norm(f, phi).value, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(YOUNG), levels_st, measures_st)
def test_weak_below_strong(name, levels, measures):
    phi = builtin_young(name)
    f = simple(levels, measures)
    assert weak_norm(f, phi).value <= luxemburg_norm(f, phi).value * (1 + 1e-9)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(YOUNG), st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=4, max_size=4), st.floats(0.05, 0.5), st.floats(0.5, 2.0))
def test_monotone_in_region(name, values, r1, r2):
    phi = builtin_young(name)
    f = GridFunction((-1.0,), 2.0 / 256, np.repeat(np.asarray(values), 64))
    small, large = Ball((0.0,), r1), Ball((0.0,), r2)
    assert luxemburg_norm(f, phi, small).value <= luxemburg_norm(f, phi, large).value * (1 + 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=5.0), min_size=6, max_size=6), st.lists(st.floats(min_value=0.0, max_value=5.0), min_size=6, max_size=6))
def test_holder_ratio_at_most_one(fv, gv):
    rep = holder_check(unit_blocks(fv), unit_blocks(gv), builtin_young("power:2"))
    assert rep.holds
    assert rep.ratio <= 1.0 + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(YOUNG), levels_st, measures_st, st.sampled_from([1 / 3, 1 / 2, 2 / 3]))
def test_scaling_law(name, levels, measures, beta):
    rep = scaling_law_check(simple(levels, measures), builtin_young(name), beta)
    assert rep.strong_lhs == pytest.approx(rep.strong_rhs, rel=1e-6)
    assert rep.weak_lhs == pytest.approx(rep.weak_rhs, rel=1e-6)
