import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczkit.young import (
    builtin_young,
    complementary,
    default_probe,
    eval_young,
    generalized_inverse,
    growth_class,
    power_scale,
    verify_inverse_identities,
    young_from_text,
)

POWERS = ["power:1", "power:1.5", "power:2", "power:4"]
FINITE = POWERS + ["example39_phi", "example39_psi"]


def brute_conjugate(phi_fn, r, s_max=50.0, points=10_000):
    s = np.linspace(0.0, s_max, points)
    return float(np.max(r * s - phi_fn(s)))


def test_power_evaluation():
    assert eval_young(builtin_young("power:3"), 2.0) == pytest.approx(8.0)


def test_linf_type_function():
    phi = builtin_young("linf")
    assert eval_young(phi, 0.5) == 0.0
    assert eval_young(phi, 2.0) == math.inf
    assert not phi.finite_valued


def test_example_phi_value_at_two():
    phi = builtin_young("example39_phi")
    assert eval_young(phi, 2.0) == pytest.approx(2.0 * math.sqrt(math.log(2.0 * math.e)), rel=1e-12)


def test_value_at_infinity_is_infinite():
    for name in FINITE + ["linf"]:
        assert eval_young(builtin_young(name), math.inf) == math.inf


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        eval_young(builtin_young("power:2"), -1.0)


def test_fractional_exponent_names():
    assert eval_young(builtin_young("power:4/3"), 8.0) == pytest.approx(16.0)
    with pytest.raises(ValueError):
        builtin_young("power:1/2")


def test_inverse_of_cube():
    assert generalized_inverse(builtin_young("power:3"), 8.0) == pytest.approx(2.0, rel=1e-12)


def test_inverse_over_jump():
    assert generalized_inverse(builtin_young("linf"), 5.0) == pytest.approx(1.0, rel=1e-12)


def test_inverse_at_infinity():
    for name in ["power:2", "linf", "example39_phi"]:
        assert generalized_inverse(builtin_young(name), math.inf) == math.inf


def test_example_phi_inverse_asymptotics():
    # calibration run gave c = 1.0881; frozen with a small margin
    phi = builtin_young("example39_phi")
    u = np.logspace(0, 6, 289)
    q = generalized_inverse(phi, u) / (u * np.log(math.e * u) ** -0.5)
    c = max(q.max(), 1.0 / q.min())
    assert c <= 1.1


def test_conjugate_of_half_square():
    phi = young_from_text("t^2/2")
    conj = complementary(phi)
    for r in (0.5, 1.0, 2.0):
        oracle = brute_conjugate(lambda s: s**2 / 2, r)
        assert eval_young(conj, r) == pytest.approx(oracle, rel=1e-6)
        assert eval_young(conj, r) == pytest.approx(r**2 / 2, rel=1e-9)


def test_conjugate_of_identity_is_linf_type():
    conj = complementary(builtin_young("power:1"))
    assert eval_young(conj, 0.5) == 0.0
    assert eval_young(conj, 2.0) == math.inf
    assert not conj.finite_valued
    assert conj.jump_point == pytest.approx(1.0, rel=1e-9)


def test_conjugate_of_cube_over_three():
    conj = complementary(young_from_text("t^3/3"))
    oracle = brute_conjugate(lambda s: s**3 / 3, 4.0)
    assert eval_young(conj, 4.0) == pytest.approx(oracle, rel=1e-6)
    assert eval_young(conj, 4.0) == pytest.approx(16.0 / 3.0, rel=1e-9)


def test_growth_of_square():
    g = growth_class(builtin_young("power:2"), np.logspace(-4, 4, 401))
    assert g.delta2_constant == pytest.approx(4.0)
    assert g.nabla2_witness is not None and g.nabla2_witness[0] == pytest.approx(2.0)


def test_growth_of_exponential_diverges():
    g = growth_class(young_from_text("exp(t)-1"), np.logspace(-4, 4, 401))
    assert g.delta2_growing


def test_growth_of_identity_has_no_nabla2():
    assert growth_class(builtin_young("power:1")).nabla2_witness is None


def test_sandwich_at_nine_for_square():
    phi = builtin_young("power:2")
    conj_inv = generalized_inverse(phi.conjugate(), 9.0)
    # conjugate of t^2 is t^2/4, so its inverse at 9 is 6
    assert conj_inv == pytest.approx(6.0, rel=1e-6)
    product = generalized_inverse(phi, 9.0) * conj_inv
    assert 9.0 <= product * (1 + 1e-6) and product <= 18.0


def test_sandwich_boundary_for_identity():
    phi = builtin_young("power:1")
    for r in (0.1, 1.0, 7.0):
        assert generalized_inverse(phi.conjugate(), r) == pytest.approx(1.0, rel=1e-9)
        assert generalized_inverse(phi, r) == pytest.approx(r, rel=1e-12)


@pytest.mark.parametrize("name", ["example39_phi", "power:1.5", "linf"])
def test_inverse_identities_hold(name):
    rep = verify_inverse_identities(builtin_young(name), default_probe())
    assert rep.ok, rep.violations[:3]


def test_power_scale_square_to_fourth():
    psi = power_scale(builtin_young("power:2"), 0.5)
    t = np.array([0.3, 1.0, 2.5])
    assert np.allclose(eval_young(psi, t), t**4, rtol=1e-12)


def test_power_scale_inverse_relation():
    phi = builtin_young("power:3")
    psi = power_scale(phi, 0.4)
    u = np.logspace(-3, 3, 13)
    assert np.allclose(generalized_inverse(psi, u), generalized_inverse(phi, u) ** 0.4, rtol=1e-9)


def test_power_scale_identity_and_guard():
    phi = builtin_young("example39_phi")
    t = default_probe(1e-3, 1e3, 8)
    assert np.allclose(eval_young(power_scale(phi, 1.0), t), eval_young(phi, t), rtol=1e-12)
    with pytest.raises(ValueError):
        power_scale(phi, 1.5)


positive = st.floats(min_value=1e-5, max_value=1e5, allow_nan=False)
names = st.sampled_from(FINITE)


@settings(max_examples=60, deadline=None)
@given(names, positive, positive)
def test_inverse_monotone(name, s1, s2):
    phi = builtin_young(name)
    lo, hi = sorted((s1, s2))
    assert generalized_inverse(phi, lo) <= generalized_inverse(phi, hi) * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(names, positive, positive)
def test_inverse_midpoint_concave(name, s1, s2):
    phi = builtin_young(name)
    mid = generalized_inverse(phi, 0.5 * (s1 + s2))
    chord = 0.5 * (generalized_inverse(phi, s1) + generalized_inverse(phi, s2))
    assert mid >= chord * (1 - 1e-3)


@settings(max_examples=60, deadline=None)
@given(names, positive, st.floats(min_value=1e-3, max_value=0.999))
def test_inverse_scaling_bounds(name, t, alpha):
    phi = builtin_young(name)
    inv_t = generalized_inverse(phi, t)
    inv_at = generalized_inverse(phi, alpha * t)
    assert alpha * inv_t <= inv_at * (1 + 1e-9)
    assert inv_at <= inv_t * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(names, positive)
def test_inverse_doubling(name, s):
    phi = builtin_young(name)
    assert generalized_inverse(phi, 2 * s) <= 2 * generalized_inverse(phi, s) * (1 + 1e-9)


@settings(max_examples=8, deadline=None)
@given(
    st.sampled_from(["power:1.5", "power:2", "power:3", "example39_phi"]),
    st.lists(st.floats(min_value=1e-2, max_value=1e2), min_size=1, max_size=6),
)
def test_double_conjugate_recovers(name, rs):
    phi = builtin_young(name)
    r = np.asarray(rs)
    back = complementary(phi.conjugate())
    assert np.allclose(eval_young(back, r), eval_young(phi, r), rtol=1e-2)


@settings(max_examples=40, deadline=None)
@given(names, positive, positive)
def test_young_invariants(name, a, b):
    phi = builtin_young(name)
    lo, hi = sorted((a, b))
    assert eval_young(phi, 0.0) == 0.0
    assert eval_young(phi, lo) <= eval_young(phi, hi)
    assert eval_young(phi, 0.5 * (lo + hi)) <= 0.5 * (eval_young(phi, lo) + eval_young(phi, hi)) * (1 + 1e-9)
