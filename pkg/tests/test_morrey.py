import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczkit.morrey import (
    default_lattice,
    g_phi_check,
    inverse_weight,
    morrey_norm,
    normalize_weight,
    power_weight,
    triviality_check,
    weak_morrey_norm,
    weight_from_text,
)
from orliczkit.norms import luxemburg_norm
from orliczkit.sampling import Ball, GridFunction, characteristic_ball
from orliczkit.young import builtin_young, default_probe, generalized_inverse

BOX = ((-4.0,), (4.0,))
T2 = builtin_young("power:2")


def bump_weight(phi, lam_over_p):
    return inverse_weight(phi, 1, factor=lambda t: t**lam_over_p * (1.0 + 0.5 * np.sin(np.log(t))), label="bumped")


def test_inverse_weight_gives_orlicz_norm():
    f = characteristic_ball(Ball((0.3,), 0.7), *BOX, 512)
    assert morrey_norm(f, T2, inverse_weight(T2)).value == pytest.approx(luxemburg_norm(f, T2).value, rel=1e-9)


def test_classical_against_dense_lattice():
    # Phi = t^2, phi(t) = t^{(lambda - n)/p} with lambda = 1/2: the defining quantity is r^{-1/4} ||f||_{L^2(B(x, r))}
    f = characteristic_ball(Ball((0.0,), 1.0), *BOX, 512)
    weight = power_weight(-0.25)
    got = morrey_norm(f, T2, weight)
    centers, radii = default_lattice(f)
    dense_c = np.linspace(centers.min(), centers.max(), 10 * len(centers))
    dense_r = np.geomspace(radii.min(), radii.max(), 10 * len(radii))
    pts = f.centers()[f.values > 0][:, 0]
    hits = np.abs(pts[None, None, :] - dense_c[:, None, None]) <= dense_r[None, :, None]
    oracle = float(np.max(dense_r ** -0.25 * np.sqrt(hits.sum(axis=2) * f.h)))
    step = (radii[1] / radii[0]) ** 0.25
    assert oracle / step <= got.value <= oracle * (1 + 1e-9)


def test_char_ball_sandwich_with_ball_on_lattice():
    r0 = 0.5
    f = characteristic_ball(Ball((0.0,), r0), *BOX, 1024)
    weight = power_weight(-0.25)
    val = morrey_norm(f, T2, weight, extra_centers=[(0.0,)], extra_radii=[r0]).value
    scaled = float(weight(np.array([r0]))[0]) * val
    assert 1.0 <= scaled <= 4.0


def test_weak_below_strong():
    f = GridFunction.from_function(lambda p: np.maximum(0.0, 1.0 - np.abs(p[:, 0])), *BOX, 256)
    w = power_weight(-0.25)
    assert weak_morrey_norm(f, T2, w).value <= morrey_norm(f, T2, w).value * (1 + 1e-12)


def test_g_phi_classical_constants():
    ev = g_phi_check(power_weight(-0.25), T2)
    assert ev.inc_verdict == "pass" and ev.dec_verdict == "pass"
    assert ev.inc_constant == pytest.approx(1.0, abs=1e-9)
    assert ev.dec_constant == pytest.approx(1.0, abs=1e-9)


def test_g_phi_inverse_weight():
    ev = g_phi_check(inverse_weight(T2), T2)
    assert ev.inc_verdict == "pass" and ev.dec_verdict == "pass"
    assert ev.inc_constant == pytest.approx(1.0, abs=1e-9)


def test_g_phi_fails_on_growing_measure_quantity():
    ev = g_phi_check(inverse_weight(T2, factor=lambda t: t**2.0), T2)
    assert ev.dec_verdict == "fail"
    r, s = ev.dec_witness
    assert r < s


def test_triviality_exponential_decay():
    rep = triviality_check(weight_from_text("exp(-t)"), T2)
    assert rep.verdict == "trivial"
    assert rep.clauses["large_radius"].diverges


def test_triviality_inverse_weight():
    rep = triviality_check(inverse_weight(T2), T2)
    assert rep.verdict == "nontrivial"
    assert all(not c.diverges for c in rep.clauses.values())


def test_triviality_reciprocal_weight_clauses():
    # phi(r)^{-1} = r stays bounded near 0, Phi^{-1}(r^{-1}) r / phi(r) = r^{3/2} too; only the large-radius
    # clause sup_{r > t} Phi^{-1}(r^{-1}) / phi(r) = sup r^{1/2} diverges
    rep = triviality_check(weight_from_text("t^(-1)"), T2)
    assert not rep.clauses["small_radius"].diverges
    assert not rep.clauses["measure_normalized"].diverges
    assert rep.clauses["large_radius"].diverges
    assert rep.verdict == "trivial"


def test_normalize_keeps_monotone_weight():
    w = power_weight(-0.25)
    probe = default_probe()
    for direction in ("inverse-monotone", "measure-monotone"):
        psi = normalize_weight(w, T2, direction)
        assert np.allclose(psi(probe), w(probe), rtol=1e-12)


def test_normalize_bumped_weight_is_monotone_and_below():
    w = bump_weight(T2, 0.25)
    probe = default_probe()
    psi = normalize_weight(w, T2, "inverse-monotone")
    assert np.all(psi(probe) <= w(probe) * (1 + 1e-15))
    ratio = psi(probe) / generalized_inverse(T2, probe**-1.0)
    # exact up to the rounding of recomputing psi / Phi^{-1}
    assert np.all(np.diff(ratio) >= -4e-16 * ratio[1:])


def test_normalize_measure_direction_is_monotone():
    w = bump_weight(T2, 0.25)
    probe = default_probe()
    psi = normalize_weight(w, T2, "measure-monotone")
    assert np.all(psi(probe) <= w(probe) * (1 + 1e-15))
    ratio = psi(probe) / (generalized_inverse(T2, probe**-1.0) * probe)
    assert np.all(np.diff(ratio) <= 4e-16 * ratio[:-1])


def test_normalize_trivial_weight_raises():
    with pytest.raises(ValueError, match="trivial"):
        normalize_weight(weight_from_text("exp(-t)"), T2, "measure-monotone")


def test_normalized_norm_equivalent():
    w = bump_weight(T2, 0.25)
    psi = normalize_weight(w, T2, "inverse-monotone")
    # phi / C <= psi <= phi with C the almost-increasing constant of phi / Phi^{-1}(t^-n)
    c_inc = g_phi_check(w, T2).inc_constant
    assert 1.0 < c_inc < 3.0
    rng = np.random.default_rng(11)
    for _ in range(5):
        c, r = rng.uniform(-1.0, 1.0), rng.uniform(0.2, 1.5)
        f = characteristic_ball(Ball((c,), r), *BOX, 512).scale(rng.uniform(0.5, 2.0))
        a, b = morrey_norm(f, T2, w).value, morrey_norm(f, T2, psi).value
        assert a * (1 - 1e-12) <= b <= c_inc * a * (1 + 1e-9)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([1.5, 2.0, 4.0]), st.floats(0.1, 0.9), st.floats(0.05, 1.5), st.floats(-1.0, 1.0))
def test_char_ball_sandwich(p, lam, r0, c):
    # phi = t^{(lambda - 1)/p} is in G_Phi and decreasing for 0 < lambda < 1
    phi = builtin_young(f"power:{p}")
    weight = power_weight((lam - 1.0) / p)
    f = characteristic_ball(Ball((c,), r0), *BOX, 1024)
    val = morrey_norm(f, phi, weight, extra_centers=[(c,)], extra_radii=[r0]).value
    scaled = float(weight(np.array([r0]))[0]) * val
    assert 1.0 - 1e-9 <= scaled <= 4.0
