import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczkit.quadrature import (
    cumulative_log_integral,
    improper_log_integral,
    log_integral,
    log_trapz,
)

E1_AT_ONE = 0.21938393439552029  # exponential integral E1(1)


def test_log_trapz_identity():
    assert log_trapz(lambda t: t, 1.0, 2.0) == pytest.approx(1.0, rel=1e-5)


def test_empty_range_is_zero():
    assert log_trapz(lambda t: t, 2.0, 1.0) == 0.0


def test_log_integral_power_with_error_estimate():
    res = log_integral(lambda t: t**2, 0.5, 3.0)
    exact = (9.0 - 0.25) / 2.0
    assert res.value == pytest.approx(exact, rel=1e-9)
    assert res.error < 1e-6 * exact


def test_improper_toward_zero():
    res = improper_log_integral(lambda t: np.sqrt(t), 1.0, "zero", 10.0)
    assert not res.diverged
    assert res.value == pytest.approx(2.0, rel=1e-8)


def test_improper_toward_infinity():
    res = improper_log_integral(lambda t: 1.0 / t, 1.0, "infinity", 2.0)
    assert res.value == pytest.approx(1.0, rel=1e-8)


def test_improper_exponential_tail():
    res = improper_log_integral(lambda t: np.exp(-t), 1.0, "infinity", 2.0)
    assert res.value == pytest.approx(E1_AT_ONE, rel=1e-8)


def test_log_divergence_detected():
    assert improper_log_integral(lambda t: np.ones_like(t), 1.0, "zero", 10.0).diverged
    assert improper_log_integral(lambda t: np.ones_like(t), 1.0, "infinity", 2.0).diverged


def test_underflowed_tail_returns_quickly():
    start = time.perf_counter()
    res = improper_log_integral(lambda t: np.exp(-t), 1e4, "infinity", 2.0)
    assert res.value == 0.0 and not res.diverged
    assert time.perf_counter() - start < 1.0


def test_breaks_recover_kink_accuracy():
    # |ln t| has a kink at t = 1; the integral over [1/2, 2] against dt/t is (ln 2)^2
    fn = lambda t: np.abs(np.log(t))
    exact = math.log(2.0) ** 2
    split = log_trapz(fn, 0.5, 2.0, 64, breaks=(1.0,))
    plain = log_trapz(fn, 0.5, 2.0, 64)
    assert abs(split - exact) < abs(plain - exact)
    assert split == pytest.approx(exact, rel=1e-4)


def test_cumulative_rejects_unsorted():
    with pytest.raises(ValueError):
        cumulative_log_integral(lambda t: t, [2.0, 1.0])


def test_cumulative_with_breaks_keeps_input_order():
    rs = np.array([0.5, 0.8, 1.5, 3.0])
    fn = lambda t: np.abs(np.log(t))
    run = cumulative_log_integral(fn, rs, breaks=(1.0,))
    assert run[0] == 0.0
    exact = [0.0] + [(math.log(0.5) ** 2 - math.log(b) ** 2) / 2 if b < 1 else (math.log(0.5) ** 2 + math.log(b) ** 2) / 2 for b in rs[1:]]
    assert np.allclose(run, exact, rtol=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=1e-3, max_value=1e2), st.floats(min_value=1.01, max_value=1e3))
def test_cumulative_matches_closed_form(alpha, a, stretch):
    rs = a * np.geomspace(1.0, stretch, 7)
    run = cumulative_log_integral(lambda t: t**alpha, rs)
    log_ratio = np.log(rs / a)
    # a^alpha (exp(alpha L) - 1) / alpha stays accurate as alpha -> 0
    exact = log_ratio if alpha == 0 else a**alpha * np.expm1(alpha * log_ratio) / alpha
    assert np.allclose(run, exact, rtol=1e-7, atol=1e-12 * np.max(np.abs(exact)))


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1e-3, max_value=1e3))
def test_additive_over_adjacent_ranges(a, b, c):
    a, b, c = sorted((a, b, c))
    fn = lambda t: t / (1.0 + t * t)
    whole = log_integral(fn, a, c).value
    parts = log_integral(fn, a, b).value + log_integral(fn, b, c).value
    assert whole == pytest.approx(parts, rel=1e-8, abs=1e-14)
