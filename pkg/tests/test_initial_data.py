import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dampwave.initial_data import (DataProfile, RadialFunction, bump, integrals, make_case_A,
                                   make_case_B, radial_integral, zero_profile)


def trapezoid_oracle(phi, R, m=2048 * 64):
    r = np.linspace(0, R, m + 1)
    return 2 * math.pi * np.trapezoid(phi(r) * r, r)


def test_case_A_hypotheses(case_A):
    r = np.linspace(0, 1.5, 3001)
    assert np.max(case_A.f(r)) == 0.0
    assert np.min(case_A.g(r)) >= 0.0
    I = integrals(case_A)
    assert I.int_g > 0
    assert I.int_g == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("k", [1.0, 2.0, 3.5])
def test_case_A_integral_oracle(k):
    prof = make_case_A(k)
    val, err = radial_integral(prof.g, k, 2048)
    assert val == pytest.approx(trapezoid_oracle(prof.g, k), abs=1e-8)
    assert err < 1e-6


def test_case_B_identities(case_B_pos, case_B_neg):
    rng = np.random.default_rng(1)
    r = rng.uniform(0, 1, 1000)
    for prof in (case_B_pos, case_B_neg):
        assert np.all(prof.f(r) + prof.g(r) == 0.0)
        assert integrals(prof).int_f_plus_g == 0.0
    assert integrals(case_B_pos).int_f > 0
    neg = trapezoid_oracle(case_B_neg.f, 1.0)
    assert neg < 0
    assert neg == pytest.approx(-1.0, abs=1e-7)
    assert integrals(case_B_neg).int_f == pytest.approx(neg, abs=1e-8)


def test_disc_area_shim():
    one = lambda r: np.ones_like(r)
    val, _ = radial_integral(one, 1.0, 64)
    assert val == pytest.approx(math.pi, abs=1e-8)


def test_support_exact():
    rng = np.random.default_rng(2)
    for prof in (make_case_A(1.0), make_case_B(1.0, "PosF"), make_case_B(2.0, "NegIntF")):
        x = rng.normal(size=(10_000, 2))
        x *= (prof.k + rng.exponential(2.0, size=(10_000, 1))) / np.linalg.norm(x, axis=1)[:, None]
        r = np.linalg.norm(x, axis=1)
        assert np.all(r >= prof.k)
        assert np.all(prof.f(r) == 0.0) and np.all(prof.g(r) == 0.0)


def test_third_derivative_bounded_across_edge(case_A):
    h = 1e-3
    r = np.arange(0.8, 1.2, h)
    g = case_A.g(r)
    d3 = (g[3:] - 3 * g[2:-1] + 3 * g[1:-2] - g[:-3]) / h**3
    interior = np.max(np.abs(d3[r[:-3] < 0.95]))
    edge = np.max(np.abs(d3[(r[:-3] > 0.95)]))
    assert np.all(np.isfinite(d3))
    assert edge <= 1.01 * interior + 1e-6


def test_analytic_derivatives(case_B_neg):
    f = case_B_neg.f
    r = np.linspace(0.05, 0.95, 37)
    h = 1e-5
    fd1 = (f(r + h) - f(r - h)) / (2 * h)
    fd2 = (f(r + h) - 2 * f(r) + f(r - h)) / h**2
    np.testing.assert_allclose(f.d1(r), fd1, atol=1e-5 * np.max(np.abs(fd1)))
    np.testing.assert_allclose(f.d2(r), fd2, atol=1e-3 * np.max(np.abs(fd2)))
    np.testing.assert_allclose(f.laplacian(r), f.d2(r) + f.d1(r) / r, rtol=1e-12, atol=1e-12)


def test_bump_origin_and_edge():
    assert bump(0.0) == pytest.approx(math.exp(-1))
    assert bump(1.0) == 0.0 and bump(-1.0) == 0.0


@given(st.floats(-5, 5).filter(lambda a: a != 0))
def test_scaling_linear(alpha):
    prof = make_case_A(1.0)
    r = np.linspace(0, 1, 11)
    np.testing.assert_allclose(prof.scaled(alpha).g(r), alpha * prof.g(r), rtol=1e-14)


def test_text_roundtrip(case_B_neg):
    text = case_B_neg.to_text()
    back = DataProfile.from_text(text)
    r = np.linspace(0, 1, 51)
    assert np.array_equal(back.f(r), case_B_neg.f(r))
    assert back.g_is_minus_f and back.kind is case_B_neg.kind
    assert back.notes["ring_amplitude"] == case_B_neg.notes["ring_amplitude"]


def test_zero_profile_and_errors():
    z = zero_profile()
    assert integrals(z).int_f_plus_g == 0.0
    with pytest.raises(ValueError):
        make_case_B(1.0, "sideways")
    with pytest.raises(ValueError):
        make_case_A(0.5)
    with pytest.raises(ValueError):
        radial_integral(lambda r: r, 1.0, 0)
    with pytest.raises(FloatingPointError):
        radial_integral(lambda r: np.full_like(r, np.nan), 1.0, 8)
