import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dampwave.duhamel import (GrowthFactors, RadialSource, SpaceTimeField, WeightSpec, agm,
                              apply_L, apriori_ratio, apriori_ratio_mixed, complete_rho_integral,
                              default_delta, evaluate_L, growth_D1, growth_D2,
                              inner_rho_integral, picard_solve, weight, weighted_norm)
from dampwave.exponents import ModelParams
from dampwave.initial_data import make_case_B, zero_profile
from dampwave.wave_kernel import SphericalMeanQuadrature


def smooth_source(k=1.0):
    # C-infinity in lam, vanishing with all derivatives at lam = tau + k
    def fn(lam, tau):
        s = lam / (tau + k)
        return np.where(s < 1, np.exp(-1.0 / np.maximum(1 - s * s, 1e-300)), 0.0) \
            * (1 + np.cos(tau) ** 2)
    return RadialSource(fn, k)


# F = 1 on the whole backward disc (no cone cut): the r = 0 closed form needs it
ONE = RadialSource(lambda lam, tau: np.ones_like(lam * tau), 1.0, cut=False)


def test_complete_rho_integral_random():
    rng = np.random.default_rng(5)
    for lam, r in rng.uniform(0.01, 10, (100, 2)):
        assert complete_rho_integral(lam, r) == pytest.approx(math.pi / 2, abs=1e-8)


@given(st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.0, 4))
def test_agm_inner_matches_gauss_interior(lam, r, extra):
    s = lam + r + 0.1 + extra
    a = inner_rho_integral(lam, r, s, "interior", "agm")
    b = inner_rho_integral(lam, r, s, "interior", "gauss", n=256)
    assert a == pytest.approx(b, rel=1e-6)


def test_agm_inner_matches_gauss_cone():
    lam, r = 1.3, 0.8
    for s in np.linspace(abs(lam - r) + 0.05, lam + r - 0.05, 9):
        a = inner_rho_integral(lam, r, s, "cone", "agm")
        b = inner_rho_integral(lam, r, s, "cone", "gauss", n=256)
        assert a == pytest.approx(b, rel=1e-6)


def test_agm_values():
    assert agm(1.0, 1.0) == pytest.approx(1.0)
    # Gauss's constant
    assert 1 / agm(1.0, math.sqrt(2)) == pytest.approx(0.8346268416740731, rel=1e-14)
    assert agm(2.0, 0.0) == 0.0


@pytest.mark.parametrize("path", ["disc", "split"])
def test_L_of_one_closed_form(path):
    t = np.array([0.5, 1.0, 3.0, 6.0])
    got = evaluate_L(ONE, 2.0, np.zeros_like(t), t, path=path)
    exact = (1 + t) * np.log1p(t) - t
    np.testing.assert_allclose(got, exact, rtol=1e-6)


def test_paths_agree_smooth():
    F = smooth_source()
    r = np.array([0.0, 0.4, 1.1, 2.0, 3.5, 0.2])
    t = np.array([1.0, 2.0, 2.5, 3.0, 3.0, 5.0])
    a = evaluate_L(F, 1.5, r, t, "disc", n_tau=24)
    b = evaluate_L(F, 1.5, r, t, "split", n_tau=24)
    np.testing.assert_allclose(a, b, rtol=1e-4)


def test_L_zero_and_positivity_and_support():
    Z = RadialSource(lambda lam, tau: np.zeros_like(lam * tau), 1.0)
    assert np.all(evaluate_L(Z, 2.0, np.array([0.0, 1.0]), np.array([1.0, 2.0])) == 0.0)
    F = smooth_source()
    rng = np.random.default_rng(6)
    t = rng.uniform(0.1, 4, 30)
    r = rng.uniform(0, 1, 30) * (t + 1)
    assert np.all(evaluate_L(F, 2.0, r, t) >= 0.0)
    outside = evaluate_L(F, 2.0, t + 1.0 + rng.uniform(0.01, 3, 30), t)
    assert np.all(outside == 0.0)


def test_field_roundtrips():
    V = SpaceTimeField.from_function(lambda r, t: np.cos(r) * np.exp(-t), 2.0, 1.0, 0.25)
    assert V.header()[:2] == (V.n_r, V.n_t)
    back = SpaceTimeField.from_csv(V.to_csv())
    assert np.array_equal(back.values, V.values) and back.dr == V.dr
    back = SpaceTimeField.from_bytes(V.to_bytes())
    assert np.array_equal(back.values, V.values) and back.k == V.k
    assert V.to_csv().startswith("# N_r=")
    V.check_support()
    bad = V.map(lambda v: v + 1.0)
    with pytest.raises(ValueError):
        bad.check_support()
    assert np.all(bad.clipped().values[~bad.cone_mask()] == 0)


def test_field_interpolant():
    V = SpaceTimeField.from_function(lambda r, t: 2 * r + 3 * t, 2.0, 1.0, 0.25)
    assert V(0.3, 0.7) == pytest.approx(2 * 0.3 + 3 * 0.7)
    assert V(5.0, 0.5) == 0.0


def test_apply_L_support_and_agreement():
    F = SpaceTimeField.from_function(lambda r, t: np.cos(0.3 * t) * np.exp(-r * r), 1.0, 1.0,
                                     0.125)
    out = apply_L(F, 2.0, t_stride=2, quad=SphericalMeanQuadrature(16, 16), n_tau=8)
    assert np.all(out.values[~out.cone_mask()] == 0.0)
    assert np.all(out.values[0] == 0.0)
    assert np.all(out.values >= 0)


def test_weights():
    r, t = np.array([0.0, 1.0, 2.0]), np.array([3.0, 3.0, 5.0])
    tp, tm = t + r + 2, t - r + 2
    np.testing.assert_allclose(weight(WeightSpec(1, 1.0, 1.5), r, t), np.sqrt(tp * tm))
    np.testing.assert_allclose(weight(WeightSpec(3, 1.0, 1.5), r, t), np.sqrt(tp) * tm**1.5)
    np.testing.assert_allclose(weight(WeightSpec(2, 1.0, 1.5), r, t), tp ** (-(4 - 3 * 1.5) / 2))
    np.testing.assert_allclose(weight(WeightSpec(2, 1.0, 1.8), r, t),
                               np.sqrt(tp) * tm ** (-(5 - 3 * 1.8) / 2))
    np.testing.assert_allclose(weight(WeightSpec(2, 1.0, 2.0), r, t), np.sqrt(tp * tm) / np.log(tm))
    w53 = weight(WeightSpec(2, 1.0, 5 / 3), r, t)
    np.testing.assert_allclose(w53, np.sqrt(tp) / np.log(2 * tp / tm))
    assert WeightSpec(2, 1.0, 5 / 3).p3 == 1 and WeightSpec(2, 1.0, 2).p4 == 1
    with pytest.raises(ValueError):
        WeightSpec(4)


def test_weighted_norm():
    V = SpaceTimeField.from_function(lambda r, t: np.ones_like(r), 1.0, 1.0, 0.25)
    rr, tt = np.meshgrid(V.r, V.t)
    mask = V.cone_mask()
    expect = np.max(weight(WeightSpec(1, 1.0, 2.0), rr, tt)[mask])
    assert weighted_norm(V, 1) == pytest.approx(expect)


@given(st.sampled_from([1.2, 1.5, 5 / 3, 1.8, 2.0]), st.floats(0, 500), st.floats(0, 500))
def test_growth_monotone(p, T1, T2):
    lo, hi = sorted((T1, T2))
    assert growth_D1(lo, p) <= growth_D1(hi, p)
    for nu in (0.0, p - 1, 1.0, p):
        assert growth_D2(lo, p, nu) <= growth_D2(hi, p, nu) * (1 + 1e-15)


def test_growth_values():
    assert growth_D1(1.0, 2.0) == pytest.approx(math.log(4.0) ** 2)
    assert growth_D1(1.0, 1.5) == pytest.approx(4.0)
    assert default_delta(2.0) == 0.1 and default_delta(10.0) == 0.05
    g = GrowthFactors(13.0, 2.0)
    assert g.Tk == 16 and g.D2(2.0) == pytest.approx(math.log(16) ** 3)
    with pytest.raises(ValueError):
        growth_D2(1.0, 1.5, 0.3)


def test_picard_zero_data():
    res = picard_solve(zero_profile(), ModelParams(2, 2, 2.0), 1.0, dr=0.25)
    assert res.converged and len(res.trace) == 1
    assert np.all(res.field.values == 0.0)


def test_picard_small_eps_contracts():
    prof = make_case_B(1.0, "PosF")
    res = picard_solve(prof, ModelParams(2, 2, 2.0, 1.0, 0.05), 2.0, dr=0.25, tol=1e-12,
                       quad=SphericalMeanQuadrature(16, 16), n_tau=12)
    assert res.converged and not res.diverged
    ratios = [e["ratio"] for e in res.trace[1:]]
    assert ratios and all(q < 0.5 for q in ratios)
    assert res.residual < 10 * 1e-12


def test_apriori_scaling_and_bands():
    for p in (1.5, 2.0):
        V = RadialSource(lambda l, s, p=p: 1.0 / weight(WeightSpec(1, 1.0, p), l, s), 1.0)
        base = apriori_ratio(V, p, 10.0)
        for alpha in (0.5, 3.0, 1e3):
            Va = RadialSource(lambda l, s, a=alpha, V=V: a * V(l, s), 1.0)
            assert apriori_ratio(Va, p, 10.0) == pytest.approx(base, rel=1e-12)
        assert math.isfinite(base) and base > 0


def test_apriori_mixed_finite():
    p = 1.5
    V0 = RadialSource(lambda l, s: 1.0 / weight(WeightSpec(3, 1.0, p), l, s), 1.0)
    V = RadialSource(lambda l, s: 1.0 / weight(WeightSpec(2, 1.0, p), l, s), 1.0)
    vals = [apriori_ratio_mixed(V0, V, p, nu, 20.0) for nu in (0.0, p - 1, 1.0, p)]
    assert all(math.isfinite(v) and v > 0 for v in vals)


def test_apriori_zero_rejected():
    Z = RadialSource(lambda l, s: np.zeros_like(l * s), 1.0)
    with pytest.raises(ValueError):
        apriori_ratio(Z, 2.0, 10.0)
