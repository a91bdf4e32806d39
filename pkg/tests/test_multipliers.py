import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anisohilbert.curves import Homogeneous, make_two_sided, power_curve
from anisohilbert.geometry import DilationGroup, DomainError, dilate
from anisohilbert.multipliers import (AnalyticParameter, convex_quantities, d2m_dxideta, dm_deta, dm_dxi,
                                      inner_piece, m_z_convex, m_z_homogeneous, m_z_homogeneous_many,
                                      ml_bound_report, tail_level, weight_integral)
from oracles import dense_trapezoid_m, fd_derivatives

MODEL = Homogeneous(DilationGroup((1, 3)))
PARABOLA = power_curve(2.0)


def test_analytic_parameter_regimes():
    AnalyticParameter(-1.5, 2.0, regime="convex")
    with pytest.raises(DomainError):
        AnalyticParameter(-0.5, regime="convex")
    AnalyticParameter(-0.5, regime="homogeneous", beta=1.0, eta_margin=0.1)
    with pytest.raises(DomainError):
        AnalyticParameter(-0.05, regime="homogeneous", beta=1.0, eta_margin=0.1)
    with pytest.raises(DomainError):
        AnalyticParameter(-0.5, regime="homogeneous")


def test_zero_frequency():
    assert m_z_homogeneous(MODEL, -0.5, [0.0, 0.0]) == 0
    assert m_z_convex(PARABOLA, -1.5 + 2j, 0.0, 0.0) == 0


def test_straight_line_reduction(rng):
    e = np.array([0.6, -0.8])
    line = make_two_sided(DilationGroup((1, 1)), e, -e)
    xi = rng.normal(size=(20, 2)) * 3
    vals, _ = m_z_homogeneous_many(line, 0.0, xi)
    np.testing.assert_allclose(vals, -1j * np.pi * np.sign(xi @ e), atol=1e-3)


def test_model_curve_conjugation(rng):
    xi = rng.normal(size=(6, 2))
    for z in (0.0, -0.5, -0.8):
        a, _ = m_z_homogeneous_many(MODEL, z, xi)
        b, _ = m_z_homogeneous_many(MODEL, z, -xi)
        np.testing.assert_allclose(b, np.conj(a), atol=2e-9)


def test_model_curve_frozen_value():
    # oracle: scipy quad on [0, 2], then s = t^3 - t and QAWF (weight sin 2 pi s) on [6, inf)
    assert m_z_homogeneous(MODEL, 0.0, [1.0, -1.0]) == pytest.approx(-4.864252137596428j, abs=1e-6)


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.2, 5.0))
def test_m0_dilation_invariance(th, lam):
    g = MODEL.group
    om = np.array([math.cos(th), math.sin(th)])
    # m_0(xi) depends on xi only through the dual dilation orbit
    a = m_z_homogeneous(MODEL, 0.0, om)
    b = m_z_homogeneous(MODEL, 0.0, dilate(g, lam, om))
    assert abs(a - b) <= 1e-8


@pytest.mark.parametrize("z", [-1.5, -1.2, -3.0])
def test_convex_purely_imaginary_for_real_z(z):
    v = m_z_convex(PARABOLA, z, 0.0, 1.7)
    assert abs(v.real) <= 1e-12 and abs(v.imag) > 1e-3
    w = m_z_convex(PARABOLA, z, 0.4, -2.5)
    assert abs(w.real) <= 1e-12


def test_convex_conjugation_symmetry(rng):
    xi, eta = rng.uniform(-5, 5, 8), rng.uniform(-5, 5, 8)
    for z in (-1.5, -2.0):
        a = convex_quantities(PARABOLA, z, xi, eta, quantities=("m",)).values["m"]
        b = convex_quantities(PARABOLA, z, -xi, -eta, quantities=("m",)).values["m"]
        np.testing.assert_allclose(b, np.conj(a), atol=2e-9)


def test_convex_envelope_linear_grid():
    v = np.linspace(-8, 8, 32)
    X, Y = np.meshgrid(v, v, indexing="ij")
    res = convex_quantities(PARABOLA, -1.5, X, Y, quantities=("m",))
    mag = np.abs(res.values["m"])
    assert res.converged.all()
    # measured sup 5.045 at (-3.355, 8), frozen with 10% headroom
    assert mag.max() <= 5.5
    for i, j in [(9, 31), (0, 0), (16, 16), (31, 3)]:
        ref = dense_trapezoid_m(PARABOLA, -1.5, X[i, j], Y[i, j], res.R[i, j])
        assert abs(ref - res.values["m"][i, j]) <= 1e-8
    assert mag[9, 31] == pytest.approx(5.0454, abs=1e-3)


def test_modulus_not_monotone_in_re_z():
    # the weight decreases pointwise but the oscillatory integral need not shrink
    vals = [abs(m_z_convex(PARABOLA, rz, -3.40, 1.49)) for rz in (-1.1, -1.5, -2.0, -3.0)]
    np.testing.assert_allclose(vals, [2.9948426, 3.0864943, 3.1543339, 3.2144361], atol=1e-6)
    assert np.all(np.diff(vals) > 0.05)


def test_eta_zero_collapses():
    for z in (-1.5, -1.5 + 3j):
        v, terms = dm_dxi(PARABOLA, z, 2.3, 0.0, scaled=True, return_terms=True)
        assert abs(v) <= 2 + 1e-12
        assert terms["gamma_prime"] == 0 and terms["gamma_gamma_prime"] == 0
        assert dm_deta(PARABOLA, z, 2.3, 0.0, scaled=True) == 0
        assert d2m_dxideta(PARABOLA, z, 2.3, 0.0, scaled=True) == 0


def test_unscaled_needs_nonzero_scale():
    with pytest.raises(DomainError):
        dm_deta(PARABOLA, -1.5, 1.0, 0.0)


def test_finite_difference_cross_check(rng):
    n = 6
    xi = rng.choice([-1, 1], n) * 10 ** rng.uniform(-1, 1, n)
    eta = rng.choice([-1, 1], n) * 10 ** rng.uniform(-1, 1, n)
    z = -1.5 + 1j
    fx, fy, fm, R = fd_derivatives(PARABOLA, z, xi, eta)
    res = convex_quantities(PARABOLA, z, xi, eta, R=R, abs_tol=1e-13, rel_tol=1e-12)
    np.testing.assert_allclose(res.values["xi_dxi"] / xi, fx, rtol=1e-6)
    np.testing.assert_allclose(res.values["eta_deta"] / eta, fy, rtol=1e-6)
    np.testing.assert_allclose(res.values["xi_eta_mixed"] / (xi * eta), fm, rtol=1e-4)


def test_weight_sub_bound():
    # int (1 + u^2)^{Re z} du <= pi for Re z <= -1, with equality at -1
    assert weight_integral(-1.0) == pytest.approx(math.pi, rel=1e-14)
    for rz in (-1.5, -2.0, -4.0):
        from scipy.integrate import quad
        ref = 2 * quad(lambda u: (1 + u * u) ** rz, 0, np.inf, epsabs=1e-13)[0]
        assert weight_integral(rz) == pytest.approx(ref, rel=1e-9)
        assert weight_integral(rz) <= math.pi


def test_gamma_prime_term_sub_bound():
    for xi, eta in [(0.3, 2.0), (-4.0, 0.05), (7.0, -9.0)]:
        _, terms = dm_dxi(PARABOLA, -1.5 + 2j, xi, eta, scaled=True, return_terms=True)
        assert abs(terms["gamma_prime"]) <= 2 * math.pi * math.pi


@pytest.mark.parametrize("eta", [1e-2, 0.5, 3.0, 100.0])
def test_inner_piece_bound(eta):
    for gamma in (PARABOLA, power_curve(3.0)):
        assert inner_piece(gamma, eta) <= 1 + 1e-9
    # gamma = t^2: |eta| int_0^{t0} t dt = 1/2
    assert inner_piece(PARABOLA, eta) == pytest.approx(0.5, rel=1e-9)


def test_sixth_term_bound():
    for z in (-1.5, -1.5 + 5j, -2.5 + 1j):
        res = convex_quantities(PARABOLA, z, np.array([1.3, -6.0]), np.array([2.0, 0.4]),
                                quantities=("xi_eta_mixed",))
        core = np.abs(res.terms["sixth_integral_core"][:, 0])
        assert np.all(core <= abs(z * (z - 1)) / abs(z.real))


def test_bound_sups_stable_under_refinement():
    # the 65-point axis contains the 33-point one, so both sups come from one sweep
    reports, res = ml_bound_report(PARABOLA, -1.5, grid={"lo": 1e-2, "hi": 1e2, "count": 65})
    coarse = np.zeros((4, 65, 65), bool)
    coarse[:, ::2, ::2] = True
    coarse = coarse.ravel()
    for r in reports:
        assert r.coverage == 1.0
        sup33 = np.abs(res.values[r.quantity][coarse]).max()
        assert abs(r.sup_abs / sup33 - 1) < 0.1


def test_tail_level():
    U = tail_level(-1.5, 1e-8)
    assert U ** -3 / 3 == pytest.approx(1e-8, rel=1e-12)
    with pytest.raises(DomainError):
        tail_level(0.2)
