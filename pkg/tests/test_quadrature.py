import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import sici

from anisohilbert.quadrature import (PVSpec, QuadratureError, cutoff_for_tail, oscillatory_segment,
                                     outer_window, pv_integrate, smooth_cutoff, tail_estimate)


def test_constant_is_annihilated():
    assert abs(pv_integrate(lambda t: np.ones_like(t))) <= 1e-12


def test_sign_integrand():
    spec = PVSpec(eps=1e-6, R=1e6)
    v = pv_integrate(lambda t: np.sign(t).astype(complex), spec)
    assert v.real == pytest.approx(2 * math.log(1e12), rel=1e-10)
    assert 2 * math.log(1e12) == pytest.approx(55.2620, abs=1e-4)


def test_exponential_hard_cutoff_closed_form():
    # p.v. int_{eps<|t|<R} e^{-2 pi i t} dt/t = -2i (Si(2 pi R) - Si(2 pi eps))
    eps, R = 1e-8, 40.0
    spec = PVSpec(eps=eps, R=R, abs_tol=1e-11, rel_tol=1e-11)
    v = pv_integrate(lambda t: np.exp(-2j * np.pi * t), spec, phase_rate=lambda t: 2 * np.pi + 0 * t)
    ref = -2j * (sici(2 * np.pi * R)[0] - sici(2 * np.pi * eps)[0])
    assert abs(v - ref) <= 1e-9


def test_exponential_erfc_window():
    spec = PVSpec(eps=1e-9, R=32.0, window="erfc", abs_tol=1e-11, rel_tol=1e-11)
    v = pv_integrate(lambda t: np.exp(-2j * np.pi * t), spec, phase_rate=lambda t: 2 * np.pi + 0 * t)
    assert abs(v - (-1j * np.pi)) <= 5e-8


def test_oscillatory_segment_examples():
    assert oscillatory_segment(lambda t: 0 * t, lambda t: np.ones_like(t), 0, 1) == pytest.approx(1.0)
    assert abs(oscillatory_segment(lambda t: 2 * np.pi * t, lambda t: np.ones_like(t), 0, 1)) <= 1e-12
    # u = t^2 gives (1 - e^{-2 pi i}) / (4 pi i) = 0
    v = oscillatory_segment(lambda t: 2 * np.pi * t ** 2, lambda t: t, 0, 1)
    assert abs(v) <= 1e-12


def test_oscillatory_segment_dense_oracle():
    t = np.linspace(0, 3, 2_000_001)
    y = np.cos(t) * np.exp(-1j * 7 * t ** 1.5)
    ref = np.sum((y[1:] + y[:-1]) / 2) * (t[1] - t[0])
    v = oscillatory_segment(lambda s: 7 * s ** 1.5, np.cos, 0, 3)
    assert abs(v - ref) <= 1e-9


def test_tail_values():
    assert tail_estimate(-1, 100) == pytest.approx(0.01)
    assert tail_estimate(-2, 10) == pytest.approx(0.005)
    assert cutoff_for_tail(-1.5, 1e-8) == pytest.approx((1.5e-8) ** (-2 / 3), rel=1e-12)
    assert cutoff_for_tail(-1.5, 1e-8) == pytest.approx(1.65e5, rel=1e-2)
    with pytest.raises(ValueError):
        tail_estimate(0.5, 10)


def test_spec_validation_and_json():
    with pytest.raises(ValueError):
        PVSpec(eps=1.0, R=0.5)
    with pytest.raises(ValueError):
        PVSpec(levels_per_octave=2)
    s = PVSpec(eps=1e-7, window="erfc")
    assert PVSpec.from_json(s.to_json()) == s


def test_tolerance_failure_carries_partial_result():
    spec = PVSpec(eps=1e-6, R=1e6, abs_tol=1e-15, rel_tol=1e-15)
    with pytest.raises(QuadratureError) as info:
        pv_integrate(lambda t: np.exp(-1j * 5e3 * t) * np.abs(t) ** 0.3, spec)
    assert info.value.error is not None


def test_profiles():
    s = np.linspace(0, 3, 301)
    c = smooth_cutoff(s)
    assert np.all(c[s <= 1] == 1) and np.all(c[s >= 2] == 0)
    assert np.all(np.diff(c) <= 0)
    assert outer_window(1.0, 1.0) < 1e-12 and outer_window(0.2, 1.0) > 1 - 1e-4


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 3))
def test_even_integrands_vanish(c, w):
    v = pv_integrate(lambda t: np.exp(-w * t * t) * (1 + c * t * t) + 0j, PVSpec(R=50.0))
    assert abs(v) <= 1e-12


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 2.0))
def test_cutoff_monotonicity(b):
    # p.v. int t e^{-b t^2} dt/t = sqrt(pi/b); the core (-eps, eps) holds about 2 eps
    g = lambda t: t * np.exp(-b * t * t) + 0j
    v1, e1 = pv_integrate(g, PVSpec(eps=1e-6, R=60.0), return_error=True)
    v2, e2 = pv_integrate(g, PVSpec(eps=5e-7, R=120.0), return_error=True)
    assert abs(v1 - v2) <= max(e1, e2) + 1.01e-6
    assert v2.real == pytest.approx(math.sqrt(math.pi / b) - 1e-6, abs=1e-9)
