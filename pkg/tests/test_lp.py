import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anisohilbert.geometry import DilationGroup, dilate
from anisohilbert.lp import LPSystem, eta_profile, partition_defect, phi_hat_j, reproducing_check, support_violations

GROUPS = [DilationGroup((1, 2)), DilationGroup((1, 3)), DilationGroup((1, 1.5, 2))]


def _samples(group, count, seed=0):
    rng = np.random.default_rng(seed)
    om = rng.normal(size=(count, group.n))
    om /= np.linalg.norm(om, axis=1, keepdims=True)
    return dilate(group, np.exp(rng.uniform(-8, 8, count)), om)


def test_eta_profile():
    s = np.linspace(0, 3, 601)
    e = eta_profile(s)
    assert np.all(e[s <= 1] == 1) and np.all(e[s >= 2] == 0)
    assert np.all(np.diff(e) <= 0) and e.min() >= 0 and e.max() <= 1
    # the transition e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}) is 1/2 at u = 1/2
    assert float(eta_profile(1.5)) == pytest.approx(0.5, abs=1e-15)


def test_phi_hat_0_at_one_and_a_half():
    g = DilationGroup((1, 2))
    sysm = LPSystem(g)
    # rho = 1.5 on the first axis: eta(1.5) - eta(3) = 0.5
    assert float(phi_hat_j(sysm, 0, np.array([1.5, 0.0]))) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("group", GROUPS)
def test_partition_support_reproducing(group):
    sysm = LPSystem(group, J=8)
    xi = _samples(group, 20_000)
    defect, covered = partition_defect(sysm, xi)
    assert covered > 10_000 and defect <= 1e-10
    for j in range(-4, 5):
        assert support_violations(sysm, j, xi) == 0
        assert reproducing_check(sysm, xi, j) <= 1e-12


def test_reproducing_negative_control():
    g = DilationGroup((1, 2))
    sysm = LPSystem(g)
    xi = _samples(g, 5000)
    assert reproducing_check(sysm, xi, 0, drop=(1,)) > 0.1


@settings(max_examples=100, deadline=None)
@given(st.floats(-6, 6), st.floats(0, 2 * np.pi), st.integers(-5, 5))
def test_band_scaling(logr, th, j):
    g = DilationGroup((1, 2))
    sysm = LPSystem(g)
    om = np.array([np.cos(th), np.sin(th)])
    xi = dilate(g, np.exp(logr), om)
    # phi_hat_j(delta_2 xi) = phi_hat_{j-1}(xi)
    assert float(sysm.phi_hat(j + 1, dilate(g, 2.0, xi))) == pytest.approx(float(sysm.phi_hat(j, xi)), abs=1e-12)
