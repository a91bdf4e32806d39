import math

import numpy as np
import pytest

from anisohilbert.geometry import DilationGroup, DomainError
from anisohilbert.rotations import (DirectionalCache, SphereFunction, check_size_cancellation,
                                    isotropic_cos_symbol, seeded_odd_functions, t_omega_direct,
                                    t_omega_rotations)
from anisohilbert.transforms import (GridField, band_limited_field, default_transform_spec, relative_l2,
                                     single_mode_field)

G12 = DilationGroup((1, 2))
COS = SphereFunction.parse("cos")
SPEC = default_transform_spec(6.0)


@pytest.fixture(scope="module")
def small_field():
    return band_limited_field((64, 64), seed=3)


def test_sphere_function_parse():
    f = SphereFunction.parse("trig:0,0,1,2,0,0,0,0.5")
    th = np.linspace(0, 2 * np.pi, 7)
    np.testing.assert_allclose(f(th), np.cos(th) + 2 * np.sin(th) + 0.5 * np.sin(3 * th), atol=1e-15)
    assert f.is_odd and f.oddness_defect() <= 1e-12
    assert not SphereFunction.parse("one").is_odd
    with pytest.raises(DomainError):
        SphereFunction.parse("wave")
    for fn in seeded_odd_functions(3, seed=0):
        assert fn.is_odd and fn.oddness_defect() <= 1e-10


def test_size_cancellation_examples():
    size, cancel = check_size_cancellation(COS, G12)
    assert abs(cancel) <= 1e-12
    size, cancel = check_size_cancellation(SphereFunction.parse("one"), DilationGroup((1, 1)))
    assert size == pytest.approx(2 * np.pi, rel=1e-12) and cancel == pytest.approx(2 * np.pi, rel=1e-12)
    # int_0^{2 pi} |cos| = 4; the trapezoid rule meets the kinks at O(nodes^-2)
    size, _ = check_size_cancellation(COS, DilationGroup((1, 1)), nodes=1024)
    assert size == pytest.approx(4.0, abs=1e-4)
    with pytest.raises(DomainError):
        check_size_cancellation(COS, G12, nodes=8)


def test_constant_is_annihilated():
    f = GridField((1.0, 1.0), np.full((32, 32), 2.0))
    out = t_omega_direct(f, COS, G12, SPEC, nodes=64, stride=4)
    assert np.abs(out.values).max() <= 1e-9


def test_isotropic_single_mode_symbol():
    k = (2, 1)
    f = single_mode_field((64, 64), k)
    out = t_omega_direct(f, COS, DilationGroup((1, 1)), default_transform_spec(16.0), nodes=256, stride=8)
    sym = isotropic_cos_symbol(np.array(k) / 2.0)
    ref = sym * f.values[::8, ::8]
    assert np.abs(out.values - ref).max() <= 1e-2 * abs(sym)


def test_linearity_in_omega(small_field):
    a, b = SphereFunction.parse("cos"), SphereFunction.parse("trig:0,0,0,0,0,0,1,-1")
    ab = SphereFunction.parse("trig:0,0,2,0,0,0,-0.5,0.5")  # 2 a - 0.5 b
    ta, tb, tab = t_omega_direct(small_field, [a, b, ab], G12, SPEC, nodes=64, stride=8)
    ref = 2 * ta.values - 0.5 * tb.values
    assert np.abs(tab.values - ref).max() <= 1e-10 * np.abs(ref).max()


def test_real_output(small_field):
    d = t_omega_direct(small_field, COS, G12, SPEC, nodes=64, stride=8)
    r = t_omega_rotations(small_field, COS, G12, 16, SPEC, stride=8)
    assert not np.iscomplexobj(d.values) and not np.iscomplexobj(r.values)
    c = band_limited_field((64, 64), seed=3, complex_values=True)
    rc = t_omega_rotations(GridField(c.half_widths, c.values.real + 0j), COS, G12, 16, SPEC, stride=8)
    assert np.abs(rc.values.imag).max() <= 1e-8 * np.abs(rc.values).max()


def test_rotations_need_odd_omega(small_field):
    with pytest.raises(DomainError):
        t_omega_rotations(small_field, SphereFunction.parse("trig:1,0,1,0"), G12, 16, SPEC, stride=8)


def test_cancellation_warning(small_field):
    with pytest.warns(UserWarning, match="cancellation"):
        t_omega_direct(small_field, SphereFunction.parse("one"), G12, SPEC, nodes=32, stride=16)


def test_identity_small_grid(small_field):
    cache = DirectionalCache(small_field, G12, SPEC, stride=8)
    d = t_omega_direct(small_field, COS, G12, SPEC, nodes=256, stride=8)
    e32 = relative_l2(t_omega_rotations(small_field, COS, G12, 32, cache=cache), d)
    e128 = relative_l2(t_omega_rotations(small_field, COS, G12, 128, cache=cache), d)
    assert e128 <= 1e-2 and e128 <= 0.5 * e32
    # dropping the Jacobian breaks the identity by more than 5x the tolerance
    nj = relative_l2(t_omega_rotations(small_field, COS, G12, 128, cache=cache, jacobian=False), d)
    assert nj > 5e-2


def test_missing_cancellation_grows_with_R():
    # positive field: without cancellation the radial integral is logarithmically divergent
    x = np.linspace(-1, 1, 32, endpoint=False)
    X, Y = np.meshgrid(x, x, indexing="ij")
    f = GridField((1.0, 1.0), 2.0 + np.cos(np.pi * X) * np.cos(np.pi * Y))
    one = SphereFunction.parse("one")
    with pytest.warns(UserWarning):
        small = t_omega_direct(f, one, G12, default_transform_spec(4.0), nodes=32, stride=8)
        big = t_omega_direct(f, one, G12, default_transform_spec(64.0), nodes=32, stride=8)
    grow = big.values - small.values
    # mean 2 times 3 pi (sphere mass) times log 16
    assert np.all(grow > 0.5 * 2 * 3 * np.pi * math.log(16))
