"""Green profile: quadrature vs closed forms, b-function, power rule."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harnacklab.models import ModelError, make_model
from harnacklab.green import (
    check_power_laplacian, compute_profile, default_grid, hess_b2_eigs,
    nonparabolic_check,
)


@pytest.fixture(scope="module")
def eucl4():
    return compute_profile(make_model("euclidean", 4))


@pytest.fixture(scope="module")
def cone4():
    return compute_profile(make_model("cone", 4, c=0.5))


def test_euclidean_green_values(eucl4):
    # G = r^{2-n}: the quadrature must reproduce the power law
    assert eucl4.green_at(2.0) == pytest.approx(0.25, abs=1e-12)
    G, Gp, Gpp = eucl4.green_derivs_at(2.0)
    assert Gp == pytest.approx(-0.25, abs=1e-14)
    assert eucl4.b_at(2.0) == pytest.approx(2.0, abs=1e-12)
    assert eucl4.grad_b_at(2.0) == pytest.approx(1.0, abs=1e-12)


def test_euclidean_green_power_law_whole_grid(eucl4):
    assert np.allclose(eucl4.G, eucl4.grid**-2.0, rtol=1e-11, atol=0)


def test_cone_green_closed_form(cone4):
    # G = c^{1-n} r^{2-n}
    assert cone4.green_at(1.0) == pytest.approx(8.0, rel=1e-12)
    assert cone4.b_at(1.0) == pytest.approx(1.0 / (2 * math.sqrt(2)), rel=1e-12)


def test_cone_c1_equals_euclidean(eucl4):
    prof = compute_profile(make_model("cone", 4, c=1.0))
    assert np.allclose(prof.G, eucl4.G, rtol=1e-12, atol=0)


def test_alpha_is_exact_fraction(cone4):
    assert cone4.alpha == Fraction(4, 2)


def test_hess_b2_euclidean(eucl4):
    mu = hess_b2_eigs(eucl4, 2.0)
    assert mu == pytest.approx((2.0, 2.0), abs=1e-10)


def test_hess_b2_cone(cone4):
    mu = hess_b2_eigs(cone4, 1.0)
    assert mu == pytest.approx((0.25, 0.25), abs=1e-10)


def test_hess_b2_smoothed_cone_tail():
    prof = compute_profile(make_model("smoothed_cone", 4, c=0.5, r0=1.0))
    mu = hess_b2_eigs(prof, 4.0)
    assert mu == pytest.approx((0.25, 0.25), abs=1e-6)


def test_hess_b2_out_of_range(eucl4):
    with pytest.raises(ModelError):
        hess_b2_eigs(eucl4, 1e4)


def test_power_laplacian_examples(eucl4, cone4):
    # beta = alpha = 2 on flat n=4: both sides are 8 r^{-6}
    assert check_power_laplacian(eucl4, 1.0, 2.0) < 1e-9
    # beta = 1: G is harmonic
    assert check_power_laplacian(eucl4, 1.0, 1.0) < 1e-12
    # beta = -1 on the cone
    assert check_power_laplacian(cone4, 1.0, -1.0) < 1e-10


def test_gradient_derivative_cross_check(eucl4):
    # numerically differentiating G reproduces the closed-form Gp
    g, G = eucl4.grid, eucl4.G
    dG = np.gradient(G, g)
    mid = slice(10, -10)
    assert np.allclose(dG[mid], eucl4.Gp[mid], rtol=5e-3)
    # chain rule: b2p == (2/(2-n)) G^{2/(2-n)-1} Gp exactly
    n = 4
    e = 2.0 / (2 - n)
    assert np.allclose(eucl4.b2p, e * G ** (e - 1) * eucl4.Gp, rtol=1e-12)


def test_nonparabolic_examples():
    assert nonparabolic_check(make_model("euclidean", 4), 1.0).varopoulos_integral_finite
    assert nonparabolic_check(make_model("cone", 3, c=0.5), 1.0).varopoulos_integral_finite
    # sublinear growth is parabolic and must be rejected outright
    r = np.linspace(0.05, 80, 500)
    slow = make_model("custom", 3, table=(r, r ** (1.0 / 3)))
    rep = nonparabolic_check(slow, 1.0)
    assert not rep.varopoulos_integral_finite
    with pytest.raises(ModelError):
        compute_profile(slow, default_grid(0.1, 50, 64))


def test_profile_csv_shape(cone4):
    lines = cone4.to_csv().strip().split("\n")
    assert lines[0] == "r,G,Gp,Gpp,b,b2,grad_b,mu_rad,mu_tan"
    assert len(lines) == cone4.grid.size + 1


def test_grid_validation():
    m = make_model("euclidean", 4)
    with pytest.raises(ModelError):
        compute_profile(m, np.array([0.0, 1.0, 2.0]))
    with pytest.raises(ModelError):
        compute_profile(m, np.array([2.0, 1.0]))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 40.0), st.floats(0.05, 40.0))
def test_green_is_decreasing_property(r1, r2):
    prof = _cached_cone3()
    lo, hi = sorted((r1, r2))
    if hi - lo < 1e-9:
        return
    assert prof.green_at(lo) > prof.green_at(hi)


_CONE3 = None


def _cached_cone3():
    global _CONE3
    if _CONE3 is None:
        _CONE3 = compute_profile(make_model("cone", 3, c=0.8),
                                 default_grid(1e-2, 1e2, 128))
    return _CONE3
