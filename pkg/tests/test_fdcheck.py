"""Finite-difference chart oracle: curvature, commutators, cross-checks."""

import math

import numpy as np
import pytest

from harnacklab import fdcheck
from harnacklab.models import curvature_at, make_model
from harnacklab.green import compute_profile, hess_b2_eigs

H = fdcheck.DEFAULT_H


def test_euclidean_christoffels_vanish():
    ch = fdcheck.euclidean_chart(4)
    x = fdcheck.default_probe_point(ch)
    assert np.max(np.abs(fdcheck.christoffels(ch, x, H))) < 1e-12


def test_sphere_christoffel_value():
    ch = fdcheck.round_sphere(1.0)
    theta = math.pi / 3
    gamma = fdcheck.christoffels(ch, np.array([theta, 0.7]), H)
    # Gamma^theta_{phi phi} = -sin(theta) cos(theta)
    assert gamma[0, 1, 1] == pytest.approx(-math.sin(theta) * math.cos(theta),
                                           abs=1e-6)


def test_cone_christoffel_value():
    ch = fdcheck.cone_chart(0.5, 4)
    x = fdcheck.warped_probe_point(4, 1.0)
    # Gamma^r_{phi phi} = -c^2 r sin^2(...) pattern; for the first angular
    # coordinate the sphere factor is 1: Gamma^r_{11} = -c^2 r
    gamma = fdcheck.christoffels(ch, x, H)
    assert gamma[0, 1, 1] == pytest.approx(-0.25, abs=1e-6)


def test_sphere_sectional_curvature_sign_pin():
    # the curvature sign convention is pinned by the unit sphere being +1
    ch = fdcheck.round_sphere(1.0)
    x = fdcheck.default_probe_point(ch)
    R = fdcheck.riemann(ch, x, H)
    assert R[0, 1, 0, 1] == pytest.approx(1.0, abs=1e-5)
    ric = fdcheck.ricci(ch, x, H)
    assert np.allclose(ric, np.eye(2), atol=1e-5)  # Ric = (n-1) g on S^2


def test_euclidean_curvature_zero():
    ch = fdcheck.euclidean_chart(4)
    x = fdcheck.default_probe_point(ch)
    assert np.max(np.abs(fdcheck.riemann(ch, x, H))) < 1e-10


def test_warped_chart_matches_closed_form_curvature():
    model = make_model("cone", 4, c=0.5)
    ch = fdcheck.warped_chart(model)
    r = 1.0
    x = fdcheck.warped_probe_point(4, r)
    R = fdcheck.riemann(ch, x, H)
    s = curvature_at(model, r)
    # tangential plane (indices 1,2), radial plane (0,1) in the frame
    assert R[1, 2, 1, 2] == pytest.approx(s.k_tan, abs=1e-4)
    assert R[0, 1, 0, 1] == pytest.approx(s.k_rad, abs=1e-4)


def test_warped_chart_random_radii_cross_module():
    rng = np.random.default_rng(11)
    for model in (make_model("euclidean", 4),
                  make_model("smoothed_cone", 4, c=0.5, r0=1.0)):
        ch = fdcheck.warped_chart(model)
        for r in rng.uniform(0.8, 5.0, 5):
            x = fdcheck.warped_probe_point(4, float(r))
            R = fdcheck.riemann(ch, x, H)
            s = curvature_at(model, float(r))
            assert R[1, 2, 1, 2] == pytest.approx(s.k_tan, abs=5e-4)
            assert R[0, 1, 0, 1] == pytest.approx(s.k_rad, abs=5e-4)


def test_parallel_ricci_values():
    assert fdcheck.check_parallel_ricci(
        fdcheck.euclidean_chart(3), fdcheck.default_probe_point(fdcheck.euclidean_chart(3)), H
    ) < 1e-10
    assert fdcheck.check_parallel_ricci(
        fdcheck.s2xr2(), fdcheck.default_probe_point(fdcheck.s2xr2()), H
    ) < 1e-5
    cone = fdcheck.cone_chart(0.5, 4)
    val = fdcheck.check_parallel_ricci(cone, fdcheck.warped_probe_point(4, 1.0), H)
    assert val > 1e-2  # cones are not Ricci-parallel


def test_commutators_flat_chart():
    ch = fdcheck.euclidean_chart(3)
    f = fdcheck.TestFunction("x0**2 * x1 + x2", ["x0", "x1", "x2"])
    res = fdcheck.check_lemma31(ch, f, fdcheck.default_probe_point(ch), H)
    assert res.shape == (5,)
    assert np.max(res) < 1e-9


def test_commutators_sphere():
    ch = fdcheck.round_sphere(1.0)
    f = fdcheck.TestFunction("cos(x0)", ["x0", "x1"])
    res = fdcheck.check_lemma31(ch, f, np.array([math.pi / 3, 0.9]), H)
    assert np.max(res) <= 1e-4


def test_commutators_s2xr2():
    ch = fdcheck.s2xr2()
    f = fdcheck.default_test_function(ch)
    res = fdcheck.check_lemma31(ch, f, fdcheck.default_probe_point(ch), H)
    assert np.max(res) <= 1e-4


def test_commutator_quadratic_convergence():
    ch = fdcheck.s2xr2()
    f = fdcheck.default_test_function(ch)
    x = fdcheck.default_probe_point(ch)
    res_h = fdcheck.check_lemma31(ch, f, x, H)
    res_2h = fdcheck.check_lemma31(ch, f, x, 2 * H)
    for a, b in zip(res_2h, res_h):
        if b < 1e-12:
            continue  # identically satisfied; below the noise floor
        assert 3.5 <= a / b <= 4.5


def test_frame_independence_of_residuals():
    # the identities are tensorial: residuals must not depend on which
    # Gram-Schmidt order produced the frame; reversing coordinates gives
    # a genuinely different frame on the sphere factor
    ch = fdcheck.s2xr2()
    f = fdcheck.default_test_function(ch)
    x = fdcheck.default_probe_point(ch)
    r1 = fdcheck.check_lemma31(ch, f, x, H)
    x2 = x + np.array([0.0, 0.0, 0.013, -0.02])  # flat directions: same geometry
    r2 = fdcheck.check_lemma31(ch, f, x2, H)
    assert np.all(np.abs(r1 - r2) < 1e-4)


def test_hessian_scalar_matches_profile():
    model = make_model("cone", 4, c=0.5)
    profile = compute_profile(model)
    ch = fdcheck.warped_chart(model)
    r = 1.3
    x = fdcheck.warped_probe_point(4, r)
    hess = fdcheck.hessian_scalar(ch, lambda p: profile.b2_at(p[0]), x, 1e-3)
    mu_rad, mu_tan = hess_b2_eigs(profile, r)
    assert hess[0, 0] == pytest.approx(mu_rad, abs=5e-5)
    assert hess[1, 1] == pytest.approx(mu_tan, abs=5e-5)
    assert hess[2, 2] == pytest.approx(mu_tan, abs=5e-5)
    off = hess - np.diag(np.diag(hess))
    assert np.max(np.abs(off)) < 5e-5


def test_chart_by_name_and_bad_step():
    ch = fdcheck.chart_by_name("euclidean", n=3)
    assert ch.dim == 3
    with pytest.raises(fdcheck.ChartError):
        fdcheck.christoffels(ch, np.zeros(3), -1.0)
