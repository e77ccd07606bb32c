"""Model manifolds: warping profiles, closed-form curvature, hypotheses."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harnacklab.models import (
    ModelError, ball_volume, curvature_at, hypothesis_report, make_model,
    model_from_id, sphere_area, volume_growth,
)


def test_euclidean_profile_values():
    m = make_model("euclidean", 4)
    p = m.profile
    assert p.f(2.0) == 2.0
    assert p.fp(2.0) == 1.0
    assert p.fpp(2.0) == 0.0


def test_cone_profile_values():
    m = make_model("cone", 4, c=0.5)
    assert m.profile.f(1.0) == 0.5
    assert m.profile.fp(1.0) == 0.5


def test_dimension_gate():
    with pytest.raises(ModelError):
        make_model("cone", 2, c=0.5)
    with pytest.raises(ModelError):
        make_model("euclidean", 3.5)


def test_cone_aperture_gate():
    for bad in (0.0, -0.2, 1.5):
        with pytest.raises(ModelError):
            make_model("cone", 4, c=bad)


def test_profile_rejects_nonpositive_radius():
    m = make_model("euclidean", 4)
    with pytest.raises(ModelError):
        m.profile.f(0.0)
    with pytest.raises(ModelError):
        curvature_at(m, -1.0)


def test_curvature_euclidean_flat():
    s = curvature_at(make_model("euclidean", 4), 2.0)
    assert s.k_rad == 0.0 and s.k_tan == 0.0
    assert s.ric_rad == 0.0 and s.ric_tan == 0.0


def test_curvature_cone_closed_form():
    s = curvature_at(make_model("cone", 4, c=0.5), 1.0)
    assert s.k_rad == 0.0
    assert s.k_tan == pytest.approx(3.0, abs=1e-12)  # (1 - c^2)/(c^2 r^2)


def test_curvature_smoothed_cone_outside_blend():
    s = curvature_at(make_model("smoothed_cone", 4, c=0.5, r0=1.0), 2.0)
    assert s.k_rad == pytest.approx(0.0, abs=1e-12)
    assert s.k_tan == pytest.approx(0.75, abs=1e-12)


def test_smoothed_cone_is_c2_at_junctions():
    p = make_model("smoothed_cone", 4, c=0.5, r0=1.0).profile
    # jump across the junction is bounded by (next derivative) * step
    tols = {"f": 1e-6, "fp": 1e-5, "fpp": 1e-3}
    for r in (0.5, 1.0):
        for order, tol in tols.items():
            lo = getattr(p, order)(r - 1e-7)
            hi = getattr(p, order)(r + 1e-7)
            assert abs(hi - lo) < tol, (r, order)
    # exact cone/flat behavior outside the blend
    assert p.f(0.25) == 0.25
    assert p.f(3.0) == pytest.approx(1.5, abs=1e-15)


def test_ricci_identities_exact():
    models = [
        make_model("euclidean", 3),
        make_model("cone", 5, c=0.7),
        make_model("smoothed_cone", 4, c=0.5, r0=1.0),
    ]
    for m in models:
        for r in np.geomspace(0.1, 30, 7):
            s = curvature_at(m, float(r))
            n = m.n
            assert s.ric_rad == (n - 1) * s.k_rad
            assert s.ric_tan == s.k_rad + (n - 2) * s.k_tan


def test_sphere_area_n4():
    assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-14)


def test_volume_growth_euclidean():
    m = make_model("euclidean", 4)
    assert volume_growth(m, 3.0) == pytest.approx(math.pi**2 / 2, rel=1e-10)


def test_volume_growth_cone_scale_invariant():
    m = make_model("cone", 4, c=0.5)
    v1 = volume_growth(m, 1.0)
    v10 = volume_growth(m, 10.0)
    assert v1 == pytest.approx(math.pi**2 / 16, rel=1e-10)
    assert abs(v10 / v1 - 1.0) < 1e-9


def test_ball_volume_positive_and_monotone():
    m = make_model("cone", 4, c=0.5)
    vols = [ball_volume(m, t) for t in (0.5, 1.0, 2.0)]
    assert all(v > 0 for v in vols)
    assert vols[0] < vols[1] < vols[2]


def test_model_from_id_round_trip():
    for mid in ("euclidean", "cone:0.5", "smoothed-cone:0.5:1"):
        m = model_from_id(mid, 4)
        assert m.describe() == mid
    with pytest.raises(ModelError):
        model_from_id("torus", 4)


def test_custom_profile_from_table(tmp_path):
    r = np.linspace(0.05, 50, 400)
    path = tmp_path / "profile.csv"
    path.write_text("r,f\n" + "\n".join(f"{x},{x}" for x in r) + "\n")
    m = model_from_id(f"custom:{path}", 4)
    assert m.profile.f(1.0) == pytest.approx(1.0, abs=1e-9)


def test_custom_table_validation():
    with pytest.raises(ModelError):
        make_model("custom", 4, table=([1.0, 2.0], [1.0, 2.0]))  # too short
    with pytest.raises(ModelError):
        make_model("custom", 4, table=([1, 2, 2, 3], [1, 2, 2, 3]))  # not increasing


def test_hypothesis_report_euclidean():
    rep = hypothesis_report(make_model("euclidean", 4), 0.1, 50.0)
    assert all(rep.flags().values())
    assert rep.parallel_ricci_residual < 1e-5


def test_hypothesis_report_cone_parallel_ricci_fails():
    rep = hypothesis_report(make_model("cone", 4, c=0.5), 0.1, 50.0)
    flags = rep.flags()
    assert flags["nonneg_sectional_along_gradG"]
    assert flags["nonneg_ricci"]
    assert not flags["parallel_ricci"]
    assert rep.parallel_ricci_residual > 0


def test_hypothesis_report_quadratic_profile_negative_ricci():
    r = np.linspace(0.05, 80, 600)
    m = make_model("custom", 4, table=(r, r**2))
    rep = hypothesis_report(m, 0.1, 50.0)
    flags = rep.flags()
    assert flags["euclidean_volume_growth"]
    assert not flags["nonneg_ricci"]   # k_rad = -2/r^2 < 0


@settings(max_examples=40, deadline=None)
@given(
    c=st.floats(0.2, 1.0),
    n=st.integers(3, 6),
    r=st.floats(0.1, 20.0),
)
def test_cone_curvature_closed_form_property(c, n, r):
    s = curvature_at(make_model("cone", n, c=c), r)
    assert s.k_rad == 0.0
    assert s.k_tan == pytest.approx((1 - c * c) / (c * c * r * r), rel=1e-12)
