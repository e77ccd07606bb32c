"""Rotationally symmetric model manifolds.

A model is R^n \\ {tip} with the warped-product metric

    g = dr^2 + f(r)^2 * g_{S^{n-1}},

so everything is determined by the dimension n and the warping profile
f.  Closed-form curvature of such metrics:

    k_rad = -f''/f            (planes containing the radial direction)
    k_tan = (1 - f'^2)/f^2    (purely tangential planes)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

__all__ = [
    "WarpingProfile",
    "ModelManifold",
    "CurvatureSample",
    "HypothesisReport",
    "make_model",
    "model_from_id",
    "curvature_at",
    "volume_growth",
    "hypothesis_report",
    "sphere_area",
]

KINDS = ("euclidean", "cone", "smoothed_cone", "custom")

#: default absolute tolerance on curvature margins for hypothesis booleans
DEFAULT_CURV_TOL = 1e-9


class ModelError(ValueError):
    """Invalid model parameters or evaluation outside the admissible range."""


def _quintic_blend(t):
    """C^2 smoothstep w with w(0)=0, w(1)=1 and w'=w''=0 at both ends."""
    w = t**3 * (10.0 - 15.0 * t + 6.0 * t**2)
    wp = 30.0 * t**2 * (1.0 - 2.0 * t + t**2)
    wpp = 60.0 * t * (1.0 - 3.0 * t + 2.0 * t**2)
    return w, wp, wpp


@dataclass(frozen=True)
class WarpingProfile:
    """Warping function f(r) of a rotationally symmetric metric.

    kind
        one of ``euclidean`` (f = r), ``cone`` (f = c*r), ``smoothed_cone``
        (f = r near the tip, f = c*r beyond r0, C^2 quintic blend on
        [r0/2, r0]) or ``custom`` (cubic spline through a sampled table).
    """

    kind: str
    c: Optional[float] = None
    r0: Optional[float] = None
    table: Optional[tuple] = None  # (r, f) samples for kind == "custom"
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown profile kind {self.kind!r}")
        if self.kind in ("cone", "smoothed_cone"):
            if self.c is None or not (0.0 < self.c <= 1.0):
                raise ModelError("cone aperture c must satisfy 0 < c <= 1")
        if self.kind == "smoothed_cone":
            if self.r0 is None or self.r0 <= 0.0:
                raise ModelError("smoothed_cone requires r0 > 0")
        if self.kind == "custom":
            if self.table is None:
                raise ModelError("custom profile requires a sample table")
            r, fvals = np.asarray(self.table[0], float), np.asarray(self.table[1], float)
            if r.ndim != 1 or r.size < 4 or np.any(np.diff(r) <= 0):
                raise ModelError("custom table needs >= 4 strictly increasing radii")
            if np.any(r <= 0) or np.any(fvals <= 0):
                raise ModelError("custom table must have r > 0 and f > 0")
            object.__setattr__(self, "_spline", CubicSpline(r, fvals))

    # -- evaluation ------------------------------------------------------

    def _eval(self, r, order):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ModelError("profile is only defined for r > 0")
        if self.kind == "euclidean":
            out = (r, np.ones_like(r), np.zeros_like(r))[order]
        elif self.kind == "cone":
            c = self.c
            out = (c * r, np.full_like(r, c), np.zeros_like(r))[order]
        elif self.kind == "smoothed_cone":
            out = self._smoothed(r)[order]
        else:
            out = self._custom(r, order)
        return out if out.ndim else float(out)

    def _custom(self, r, order):
        r_lo, r_top = self.table[0][0], self.table[0][-1]
        if np.any(r > r_top):
            raise ModelError("custom profile evaluated beyond its table range")
        # below the table the profile is closed off with the linear cone
        # f = (f(r_lo)/r_lo) r, so tip integrals (volumes) stay defined
        slope = float(self._spline(r_lo)) / r_lo
        spline_val = np.asarray(self._spline(np.clip(r, r_lo, r_top), order), float)
        tip = (slope * r, np.full_like(r, slope), np.zeros_like(r))[order]
        return np.where(r < r_lo, tip, spline_val)

    def _smoothed(self, r):
        c, r0 = self.c, self.r0
        a, b = 0.5 * r0, r0
        t = np.clip((r - a) / (b - a), 0.0, 1.0)
        w, wp, wpp = _quintic_blend(t)
        wp = wp / (b - a)
        wpp = wpp / (b - a) ** 2
        # f = r * (1 + (c-1) w(t(r)))
        s = 1.0 + (c - 1.0) * w
        f = r * s
        fp = s + r * (c - 1.0) * wp
        fpp = 2.0 * (c - 1.0) * wp + r * (c - 1.0) * wpp
        return f, fp, fpp

    def f(self, r):
        return self._eval(r, 0)

    def fp(self, r):
        return self._eval(r, 1)

    def fpp(self, r):
        return self._eval(r, 2)

    def asymptotic_slope(self, r_ref=None):
        """Slope a of the linear asymptote f(r) ~ a*r, if one exists."""
        if self.kind == "euclidean":
            return 1.0
        if self.kind in ("cone", "smoothed_cone"):
            return self.c
        r_top = self.table[0][-1] if r_ref is None else r_ref
        return float(self.f(r_top) / r_top)

    def linear_from(self):
        """Radius beyond which f(r) = asymptotic_slope * r exactly (inf if never)."""
        if self.kind in ("euclidean", "cone"):
            return 0.0
        if self.kind == "smoothed_cone":
            return self.r0
        return math.inf


@dataclass(frozen=True)
class ModelManifold:
    """Dimension n >= 3 together with a warping profile."""

    n: int
    profile: WarpingProfile

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ModelError("dimension must be an integer >= 3")

    @property
    def singular_tip(self) -> bool:
        """True when the metric has a genuine cone point at r = 0."""
        return self.profile.kind == "cone" and self.profile.c < 1.0

    def describe(self) -> str:
        p = self.profile
        if p.kind == "euclidean":
            return "euclidean"
        if p.kind == "cone":
            return f"cone:{p.c:g}"
        if p.kind == "smoothed_cone":
            return f"smoothed-cone:{p.c:g}:{p.r0:g}"
        return "custom"


@dataclass(frozen=True)
class CurvatureSample:
    """Sectional and Ricci curvature of the warped metric at one radius."""

    r: float
    k_rad: float
    k_tan: float
    ric_rad: float
    ric_tan: float


@dataclass(frozen=True)
class HypothesisReport:
    """Where the model stands with respect to the curvature/volume hypotheses."""

    nonneg_sectional_along_gradG: bool
    sectional_margin: float
    nonneg_ricci: bool
    ricci_margin: float
    parallel_ricci_residual: float
    parallel_ricci: bool
    euclidean_volume_growth: bool
    volume_growth_inf: float
    nonparabolic: bool
    tol: float

    def flags(self) -> dict:
        return {
            "nonneg_sectional_along_gradG": self.nonneg_sectional_along_gradG,
            "nonneg_ricci": self.nonneg_ricci,
            "parallel_ricci": self.parallel_ricci,
            "euclidean_volume_growth": self.euclidean_volume_growth,
            "nonparabolic": self.nonparabolic,
        }


# ---------------------------------------------------------------------------


def make_model(kind, n, c=None, r0=None, table=None) -> ModelManifold:
    """Build a model manifold, validating dimension and profile parameters."""
    if int(n) != n or n < 3:
        raise ModelError(
            f"dimension n={n} rejected: need n >= 3 for non-parabolicity"
        )
    profile = WarpingProfile(kind=kind, c=c, r0=r0, table=table)
    return ModelManifold(n=int(n), profile=profile)


def model_from_id(model_id: str, n: int) -> ModelManifold:
    """Resolve a preset id: euclidean | cone:<c> | smoothed-cone:<c>:<r0> | custom:<path>."""
    parts = model_id.split(":")
    head = parts[0]
    if head == "euclidean" and len(parts) == 1:
        return make_model("euclidean", n)
    if head == "cone" and len(parts) == 2:
        return make_model("cone", n, c=float(parts[1]))
    if head in ("smoothed-cone", "smoothed_cone") and len(parts) == 3:
        return make_model("smoothed_cone", n, c=float(parts[1]), r0=float(parts[2]))
    if head == "custom" and len(parts) >= 2:
        path = ":".join(parts[1:])
        data = np.genfromtxt(path, delimiter=",", names=True)
        return make_model("custom", n, table=(data["r"], data["f"]))
    raise ModelError(f"unrecognized model id {model_id!r}")


def curvature_at(model: ModelManifold, r: float) -> CurvatureSample:
    """Closed-form curvature of the warped metric at radius r > 0."""
    if r <= 0:
        raise ModelError("curvature_at requires r > 0")
    p, n = model.profile, model.n
    f, fp, fpp = p.f(r), p.fp(r), p.fpp(r)
    k_rad = -fpp / f
    k_tan = (1.0 - fp * fp) / (f * f)
    return CurvatureSample(
        r=float(r),
        k_rad=float(k_rad),
        k_tan=float(k_tan),
        ric_rad=float((n - 1) * k_rad),
        ric_tan=float(k_rad + (n - 2) * k_tan),
    )


def sphere_area(n: int) -> float:
    """Area of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)


def ball_volume(model: ModelManifold, t: float) -> float:
    """Volume of the geodesic ball of radius t about the tip."""
    if t <= 0:
        raise ModelError("ball_volume requires t > 0")
    n, p = model.n, model.profile
    val, err = integrate.quad(
        lambda s: p.f(s) ** (n - 1), 0.0, t, limit=200, epsabs=0.0,
        epsrel=1e-10, full_output=1,
    )[:2]
    if not math.isfinite(val) or (val > 0 and err / val > 1e-8):
        raise ModelError("ball volume quadrature did not converge")
    return sphere_area(n) * val


def volume_growth(model: ModelManifold, t: float) -> float:
    """Vol B(t) / t^n; bounded below by a positive constant means Euclidean growth."""
    return ball_volume(model, t) / t ** model.n


def hypothesis_report(
    model: ModelManifold,
    r_min: float,
    r_max: float,
    probes: int = 16,
    tol: float = DEFAULT_CURV_TOL,
    fd_probes: int = 3,
    fd_h: float = 1e-3,
) -> HypothesisReport:
    """Probe the curvature/volume hypotheses on [r_min, r_max].

    The gradient of the Green function is radial on these models, so
    nonnegative sectional curvature along it reduces to k_rad >= 0.  The
    parallel-Ricci residual is measured with the finite-difference chart
    oracle rather than the closed forms, as an independent check.
    """
    if not (0 < r_min < r_max) or probes < 2:
        raise ModelError("need 0 < r_min < r_max and probes >= 2")
    radii = np.geomspace(r_min, r_max, probes)
    samples = [curvature_at(model, r) for r in radii]
    sec_margin = min(s.k_rad for s in samples)
    ric_margin = min(min(s.ric_rad, s.ric_tan) for s in samples)

    from . import fdcheck  # local import: fdcheck depends on this module

    chart = fdcheck.warped_chart(model)
    # keep fd probes at moderate radii: the step must stay well below r for
    # the nested differences to see the geometry instead of noise
    fd_lo = min(max(r_min, 2.0), r_max)
    fd_hi = max(min(r_max, 20.0), fd_lo)
    sub = np.geomspace(fd_lo, fd_hi, fd_probes)
    residual = 0.0
    for r in sub:
        point = fdcheck.warped_probe_point(model.n, r)
        residual = max(residual, fdcheck.check_parallel_ricci(chart, point, fd_h))

    ts = np.geomspace(r_min, r_max, probes)
    vg_inf = min(volume_growth(model, t) for t in ts)

    from .green import nonparabolic_check  # local import avoids a cycle

    nonpar = nonparabolic_check(model, r_min).varopoulos_integral_finite

    # the fd residual carries O(h^2) noise, so its boolean gets a looser gate
    fd_tol = max(tol, 10.0 * fd_h**2)
    return HypothesisReport(
        nonneg_sectional_along_gradG=bool(sec_margin >= -tol),
        sectional_margin=float(sec_margin),
        nonneg_ricci=bool(ric_margin >= -tol),
        ricci_margin=float(ric_margin),
        parallel_ricci_residual=float(residual),
        parallel_ricci=bool(residual <= fd_tol),
        euclidean_volume_growth=bool(vg_inf >= tol),
        volume_growth_inf=float(vg_inf),
        nonparabolic=bool(nonpar),
        tol=float(tol),
    )
