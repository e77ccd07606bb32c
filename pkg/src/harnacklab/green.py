"""Radial Green function profile on a model manifold.

On a warped product dr^2 + f(r)^2 g_{S^{n-1}} the minimal positive
Green function with pole at the tip is radial and harmonic away from
the pole, which pins it up to normalization:

    G(r)  = (n-2) * int_r^inf f(s)^{1-n} ds
    G'(r) = -(n-2) * f(r)^{1-n}
    G''(r) = (n-2)(n-1) * f(r)^{-n} * f'(r)

The constant is chosen so that G = r^{2-n} when f(r) = r.  Everything
else (b, b^2, |grad b|) is algebra on top of these three.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from .models import ModelError, ModelManifold

__all__ = [
    "RadialGreenProfile",
    "NonParabolicityReport",
    "compute_profile",
    "hess_b2_eigs",
    "check_power_laplacian",
    "nonparabolic_check",
]

#: relative deviation from the linear asymptote below which the closed-form
#: tail integral takes over
TAIL_MATCH_RTOL = 1e-6


@dataclass(frozen=True)
class NonParabolicityReport:
    varopoulos_integral_finite: bool
    tail_exponent: float


def _tail_split_radius(model: ModelManifold, r_hint: float) -> float:
    """Smallest probed S >= r_hint with f within TAIL_MATCH_RTOL of a*s."""
    p = model.profile
    lin = p.linear_from()
    if math.isfinite(lin):
        return max(lin, r_hint)
    # custom profile: walk up the table looking for an effectively linear tail
    a = p.asymptotic_slope()
    r_top = p.table[0][-1]
    for s in np.geomspace(max(r_hint, p.table[0][0]), r_top, 64):
        if abs(p.f(s) / (a * s) - 1.0) <= TAIL_MATCH_RTOL:
            return float(s)
    raise ModelError(
        "custom profile has no linear asymptote in its table range; "
        "the Green tail integral cannot be closed"
    )


def nonparabolic_check(model: ModelManifold, s: float) -> NonParabolicityReport:
    """Convergence of the volume integral test, via the decay rate of f^{1-n}.

    The integrand t / Vol B(t) behaves like f(t)^{1-n}, so the integral is
    finite iff the measured log-log slope of f^{1-n} is below -1.
    """
    if s <= 0:
        raise ModelError("nonparabolic_check requires s > 0")
    p, n = model.profile, model.n
    if p.kind == "custom":
        r_hi = p.table[0][-1]
        r_lo = r_hi / 2.0
    else:
        r_lo = max(s, 10.0 * (p.r0 if p.kind == "smoothed_cone" else 1.0))
        r_hi = 2.0 * r_lo
    slope = (math.log(p.f(r_hi)) - math.log(p.f(r_lo))) / (
        math.log(r_hi) - math.log(r_lo)
    )
    tail_exponent = (1 - n) * slope
    return NonParabolicityReport(
        varopoulos_integral_finite=bool(tail_exponent < -1.0 - 1e-9),
        tail_exponent=float(tail_exponent),
    )


@dataclass(frozen=True)
class RadialGreenProfile:
    """G and its companions sampled on a grid, with exact radial derivatives."""

    model: ModelManifold
    grid: np.ndarray
    G: np.ndarray
    Gp: np.ndarray
    Gpp: np.ndarray
    alpha: Fraction
    b: np.ndarray
    b2: np.ndarray
    b2p: np.ndarray
    b2pp: np.ndarray
    grad_b: np.ndarray
    tail_radius: float
    tail_constant: float  # G contribution of [S, inf) in closed form

    # -- pointwise evaluation (exact up to the quadrature of G itself) ----

    def green_at(self, r: float) -> float:
        """G(r) for any r in (0, tail range], by quadrature + closed tail."""
        if r <= 0:
            raise ModelError("green_at requires r > 0")
        n, p = self.model.n, self.model.profile
        if r >= self.tail_radius:
            a = p.asymptotic_slope()
            return a ** (1 - n) * r ** (2 - n)
        val = integrate.quad(
            lambda s: p.f(s) ** (1 - n),
            r,
            self.tail_radius,
            limit=200,
            epsabs=0.0,
            epsrel=1e-12,
            full_output=1,
        )[0]
        return (n - 2) * val + self.tail_constant

    def green_derivs_at(self, r: float):
        """(G, G', G'') at r, the derivatives in closed form."""
        n, p = self.model.n, self.model.profile
        G = self.green_at(r)
        Gp = -(n - 2) * p.f(r) ** (1 - n)
        Gpp = (n - 2) * (n - 1) * p.f(r) ** (-n) * p.fp(r)
        return G, Gp, Gpp

    def b_at(self, r: float) -> float:
        n = self.model.n
        return self.green_at(r) ** (1.0 / (2 - n))

    def b2_at(self, r: float) -> float:
        n = self.model.n
        return self.green_at(r) ** (2.0 / (2 - n))

    def grad_b_at(self, r: float) -> float:
        n = self.model.n
        G, Gp, _ = self.green_derivs_at(r)
        return abs(Gp) * G ** ((n - 1) / (2.0 - n)) / (n - 2)

    def laplacian_radial(self, r: float, u, up, upp) -> float:
        """Laplace-Beltrami of a radial function: u'' + (n-1)(f'/f)u'."""
        p = self.model.profile
        return upp + (self.model.n - 1) * p.fp(r) / p.f(r) * up

    def to_csv(self) -> str:
        from .harnack import hess_b2_eigs_arrays

        mu_rad, mu_tan = hess_b2_eigs_arrays(self)
        buf = io.StringIO()
        buf.write("r,G,Gp,Gpp,b,b2,grad_b,mu_rad,mu_tan\n")
        cols = (self.grid, self.G, self.Gp, self.Gpp, self.b, self.b2,
                self.grad_b, mu_rad, mu_tan)
        for row in zip(*cols):
            buf.write(",".join(format(v, ".17g") for v in row) + "\n")
        return buf.getvalue()


def default_grid(r_min=1e-2, r_max=1e2, size=512) -> np.ndarray:
    return np.geomspace(r_min, r_max, size)


def compute_profile(model: ModelManifold, grid=None) -> RadialGreenProfile:
    """Integrate the Green function on the grid (backwards, tail first)."""
    if grid is None:
        grid = default_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ModelError("grid must be strictly increasing with >= 2 points")
    if grid[0] <= 0:
        raise ModelError("grid must stay inside (0, inf); G has a pole at r = 0")
    rep = nonparabolic_check(model, grid[0])
    if not rep.varopoulos_integral_finite:
        raise ModelError(
            f"model is parabolic (tail exponent {rep.tail_exponent:.3g} >= -1); "
            "no positive Green function"
        )
    n, p = model.n, model.profile
    a = p.asymptotic_slope()
    S = _tail_split_radius(model, grid[-1])
    # (n-2) * int_S^inf (a s)^{1-n} ds
    tail_constant = a ** (1 - n) * S ** (2 - n)

    f_pow = lambda s: p.f(s) ** (1 - n)
    G = np.empty_like(grid)
    acc = tail_constant
    prev = S
    for i in range(grid.size - 1, -1, -1):
        seg = integrate.quad(f_pow, grid[i], prev, limit=200,
                             epsabs=0.0, epsrel=1e-13, full_output=1)[0]
        acc += (n - 2) * seg
        G[i] = acc
        prev = grid[i]

    fg, fpg = p.f(grid), p.fp(grid)
    Gp = -(n - 2) * fg ** (1 - n)
    Gpp = (n - 2) * (n - 1) * fg ** (-n) * fpg

    e = 1.0 / (2 - n)
    b = G**e
    b2 = G ** (2 * e)
    b2p = 2 * e * G ** (2 * e - 1) * Gp
    b2pp = 2 * e * ((2 * e - 1) * G ** (2 * e - 2) * Gp**2 + G ** (2 * e - 1) * Gpp)
    grad_b = np.abs(e * G ** (e - 1) * Gp)

    return RadialGreenProfile(
        model=model,
        grid=grid,
        G=G,
        Gp=Gp,
        Gpp=Gpp,
        alpha=Fraction(n, n - 2),
        b=b,
        b2=b2,
        b2p=b2p,
        b2pp=b2pp,
        grad_b=grad_b,
        tail_radius=float(S),
        tail_constant=float(tail_constant),
    )


def hess_b2_eigs(profile: RadialGreenProfile, r: float):
    """Eigenvalues (mu_rad, mu_tan) of Hess b^2 relative to g at radius r.

    For a radial function u the Hessian of the warped metric is diagonal
    with u'' on the radial line and u' f'/f on the sphere directions.
    """
    grid = profile.grid
    if not (grid[0] <= r <= grid[-1]):
        raise ModelError(f"r={r} outside profile grid range")
    n = profile.model.n
    p = profile.model.profile
    G, Gp, Gpp = profile.green_derivs_at(r)
    e = 2.0 / (2 - n)
    b2p = e * G ** (e - 1) * Gp
    b2pp = e * ((e - 1) * G ** (e - 2) * Gp**2 + G ** (e - 1) * Gpp)
    mu_rad = b2pp
    mu_tan = b2p * p.fp(r) / p.f(r)
    return float(mu_rad), float(mu_tan)


def check_power_laplacian(profile: RadialGreenProfile, r: float, beta: float) -> float:
    """| Delta(G^beta) - beta(beta-1) G^{beta-2} |grad G|^2 | at radius r."""
    grid = profile.grid
    if not (grid[0] <= r <= grid[-1]):
        raise ModelError(f"r={r} outside profile grid range")
    G, Gp, Gpp = profile.green_derivs_at(r)
    u = G**beta
    up = beta * G ** (beta - 1) * Gp
    upp = beta * (beta - 1) * G ** (beta - 2) * Gp**2 + beta * G ** (beta - 1) * Gpp
    lhs = profile.laplacian_radial(r, u, up, upp)
    rhs = beta * (beta - 1) * G ** (beta - 2) * Gp**2
    return abs(lhs - rhs)
