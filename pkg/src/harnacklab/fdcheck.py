"""Finite-difference coordinate-chart oracle.

Everything geometric here is differenced from metric components alone,
so it is independent of the closed-form curvature and of the symbolic
engine, and can arbitrate both.  The curvature sign convention is

    R(X,Y,Z,W) = g(grad_Y grad_X Z - grad_X grad_Y Z + grad_{[X,Y]} Z, W),

pinned by the round sphere having sectional curvature +1.

Test functions carry analytic partial derivatives (generated once with
sympy), so the only finite differencing is in the covariant corrections;
residuals of the commutator identities then scale as O(h^2).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .models import ModelManifold, make_model

__all__ = [
    "CoordinateChart",
    "TestFunction",
    "euclidean_chart",
    "round_sphere",
    "s2xr2",
    "cone_chart",
    "warped_chart",
    "chart_by_name",
    "warped_probe_point",
    "default_probe_point",
    "christoffels",
    "riemann",
    "ricci",
    "orthonormal_frame",
    "check_lemma31",
    "check_parallel_ricci",
    "hessian_scalar",
]

DEFAULT_H = 1e-3


class ChartError(ValueError):
    pass


@dataclass
class CoordinateChart:
    """A metric given by its component matrix as a function of the point."""

    name: str
    dim: int
    metric: Callable[[np.ndarray], np.ndarray]
    parallel_ricci_expected: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def g(self, x) -> np.ndarray:
        key = tuple(np.asarray(x, float))
        out = self._cache.get(key)
        if out is None:
            out = np.asarray(self.metric(np.asarray(x, float)), dtype=float)
            if out.shape != (self.dim, self.dim):
                raise ChartError("metric callable returned a wrong shape")
            self._cache[key] = out
        return out

    def ginv(self, x) -> np.ndarray:
        g = self.g(x)
        try:
            return np.linalg.inv(g)
        except np.linalg.LinAlgError as exc:
            raise ChartError(f"metric singular at {x}") from exc


# -- presets ----------------------------------------------------------------


def euclidean_chart(n: int) -> CoordinateChart:
    eye = np.eye(n)
    return CoordinateChart("euclidean", n, lambda x: eye,
                           parallel_ricci_expected=True)


def round_sphere(radius: float = 1.0) -> CoordinateChart:
    R2 = radius * radius

    def metric(x):
        theta = x[0]
        return np.diag([R2, R2 * math.sin(theta) ** 2])

    return CoordinateChart("round_sphere", 2, metric,
                           parallel_ricci_expected=True)


def s2xr2() -> CoordinateChart:
    """Unit round 2-sphere times a flat plane; symmetric, parallel Ricci."""

    def metric(x):
        theta = x[0]
        return np.diag([1.0, math.sin(theta) ** 2, 1.0, 1.0])

    return CoordinateChart("s2xr2", 4, metric, parallel_ricci_expected=True)


def warped_chart(model: ModelManifold) -> CoordinateChart:
    """Chart (r, theta_1, ..., theta_{n-1}) for dr^2 + f(r)^2 g_{S^{n-1}}."""
    n = model.n
    prof = model.profile

    def metric(x):
        r = x[0]
        f2 = prof.f(r) ** 2
        diag = [1.0, f2]
        s = 1.0
        for a in range(1, n - 1):
            s *= math.sin(x[a]) ** 2
            diag.append(f2 * s)
        return np.diag(diag)

    return CoordinateChart(f"warped[{model.describe()}]", n, metric)


def cone_chart(c: float, n: int) -> CoordinateChart:
    return warped_chart(make_model("cone", n, c=c))


def chart_by_name(name: str, **kw) -> CoordinateChart:
    if name == "euclidean":
        return euclidean_chart(int(kw.get("n", 4)))
    if name == "round_sphere":
        return round_sphere(float(kw.get("radius", 1.0)))
    if name == "s2xr2":
        return s2xr2()
    if name == "cone":
        return cone_chart(float(kw.get("c", 0.5)), int(kw.get("n", 4)))
    raise ChartError(f"unknown chart {name!r}")


def default_probe_point(chart: CoordinateChart) -> np.ndarray:
    """A probe away from coordinate degeneracies of each preset."""
    if chart.name == "euclidean":
        return 0.1 + 0.2 * np.arange(chart.dim)
    if chart.name == "round_sphere":
        return np.array([1.1, 0.7])
    if chart.name == "s2xr2":
        return np.array([1.1, 0.7, 0.3, -0.4])
    # warped charts: r = 1, angles in the safe band
    return warped_probe_point(chart.dim, 1.0)


def warped_probe_point(n: int, r: float) -> np.ndarray:
    point = np.empty(n)
    point[0] = r
    point[1:] = np.linspace(1.0, 1.6, n - 1)
    return point


# -- finite-difference geometry ----------------------------------------------


def metric_partials(chart: CoordinateChart, x, h: float) -> np.ndarray:
    """dg[k, i, j] = d g_ij / d x^k by central differences."""
    x = np.asarray(x, float)
    d = chart.dim
    dg = np.empty((d, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dg[k] = (chart.g(x + e) - chart.g(x - e)) / (2 * h)
    return dg


def christoffels(chart: CoordinateChart, x, h: float = DEFAULT_H) -> np.ndarray:
    """Gamma[k, i, j] = Gamma^k_ij with O(h^2) error."""
    if h <= 0:
        raise ChartError("step h must be positive")
    ginv = chart.ginv(x)
    dg = metric_partials(chart, x, h)
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    d = chart.dim
    gamma = np.empty((d, d, d))
    for i in range(d):
        for j in range(d):
            v = dg[i, j, :] + dg[j, i, :] - dg[:, i, j]
            gamma[:, i, j] = 0.5 * ginv @ v
    return gamma


def _dchristoffels(chart, x, h):
    """dGamma[l, k, i, j] = d_l Gamma^k_ij, central differences of FD Gamma."""
    x = np.asarray(x, float)
    d = chart.dim
    out = np.empty((d, d, d, d))
    for l in range(d):
        e = np.zeros(d)
        e[l] = h
        out[l] = (christoffels(chart, x + e, h) - christoffels(chart, x - e, h)) / (2 * h)
    return out


def riemann_coord(chart: CoordinateChart, x, h: float = DEFAULT_H) -> np.ndarray:
    """R[i, j, k, l] with all indices down, in the pinned sign convention."""
    gamma = christoffels(chart, x, h)
    dgamma = _dchristoffels(chart, x, h)
    # R^m_{ijk} = d_j Gamma^m_ik - d_i Gamma^m_jk
    #             + Gamma^p_ik Gamma^m_jp - Gamma^p_jk Gamma^m_ip
    prod = np.einsum("pik,mjp->mijk", gamma, gamma) - np.einsum(
        "pjk,mip->mijk", gamma, gamma
    )
    up = (
        np.einsum("jmik->mijk", dgamma)
        - np.einsum("imjk->mijk", dgamma)
        + prod
    )
    g = chart.g(x)
    return np.einsum("mijk,ml->ijkl", up, g)


def orthonormal_frame(chart: CoordinateChart, x) -> np.ndarray:
    """E[:, a] = coordinate components of the a-th Gram-Schmidt frame vector."""
    g = chart.g(x)
    d = chart.dim
    E = np.eye(d)
    for a in range(d):
        v = E[:, a]
        for b in range(a):
            v = v - (E[:, b] @ g @ v) * E[:, b]
        norm = math.sqrt(v @ g @ v)
        if norm <= 0:
            raise ChartError("metric not positive-definite at probe point")
        E[:, a] = v / norm
    return E


def _to_frame(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    for axis in range(T.ndim):
        T = np.tensordot(T, E, axes=([0], [0]))
    return T


def riemann(chart: CoordinateChart, x, h: float = DEFAULT_H) -> np.ndarray:
    """Curvature components in an orthonormal frame."""
    return _to_frame(riemann_coord(chart, x, h), orthonormal_frame(chart, x))


def ricci(chart: CoordinateChart, x, h: float = DEFAULT_H) -> np.ndarray:
    """Ric_ab = sum_c R(e_a, e_c, e_b, e_c) in an orthonormal frame."""
    R = riemann(chart, x, h)
    return np.einsum("acbc->ab", R)


def _ricci_coord(chart: CoordinateChart, x, h: float) -> np.ndarray:
    """Ricci with coordinate (lower) indices, for covariant differentiation."""
    Rc = riemann_coord(chart, x, h)
    ginv = chart.ginv(x)
    # Ric_ij = g^{kl} R_{i k j l}
    return np.einsum("kl,ikjl->ij", ginv, Rc)


def check_parallel_ricci(chart: CoordinateChart, x, h: float = DEFAULT_H) -> float:
    """Frobenius norm of grad Ric in an orthonormal frame."""
    x = np.asarray(x, float)
    d = chart.dim
    gamma = christoffels(chart, x, h)
    ric0 = _ricci_coord(chart, x, h)
    dric = np.empty((d, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dric[k] = (_ricci_coord(chart, x + e, h) - _ricci_coord(chart, x - e, h)) / (2 * h)
    # (grad Ric)_{ijk} = d_k Ric_ij - Gamma^m_ki Ric_mj - Gamma^m_kj Ric_im
    cov = (
        np.einsum("kij->ijk", dric)
        - np.einsum("mki,mj->ijk", gamma, ric0)
        - np.einsum("mkj,im->ijk", gamma, ric0)
    )
    covf = _to_frame(cov, orthonormal_frame(chart, x))
    return float(np.sqrt(np.sum(covf * covf)))


# -- test functions -----------------------------------------------------------


class TestFunction:
    """Scalar function with analytic partial derivatives up to 4th order."""

    def __init__(self, expr, coords: Sequence[str]):
        self.coords = [sp.Symbol(c) for c in coords]
        self.expr = sp.sympify(expr)
        self.dim = len(self.coords)
        self._lams = {}
        for order in range(5):
            for combo in itertools.combinations_with_replacement(
                range(self.dim), order
            ):
                d = self.expr
                for idx in combo:
                    d = sp.diff(d, self.coords[idx])
                self._lams[combo] = sp.lambdify(self.coords, d, "math")

    def partial(self, x, combo) -> float:
        return float(self._lams[tuple(sorted(combo))](*x))

    def d1(self, x):
        return np.array([self.partial(x, (i,)) for i in range(self.dim)])

    def d2(self, x):
        d = self.dim
        return np.array(
            [[self.partial(x, (i, j)) for j in range(d)] for i in range(d)]
        )

    def d3(self, x):
        d = self.dim
        return np.array(
            [
                [[self.partial(x, (i, j, k)) for k in range(d)] for j in range(d)]
                for i in range(d)
            ]
        )


def default_test_function(chart: CoordinateChart) -> TestFunction:
    names = [f"x{i}" for i in range(chart.dim)]
    if chart.name == "round_sphere":
        return TestFunction("cos(x0) + sin(x0)*cos(x1)", names)
    if chart.name == "s2xr2":
        return TestFunction("cos(x0)*exp(-x2**2/4) + sin(x0)*cos(x1) + x3*x2", names)
    if chart.name == "euclidean":
        expr = "x0**2*x1" if chart.dim <= 2 else "x0**2*x1 + exp(-x1)*cos(x2)"
        return TestFunction(expr, names)
    # warped charts
    expr = "exp(-x0)*cos(x1)" if chart.dim >= 2 else "exp(-x0)"
    return TestFunction(expr, names)


# -- covariant derivatives of a test function ---------------------------------


class _CovariantStack:
    """Nested covariant derivatives of f on a chart, all FD with step h."""

    def __init__(self, chart: CoordinateChart, f, h: float):
        self.chart = chart
        self.f = f
        self.h = h
        self.d = chart.dim

    def gamma(self, x):
        return christoffels(self.chart, x, self.h)

    def hess(self, x):
        """(grad^2 f)_{ij} in coordinates."""
        return self.f.d2(x) - np.einsum("mij,m->ij", self.gamma(x), self.f.d1(x))

    def third(self, x):
        """(grad^3 f)_{ijk} = grad_k (grad^2 f)_{ij} in coordinates."""
        d, h = self.d, self.h
        dT2 = np.empty((d, d, d))
        for k in range(d):
            e = np.zeros(d)
            e[k] = h
            dT2[k] = (self.hess(x + e) - self.hess(x - e)) / (2 * h)
        gamma = self.gamma(x)
        T2 = self.hess(x)
        return (
            np.einsum("kij->ijk", dT2)
            - np.einsum("mki,mj->ijk", gamma, T2)
            - np.einsum("mkj,im->ijk", gamma, T2)
        )

    def fourth(self, x):
        """(grad^4 f)_{ijkl} in coordinates."""
        d, h = self.d, self.h
        dT3 = np.empty((d, d, d, d))
        for l in range(d):
            e = np.zeros(d)
            e[l] = h
            dT3[l] = (self.third(x + e) - self.third(x - e)) / (2 * h)
        gamma = self.gamma(x)
        T3 = self.third(x)
        out = np.einsum("lijk->ijkl", dT3)
        out -= np.einsum("mli,mjk->ijkl", gamma, T3)
        out -= np.einsum("mlj,imk->ijkl", gamma, T3)
        out -= np.einsum("mlk,ijm->ijkl", gamma, T3)
        return out

    def laplacian(self, x) -> float:
        return float(np.einsum("ij,ij->", self.chart.ginv(x), self.hess(x)))

    def grad_scalar(self, func, x):
        d, h = self.d, self.h
        out = np.empty(d)
        for k in range(d):
            e = np.zeros(d)
            e[k] = h
            out[k] = (func(x + e) - func(x - e)) / (2 * h)
        return out

    def hess_scalar(self, func, x):
        """Covariant Hessian of a numerically-defined scalar field."""
        d, h = self.d, self.h
        f0 = func(x)
        hess = np.empty((d, d))
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = h
            hess[i, i] = (func(x + ei) - 2 * f0 + func(x - ei)) / (h * h)
            for j in range(i + 1, d):
                ej = np.zeros(d)
                ej[j] = h
                hess[i, j] = hess[j, i] = (
                    func(x + ei + ej)
                    - func(x + ei - ej)
                    - func(x - ei + ej)
                    + func(x - ei - ej)
                ) / (4 * h * h)
        grad = self.grad_scalar(func, x)
        return hess - np.einsum("mij,m->ij", self.gamma(x), grad)


def check_lemma31(chart: CoordinateChart, f: TestFunction, x,
                  h: float = DEFAULT_H) -> np.ndarray:
    """Residuals (max abs component) of the five commutator identities."""
    x = np.asarray(x, float)
    stack = _CovariantStack(chart, f, h)
    E = orthonormal_frame(chart, x)
    R = riemann(chart, x, h)
    ric = np.einsum("acbc->ab", R)

    f1 = _to_frame(f.d1(x), E)
    T2 = _to_frame(stack.hess(x), E)
    T3 = _to_frame(stack.third(x), E)
    T4 = _to_frame(stack.fourth(x), E)

    # 1. symmetry of the Hessian
    r1 = np.max(np.abs(T2 - T2.T))

    # 2. f_ijk - f_ikj = R_{jkli} f_l
    rhs2 = np.einsum("jkli,l->ijk", R, f1)
    r2 = np.max(np.abs(T3 - T3.transpose(0, 2, 1) - rhs2))

    # 3. Delta f_i - (Delta f)_i = R_ik f_k
    lap_i = np.einsum("ikk->i", T3)
    dlap = _to_frame(stack.grad_scalar(stack.laplacian, x), E)
    r3 = np.max(np.abs(lap_i - dlap - ric @ f1))

    # 4. f_ijkl - f_ijlk = R_{klmj} f_im + R_{klmi} f_jm
    rhs4 = np.einsum("klmj,im->ijkl", R, T2) + np.einsum("klmi,jm->ijkl", R, T2)
    r4 = np.max(np.abs(T4 - T4.transpose(0, 1, 3, 2) - rhs4))

    # 5. Delta f_ij - (Delta f)_ij = R_jk f_ik + R_ik f_jk - 2 R_ikjl f_kl
    lap_ij = np.einsum("ijkk->ij", T4)
    hess_lap = _to_frame(stack.hess_scalar(stack.laplacian, x), E)
    rhs5 = (
        np.einsum("jk,ik->ij", ric, T2)
        + np.einsum("ik,jk->ij", ric, T2)
        - 2.0 * np.einsum("ikjl,kl->ij", R, T2)
    )
    r5 = np.max(np.abs(lap_ij - hess_lap - rhs5))

    return np.array([r1, r2, r3, r4, r5])


def hessian_scalar(chart: CoordinateChart, func, x, h: float = DEFAULT_H):
    """Covariant Hessian (orthonormal frame) of a scalar given numerically."""
    x = np.asarray(x, float)
    stack = _CovariantStack(chart, None, h)
    hess = stack.hess_scalar(func, x)
    return _to_frame(hess, orthonormal_frame(chart, x))
