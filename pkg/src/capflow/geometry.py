"""Geometry of an axisymmetric radial graph rho = e^u over S^n_+.

Curvatures are evaluated first for the flat half-space metric and then
carried to the ball metric e^{2w} delta by the conformal change of the
shape operator.  The unit normal is the outward radial one, (d_rho - u' e_beta)/v,
which in the ball points away from the region containing the south pole.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import w_scalar
from .grid import AxisymmetricGrid, contact_cos, d1, d2


class PoleError(ValueError):
    """The pole limit was requested without a symmetric ghost value."""


class StarShapedError(RuntimeError):
    """<X_a, nu> lost positivity, or the profile became non-finite."""

    def __init__(self, message: str, node: int | None = None, t: float | None = None):
        super().__init__(message)
        self.node = node
        self.t = t


@dataclass
class Profile:
    """Nodal values and slopes of u; derivatives may be discrete or analytic."""

    grid: AxisymmetricGrid
    theta: float
    u: np.ndarray
    ub: np.ndarray
    ubb: np.ndarray
    boundary_slope: float
    t: float = 0.0

    def fields(self) -> "GeometryFields":
        return fields_from(self.u, self.ub, self.ubb, self.grid.beta, self.grid.n)


@dataclass
class RadialGraph:
    grid: AxisymmetricGrid
    theta: float
    u_ext: np.ndarray
    t: float = 0.0

    @classmethod
    def from_nodes(cls, grid: AxisymmetricGrid, theta: float, u, t: float = 0.0) -> "RadialGraph":
        u = np.asarray(u, dtype=float)
        if u.shape != (grid.M + 1,):
            raise ValueError(f"expected {grid.M + 1} nodal values, got {u.shape}")
        ext = grid.empty_ext()
        ext[1:-1] = u
        return cls(grid=grid, theta=float(theta), u_ext=ext, t=float(t))

    @property
    def u(self) -> np.ndarray:
        return self.u_ext[1:-1]

    @property
    def rho(self) -> np.ndarray:
        return np.exp(self.u)

    def copy(self) -> "RadialGraph":
        return RadialGraph(self.grid, self.theta, self.u_ext.copy(), self.t)

    def derivatives(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodal (u_beta, u_betabeta); requires both ghosts."""
        if np.isfinite(self.u_ext[0]) and self.u_ext[0] != self.u_ext[2]:
            raise PoleError("ghost at j=-1 does not mirror node j=1; the pole limit is undefined")
        return d1(self.u_ext, self.grid), d2(self.u_ext, self.grid)

    def profile(self) -> Profile:
        ub, ubb = self.derivatives()
        u = self.u
        h = self.grid.dbeta
        slope = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
        return Profile(self.grid, self.theta, u.copy(), ub, ubb, float(slope), self.t)


def cot_times_slope(beta, ub, ubb):
    """cot(beta) * u_beta, replaced by its limit u_betabeta at the pole."""
    beta = np.asarray(beta, dtype=float)
    pole = beta == 0.0
    sb = np.where(pole, 1.0, np.sin(beta))
    return np.where(pole, ubb, np.cos(beta) / sb * ub)


def half_space_curvatures_from(u, ub, ubb, beta, n: int):
    """(H, kappa_beta, kappa_tan) of the radial graph in the flat metric."""
    v = np.sqrt(1.0 + ub**2)
    er = np.exp(-u)
    kb = er * (1.0 + ub**2 - ubb) / v**3
    kt = er * (1.0 - cot_times_slope(beta, ub, ubb)) / v
    return kb + (n - 1) * kt, kb, kt


def normal_derivative_of_inverse_factor(rho, ub, beta):
    """D_nu e^{-w} for the outward radial normal."""
    v = np.sqrt(1.0 + ub**2)
    return (rho + np.cos(beta) + np.sin(beta) * ub) / v


def ball_curvatures_from(u, ub, ubb, beta, n: int):
    """(H, kappa_beta, kappa_tan) in the ball metric."""
    _, kb, kt = half_space_curvatures_from(u, ub, ubb, beta, n)
    rho = np.exp(u)
    ew = np.exp(w_scalar(rho, beta))
    shift = normal_derivative_of_inverse_factor(rho, ub, beta)
    kb_ball = kb / ew - shift
    kt_ball = kt / ew - shift
    return kb_ball + (n - 1) * kt_ball, kb_ball, kt_ball


def support_terms_from(u, ub, beta):
    """(<x,a>, <nu,a>, <X_a,nu>) in the ball for a = -E_{n+1}."""
    rho = np.exp(u)
    v = np.sqrt(1.0 + ub**2)
    ew = np.exp(w_scalar(rho, beta))
    cb, sb = np.cos(beta), np.sin(beta)
    x_a = -0.5 * (rho**2 - 1.0) * ew
    nu_a = -0.5 * ew / v * (rho**2 * cb + 2.0 * rho + cb) + 0.5 * ew * (rho**2 - 1.0) * sb / v * ub
    Xa_nu = ew * rho / v
    return x_a, nu_a, Xa_nu


@dataclass
class GeometryFields:
    rho: np.ndarray
    v: np.ndarray
    w: np.ndarray
    H_half: np.ndarray
    kappa_beta_half: np.ndarray
    kappa_tan_half: np.ndarray
    H_ball: np.ndarray
    kappa_beta: np.ndarray
    kappa_tan: np.ndarray
    x_dot_a: np.ndarray
    nu_dot_a: np.ndarray
    support_Xa: np.ndarray
    area_density: np.ndarray  # ball area element per unit d(sigma) on S^n_+
    n: int

    def speed(self, theta: float) -> np.ndarray:
        """Normal speed n<x,a> + n cos(theta) <nu,a> - H <X_a,nu> in the ball."""
        n = self.n
        return n * self.x_dot_a + n * contact_cos(theta) * self.nu_dot_a - self.H_ball * self.support_Xa

    @property
    def sigma2(self) -> np.ndarray:
        """Second elementary symmetric function of the ball principal curvatures."""
        n1 = self.n - 1
        return n1 * self.kappa_beta * self.kappa_tan + 0.5 * n1 * (n1 - 1) * self.kappa_tan**2


def fields_from(u, ub, ubb, beta, n: int) -> GeometryFields:
    u, ub, ubb = (np.asarray(a, dtype=float) for a in (u, ub, ubb))
    rho = np.exp(u)
    v = np.sqrt(1.0 + ub**2)
    w = w_scalar(rho, beta)
    Hh, kbh, kth = half_space_curvatures_from(u, ub, ubb, beta, n)
    Hb, kb, kt = ball_curvatures_from(u, ub, ubb, beta, n)
    xa, nua, Xanu = support_terms_from(u, ub, beta)
    density = np.exp(n * w) * rho**n * v
    return GeometryFields(rho, v, w, Hh, kbh, kth, Hb, kb, kt, xa, nua, Xanu, density, n)


def geometry_fields(graph: RadialGraph) -> GeometryFields:
    ub, ubb = graph.derivatives()
    return fields_from(graph.u, ub, ubb, graph.grid.beta, graph.grid.n)


def half_space_curvatures(graph: RadialGraph):
    ub, ubb = graph.derivatives()
    return half_space_curvatures_from(graph.u, ub, ubb, graph.grid.beta, graph.grid.n)


def ball_curvatures(graph: RadialGraph):
    ub, ubb = graph.derivatives()
    return ball_curvatures_from(graph.u, ub, ubb, graph.grid.beta, graph.grid.n)


def support_and_speed_terms(graph: RadialGraph):
    ub = d1(graph.u_ext, graph.grid)
    return support_terms_from(graph.u, ub, graph.grid.beta)


def check_star_shaped(graph: RadialGraph) -> None:
    """Raise StarShapedError naming the first offending node."""
    u = graph.u
    bad = np.flatnonzero(~np.isfinite(u))
    if bad.size:
        raise StarShapedError(f"non-finite u at node {bad[0]} (t={graph.t:g})", int(bad[0]), graph.t)
    _, _, support = support_and_speed_terms(graph)
    bad = np.flatnonzero(~(support > 0.0) | ~np.isfinite(support))
    if bad.size:
        raise StarShapedError(f"<X_a,nu> <= 0 at node {bad[0]} (t={graph.t:g})", int(bad[0]), graph.t)
