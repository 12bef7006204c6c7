"""Scalar functionals and identity residuals of a radial graph, in the ball metric."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import gamma, pi
from typing import NamedTuple, Union

import numpy as np
from scipy.integrate import quad

from .conformal import half_to_ball, meridian_point, pushforward
from .geometry import Profile, RadialGraph
from .grid import contact_cos, contact_cot, integrate_hemisphere, sphere_measure

Surface = Union[RadialGraph, Profile]


class OrientationError(RuntimeError):
    """The computed volume left (0, |B|): the normal orientation is inconsistent."""


def _profile(surface: Surface) -> Profile:
    return surface if isinstance(surface, Profile) else surface.profile()


def ball_volume(n: int) -> float:
    """Volume of the unit (n+1)-ball."""
    return pi ** ((n + 1) / 2) / gamma((n + 1) / 2 + 1)


@dataclass
class BoundaryCircle:
    alpha: float  # polar angle of the rim measured from the north pole
    length: float  # (n-1)-measure of the rim
    a_dot_nubar: float  # <a, nubar>, nubar the outward normal of the wetted region


def boundary_circle(surface: Surface) -> BoundaryCircle:
    p = _profile(surface)
    n = p.grid.n
    rho_b = float(np.exp(p.u[-1]))
    xb = half_to_ball(meridian_point(np.array(rho_b), np.pi / 2, n + 1))
    cos_alpha = float(np.clip(xb[-1], -1.0, 1.0))
    alpha = float(np.arccos(cos_alpha))
    sin_alpha = np.sin(alpha)
    return BoundaryCircle(alpha, sphere_measure(n - 1) * sin_alpha ** (n - 1), -sin_alpha)


def _wetted_measure(alpha: float, n: int) -> float:
    val, _ = quad(lambda s: np.sin(s) ** (n - 1), alpha, pi, epsabs=0.0, epsrel=1e-13)
    return sphere_measure(n - 1) * val


def area_and_wetting(surface: Surface) -> tuple[float, float]:
    p = _profile(surface)
    f = p.fields()
    area = integrate_hemisphere(f.area_density, p.grid)
    wet = _wetted_measure(boundary_circle(p).alpha, p.grid.n)
    return area, wet


def energy(surface: Surface) -> float:
    p = _profile(surface)
    area, wet = area_and_wetting(p)
    return area - contact_cos(p.theta) * wet


def ball_support(surface: Surface) -> np.ndarray:
    """<x, nu> in the ball, with nu pushed from the half-space normal by finite differences."""
    p = _profile(surface)
    n, beta = p.grid.n, p.grid.beta
    rho = np.exp(p.u)
    v = np.sqrt(1.0 + p.ub**2)
    Y = meridian_point(rho, beta, n + 1)
    e_rho = meridian_point(np.ones_like(rho), beta, n + 1)
    e_beta = np.zeros_like(Y)
    e_beta[:, 0] = np.cos(beta)
    e_beta[:, -1] = -np.sin(beta)
    nu_half = (e_rho - p.ub[:, None] * e_beta) / v[:, None]
    image = pushforward(half_to_ball, Y, nu_half, h=1e-6)
    nu_ball = image / np.linalg.norm(image, axis=-1, keepdims=True)
    return np.sum(half_to_ball(Y) * nu_ball, axis=-1)


def enclosed_volume(surface: Surface, flip: bool = False) -> float:
    """Volume of the side containing the south pole (or its complement when flip)."""
    p = _profile(surface)
    n = p.grid.n
    f = p.fields()
    sign = -1.0 if flip else 1.0
    flux = sign * integrate_hemisphere(ball_support(p) * f.area_density, p.grid)
    wet = _wetted_measure(boundary_circle(p).alpha, n)
    if flip:
        wet = sphere_measure(n) - wet
    vol = (flux + wet) / (n + 1)
    if not 0.0 < vol < ball_volume(n):
        raise OrientationError(f"enclosed volume {vol:.6g} outside (0, {ball_volume(n):.6g})")
    return vol


def minkowski_residual(surface: Surface, nu_a_sign: float = 1.0) -> float:
    """Integral of n<x,a> + n cos(theta)<nu,a> - H<X_a,nu> over the surface.

    ``nu_a_sign=-1`` reverses <nu,a> and exists only as a negative control.
    """
    p = _profile(surface)
    f = p.fields()
    n = p.grid.n
    integrand = n * f.x_dot_a + nu_a_sign * n * contact_cos(p.theta) * f.nu_dot_a - f.H_ball * f.support_Xa
    return integrate_hemisphere(integrand * f.area_density, p.grid)


def prop21_residual(surface: Surface) -> float:
    """LHS - RHS of the sigma_2 integral identity for capillary hypersurfaces."""
    p = _profile(surface)
    n = p.grid.n
    if n < 2:
        raise ValueError("the identity needs n >= 2")
    f = p.fields()
    rim = boundary_circle(p)
    lhs = integrate_hemisphere(f.H_ball * f.x_dot_a * f.area_density, p.grid)
    bulk = 2.0 / (n - 1) * integrate_hemisphere(f.sigma2 * f.support_Xa * f.area_density, p.grid)
    # H <X^T,mu> - h(X^T,mu) = -cos(theta) <a,nubar> (H - h(mu,mu)), and H - h(mu,mu) = (n-1) kappa_tan
    boundary = -contact_cos(p.theta) * rim.a_dot_nubar * f.kappa_tan[-1] * rim.length
    return lhs - bulk - boundary


def prop22_residual(surface: Surface) -> float:
    p = _profile(surface)
    n = p.grid.n
    if n < 2:
        raise ValueError("the identity needs n >= 2")
    f = p.fields()
    rim = boundary_circle(p)
    lhs = (n - 1) * integrate_hemisphere(f.H_ball * f.nu_dot_a * f.area_density, p.grid)
    rhs = (n - 1) * f.kappa_tan[-1] * rim.a_dot_nubar * rim.length
    return lhs - rhs


def umbilicity_deficit(surface: Surface) -> float:
    p = _profile(surface)
    f = p.fields()
    return float((p.grid.n - 1) * np.max((f.kappa_beta - f.kappa_tan) ** 2))


def bc_residual(surface: Surface) -> float:
    p = _profile(surface)
    return abs(p.boundary_slope - contact_cot(p.theta))


def sup_v(surface: Surface) -> float:
    p = _profile(surface)
    return float(np.max(np.sqrt(1.0 + p.ub**2)))


def energy_rate(surface: Surface) -> float:
    """Integral of H f over the surface: dE/dt along the flow when the rim condition holds."""
    p = _profile(surface)
    f = p.fields()
    return integrate_hemisphere(f.H_ball * f.speed(p.theta) * f.area_density, p.grid)


class FirstVariation(NamedTuple):
    dVol_fd: float
    dE_fd: float
    dE_formula: float
    h: float

    def consistent(self, dbeta: float) -> bool:
        tol = max(1e-3, 10.0 * dbeta**2)
        return (abs(self.dE_fd - self.dE_formula) <= tol * max(abs(self.dE_formula), 1e-12)
                and abs(self.dVol_fd) <= 10.0 * dbeta**2)


def first_variation_check(graph: RadialGraph, config) -> FirstVariation:
    """Finite-difference rates of volume and energy over one flow step."""
    from .flow.integrate import FlowState, step
    from .flow.rhs import fill_ghosts

    g0 = fill_ghosts(graph.copy(), config.boundary_slope)
    s1 = step(FlowState(g0), config)
    h = s1.graph.t - g0.t
    v0, v1 = enclosed_volume(g0), enclosed_volume(s1.graph)
    e0, e1 = energy(g0), energy(s1.graph)
    return FirstVariation((v1 - v0) / h, (e1 - e0) / h, energy_rate(g0), h)


@dataclass
class DiagnosticsRecord:
    t: float
    volume: float
    area: float
    wetting: float
    energy: float
    umbilicity: float
    bc_residual: float
    sup_v: float
    minkowski_residual: float
    prop21_residual: float
    prop22_residual: float

    CSV_FIELDS = ("t", "volume", "area", "wetting", "energy", "umbilicity", "bc_residual", "sup_v",
                  "minkowski_residual", "prop21_residual", "prop22_residual")

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def record(surface: Surface) -> DiagnosticsRecord:
    p = _profile(surface)
    area, wet = area_and_wetting(p)
    return DiagnosticsRecord(
        t=p.t,
        volume=enclosed_volume(p),
        area=area,
        wetting=wet,
        energy=area - contact_cos(p.theta) * wet,
        umbilicity=umbilicity_deficit(p),
        bc_residual=bc_residual(p),
        sup_v=sup_v(p),
        minkowski_residual=minkowski_residual(p),
        prop21_residual=prop21_residual(p),
        prop22_residual=prop22_residual(p),
    )
