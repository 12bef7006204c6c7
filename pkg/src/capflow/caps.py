"""Static spherical caps and their radial profiles over the hemisphere.

In the half-space a cap is the sphere of radius R centred at -R cos(theta) on
the axis, so that it meets the boundary plane at angle theta.  Its preimage in
the ball is a sphere of radius r whose centre sits on the axis; the region
containing the south pole lies inside it for R < 1/(1 + cos theta) and outside
it for larger R.  ``signed_radius`` is +r and -r respectively, and the centre
height satisfies c^2 = s^2 + 2 s cos(theta) + 1 with c = -sign(s) |c|.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .conformal import half_to_ball
from .geometry import Profile, RadialGraph
from .grid import AxisymmetricGrid, ConfigurationError, build_grid, contact_cos

FIT_ANGLES = (0.2, 0.8, 1.4)


class CapError(ValueError):
    pass


def _circle_through(p1, p2, p3):
    """Centre and radius of the circle through three points; None if they are collinear."""
    (x1, y1), (x2, y2), (x3, y3) = p1, p2, p3
    A = np.array([[x2 - x1, y2 - y1], [x3 - x1, y3 - y1]]) * 2.0
    if abs(np.linalg.det(A)) <= 1e-13 * np.abs(A).max() ** 2:
        return None
    b = np.array([x2**2 - x1**2 + y2**2 - y1**2, x3**2 - x1**2 + y3**2 - y1**2])
    cx, cy = np.linalg.solve(A, b)
    return np.array([cx, cy]), float(np.hypot(x1 - cx, y1 - cy))


@dataclass(frozen=True)
class SphericalCap:
    R: float
    theta: float
    r: float
    center_height: float  # nan for a flat cap

    @property
    def is_flat(self) -> bool:
        """The ball image is a planar disk (R = 1/(1 + cos theta))."""
        return np.isinf(self.r)

    @property
    def signed_radius(self) -> float:
        if self.is_flat:
            return np.inf
        return self.r if self.center_height < 0 else -self.r

    def ball_mean_curvature(self, n: int) -> float:
        return n / self.signed_radius

    def psi(self, beta):
        c = contact_cos(self.theta)
        beta = np.asarray(beta, dtype=float)
        return self.R * (-c * np.cos(beta) + np.sqrt(1.0 - c**2 * np.sin(beta) ** 2))

    def u(self, beta):
        return np.log(self.psi(beta))

    def _psi_derivs(self, beta):
        c = contact_cos(self.theta)
        beta = np.asarray(beta, dtype=float)
        sb, cb = np.sin(beta), np.cos(beta)
        S = np.sqrt(1.0 - c**2 * sb**2)
        p = self.R * (-c * cb + S)
        p1 = self.R * (c * sb - c**2 * sb * cb / S)
        p2 = self.R * (c * cb - c**2 * (np.cos(2 * beta) / S + c**2 * sb**2 * cb**2 / S**3))
        return p, p1, p2

    def u_beta(self, beta):
        p, p1, _ = self._psi_derivs(beta)
        return p1 / p

    def u_betabeta(self, beta):
        p, p1, p2 = self._psi_derivs(beta)
        return p2 / p - (p1 / p) ** 2

    def graph(self, grid: AxisymmetricGrid, t: float = 0.0) -> RadialGraph:
        """Sampled profile whose ghosts come from the analytic extension."""
        g = RadialGraph.from_nodes(grid, self.theta, self.u(grid.beta), t)
        g.u_ext[:] = self.u(grid.beta_ext)
        g.u_ext[0] = g.u_ext[2]  # psi is even in beta; keep the mirror exact in floating point
        return g

    def profile(self, grid: AxisymmetricGrid) -> Profile:
        """Profile with exact derivatives at the nodes."""
        b = grid.beta
        return Profile(grid, self.theta, self.u(b), self.u_beta(b), self.u_betabeta(b),
                       float(self.u_beta(np.pi / 2)))

    def ball_points(self, beta) -> np.ndarray:
        """Meridian-plane (x_1, x_{n+1}) images of profile points."""
        beta = np.asarray(beta, dtype=float)
        rho = self.psi(beta)
        y = np.stack([rho * np.sin(beta), rho * np.cos(beta)], axis=-1)
        return half_to_ball(y)


def cap_profile(R: float, theta: float) -> SphericalCap:
    if not R > 0:
        raise ConfigurationError(f"cap radius R must be positive, got {R!r}")
    if not 0.0 < theta < np.pi:
        raise ConfigurationError(f"theta must lie in (0, pi), got {theta!r}")
    probe = SphericalCap(float(R), float(theta), np.nan, np.nan)
    beta = np.linspace(0.0, np.pi / 2, 65)
    if np.min(probe.psi(beta)) <= 0.0:
        raise CapError("cap profile is not positive")
    pts = probe.ball_points(np.array(FIT_ANGLES))
    fit = _circle_through(*pts)
    if fit is None:
        if np.ptp(pts[:, 1]) > 1e-10:
            raise CapError("mapped cap points are collinear but not orthogonal to the axis")
        return SphericalCap(float(R), float(theta), np.inf, np.nan)
    center, r = fit
    scale = max(1.0, abs(center[1]))
    if abs(center[0]) > 1e-10 * scale:
        raise CapError(f"fitted sphere centre {center} is off the axis")
    return SphericalCap(float(R), float(theta), r, float(center[1]))


def is_static(cap: SphericalCap, grid: AxisymmetricGrid) -> float:
    """Sup norm of the flow speed F on the sampled cap."""
    from .flow.rhs import rhs_coefficient_form

    return float(np.max(np.abs(rhs_coefficient_form(cap.graph(grid)))))


@lru_cache(maxsize=8)
def _volume_grid(n: int, M: int) -> AxisymmetricGrid:
    return build_grid(n, M)


def cap_volume(R: float, theta: float, n: int, M: int = 4096) -> float:
    from .diagnostics import enclosed_volume

    cap = cap_profile(R, theta)
    return enclosed_volume(cap.profile(_volume_grid(n, M)))


def cap_matching_volume(V: float, theta: float, n: int, M: int = 4096, rtol: float = 1e-10) -> SphericalCap:
    """Cap whose enclosed volume equals V, by bisection on log R."""
    from .diagnostics import ball_volume

    vmax = ball_volume(n)
    if not 0.0 < V < vmax:
        raise ConfigurationError(f"volume {V!r} outside the attainable range (0, {vmax:.6g})")

    def vol(logR):
        return cap_volume(float(np.exp(logR)), theta, n, M)

    lo, hi = -1.0, 1.0
    vlo, vhi = vol(lo), vol(hi)
    while vlo > V:
        hi, vhi = lo, vlo
        lo -= 2.0
        vlo = vol(lo)
    while vhi < V:
        lo, vlo = hi, vhi
        hi += 2.0
        vhi = vol(hi)
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        vmid = vol(mid)
        if not vlo <= vmid <= vhi:
            raise CapError("enclosed volume is not monotone in R")
        if abs(vmid - V) <= rtol * V or hi - lo < 1e-15:
            break
        if vmid < V:
            lo, vlo = mid, vmid
        else:
            hi, vhi = mid, vmid
    return cap_profile(float(np.exp(mid)), theta)
