"""Right-hand side of the scalar capillary flow and its ghost-node closures.

The coefficient form is a compiled kernel shared with the time integrator;
the divergence form is written independently in flux form and serves as a
cross-check.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ..geometry import RadialGraph
from ..grid import contact_cos, contact_cot


def boundary_slope(theta: float) -> float:
    """u_beta at the rim for the axisymmetric capillary condition u_b = cos(theta) v."""
    return contact_cot(theta)


def pole_symmetry(graph: RadialGraph) -> RadialGraph:
    graph.u_ext[0] = graph.u_ext[2]
    return graph


def apply_boundary(graph: RadialGraph, slope: float | None = None) -> RadialGraph:
    """Set the rim ghost so the central difference at j = M equals the capillary slope."""
    if slope is None:
        slope = boundary_slope(graph.theta)
    M = graph.grid.M
    graph.u_ext[M + 2] = graph.u_ext[M] + 2.0 * graph.grid.dbeta * slope
    return graph


def fill_ghosts(graph: RadialGraph, slope: float | None = None) -> RadialGraph:
    return apply_boundary(pole_symmetry(graph), slope)


@njit(cache=True)
def fill_ghosts_kernel(ue, h, slope):
    m = ue.size
    ue[0] = ue[2]
    ue[m - 1] = ue[m - 3] + 2.0 * h * slope


@njit(cache=True)
def coefficient_rhs_kernel(ue, cb, sb, n, cos_t, h, out):
    """F at every node from an extended array whose ghosts are already set."""
    inv2h = 0.5 / h
    invh2 = 1.0 / (h * h)
    for j in range(out.size):
        u = ue[j + 1]
        ub = (ue[j + 2] - ue[j]) * inv2h
        ubb = (ue[j + 2] - 2.0 * u + ue[j]) * invh2
        rho = np.exp(u)
        v = np.sqrt(1.0 + ub * ub)
        c = cb[j]
        s = sb[j]
        ew = 2.0 / (rho * rho + 2.0 * rho * c + 1.0)
        if j == 0:
            cot_ub = ubb
        else:
            cot_ub = c / s * ub
        lap = ubb / (v * v) + (n - 1) * cot_ub
        val = lap / (rho * v * ew)
        val += n * s * ub / v
        val -= n * (rho * rho - 1.0) / (2.0 * rho) * ub * ub / v
        val -= n * cos_t / (2.0 * rho) * (rho * rho * c + 2.0 * rho + c)
        val += n * cos_t * (rho * rho - 1.0) / (2.0 * rho) * s * ub
        out[j] = val


@njit(cache=True)
def diffusion_scale_kernel(ue, cb, h):
    """min over nodes of rho v e^w, the inverse of the largest diffusion coefficient."""
    best = np.inf
    for j in range(ue.size - 2):
        ub = (ue[j + 2] - ue[j]) * (0.5 / h)
        rho = np.exp(ue[j + 1])
        val = rho * np.sqrt(1.0 + ub * ub) * 2.0 / (rho * rho + 2.0 * rho * cb[j] + 1.0)
        if val < best:
            best = val
    return best


def rhs_coefficient_form(graph: RadialGraph) -> np.ndarray:
    # validates ghosts through the shared stencil check
    graph.derivatives()
    grid = graph.grid
    out = np.empty(grid.M + 1)
    coefficient_rhs_kernel(graph.u_ext, np.cos(grid.beta), np.sin(grid.beta), grid.n,
                           contact_cos(graph.theta), grid.dbeta, out)
    return out


def rhs_divergence_form(graph: RadialGraph) -> np.ndarray:
    """F = div(grad u / (rho v e^w)) - (n+1)/v <grad u, grad 1/(rho e^w)> + capillary terms."""
    grid = graph.grid
    n, h = grid.n, grid.dbeta
    ue = graph.u_ext
    graph.derivatives()
    # fluxes at half nodes beta_{j+1/2}, j = -1..M
    beta_h = (np.arange(grid.M + 2) - 0.5) * h
    u_h = 0.5 * (ue[1:] + ue[:-1])
    ub_h = (ue[1:] - ue[:-1]) / h
    rho_h = np.exp(u_h)
    inv_rho_ew_h = (rho_h**2 + 2.0 * rho_h * np.cos(beta_h) + 1.0) / (2.0 * rho_h)
    flux = np.sin(beta_h) ** (n - 1) * ub_h * inv_rho_ew_h / np.sqrt(1.0 + ub_h**2)

    beta = grid.beta
    # finite-volume cells [beta_{j-1/2}, beta_{j+1/2}], the pole cell starting at 0
    edges = sin_power_antiderivative(n - 1, np.maximum(beta_h, 0.0))
    cell = edges[1:] - edges[:-1]
    flux[0] = 0.0
    div = (flux[1:] - flux[:-1]) / cell

    beta_e = grid.beta_ext
    rho_e = np.exp(ue)
    g = (rho_e**2 + 2.0 * rho_e * np.cos(beta_e) + 1.0) / (2.0 * rho_e)
    g_b = (g[2:] - g[:-2]) / (2.0 * h)
    ub = (ue[2:] - ue[:-2]) / (2.0 * h)
    v = np.sqrt(1.0 + ub**2)
    rho = rho_e[1:-1]
    ct = contact_cos(graph.theta)
    lower = -(n + 1) / v * ub * g_b
    cap = (0.5 * n * ct * (rho**2 - 1.0) / rho * np.sin(beta) * ub
           - 0.5 * n * ct * (rho**2 * np.cos(beta) + 2.0 * rho + np.cos(beta)) / rho)
    return div + lower + cap


def sin_power_antiderivative(k: int, x):
    """Integral of sin^k over [0, x], by the usual reduction formula."""
    x = np.asarray(x, dtype=float)
    if k == 0:
        return x.copy()
    if k == 1:
        return 1.0 - np.cos(x)
    return -np.sin(x) ** (k - 1) * np.cos(x) / k + (k - 1) / k * sin_power_antiderivative(k - 2, x)
