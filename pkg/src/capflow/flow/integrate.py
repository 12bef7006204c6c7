"""Classical RK4 method of lines with a parabolic time-step restriction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..geometry import RadialGraph, StarShapedError, check_star_shaped
from ..grid import contact_cos
from .config import FlowConfig
from .rhs import coefficient_rhs_kernel, diffusion_scale_kernel, fill_ghosts, fill_ghosts_kernel

DT_FLOOR = 1e-12

OK, NONFINITE, DT_UNDERFLOW = 0, 1, 2


class FlowAbort(RuntimeError):
    def __init__(self, reason: str, node: int | None = None, t: float | None = None):
        super().__init__(reason)
        self.reason = reason
        self.node = node
        self.t = t


@dataclass
class FlowState:
    graph: RadialGraph
    step_count: int = 0
    dt_last: float = 0.0

    @property
    def t(self) -> float:
        return self.graph.t


@njit(cache=True)
def advance_kernel(ue, cb, sb, n, cos_t, slope, h, cfl, t, t_end, max_steps, dt_floor):
    """Take up to max_steps RK4 steps without passing t_end.

    Returns (t, steps, dt_last, status, node).  On failure ue keeps the last
    accepted state.
    """
    m = ue.size - 2
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty_like(ue)
    steps = 0
    dt = 0.0
    while steps < max_steps and t < t_end:
        fill_ghosts_kernel(ue, h, slope)
        dt = cfl * h * h * diffusion_scale_kernel(ue, cb, h)
        if not (dt >= dt_floor):
            return t, steps, dt, DT_UNDERFLOW, -1
        if t + dt >= t_end:
            dt = t_end - t
        coefficient_rhs_kernel(ue, cb, sb, n, cos_t, h, k1)
        for j in range(m):
            tmp[j + 1] = ue[j + 1] + 0.5 * dt * k1[j]
        fill_ghosts_kernel(tmp, h, slope)
        coefficient_rhs_kernel(tmp, cb, sb, n, cos_t, h, k2)
        for j in range(m):
            tmp[j + 1] = ue[j + 1] + 0.5 * dt * k2[j]
        fill_ghosts_kernel(tmp, h, slope)
        coefficient_rhs_kernel(tmp, cb, sb, n, cos_t, h, k3)
        for j in range(m):
            tmp[j + 1] = ue[j + 1] + dt * k3[j]
        fill_ghosts_kernel(tmp, h, slope)
        coefficient_rhs_kernel(tmp, cb, sb, n, cos_t, h, k4)
        for j in range(m):
            val = ue[j + 1] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            if not np.isfinite(val):
                return t, steps, dt, NONFINITE, j
            tmp[j + 1] = val
        for j in range(m):
            ue[j + 1] = tmp[j + 1]
        t += dt
        steps += 1
    fill_ghosts_kernel(ue, h, slope)
    return t, steps, dt, OK, -1


def advance(state: FlowState, config: FlowConfig, max_steps: int, t_end: float = np.inf) -> FlowState:
    """Advance in place by up to max_steps steps, stopping exactly at t_end."""
    graph = state.graph
    grid = graph.grid
    fill_ghosts(graph, config.boundary_slope)
    t, steps, dt, status, node = advance_kernel(
        graph.u_ext, np.cos(grid.beta), np.sin(grid.beta), grid.n, contact_cos(graph.theta),
        config.boundary_slope, grid.dbeta, config.cfl, graph.t, t_end, int(max_steps), DT_FLOOR)
    graph.t = t
    state.step_count += steps
    if steps:
        state.dt_last = dt
    if status == NONFINITE:
        raise FlowAbort(f"non-finite u at node {node} near t={t:.6g}", node, t)
    if status == DT_UNDERFLOW:
        raise FlowAbort(f"time step {dt:.3g} fell below the floor {DT_FLOOR:g} at t={t:.6g}", None, t)
    try:
        check_star_shaped(graph)
    except StarShapedError as exc:
        raise FlowAbort(str(exc), exc.node, t) from exc
    return state


def step(state: FlowState, config: FlowConfig) -> FlowState:
    """One RK4 step; returns a new state and leaves the input untouched."""
    new = FlowState(state.graph.copy(), state.step_count, state.dt_last)
    return advance(new, config, 1)
