"""Run the flow from a configuration to convergence, exhaustion or abort."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..caps import cap_profile
from ..diagnostics import DiagnosticsRecord, record
from ..geometry import RadialGraph, check_star_shaped, StarShapedError
from ..grid import AxisymmetricGrid, ConfigurationError, build_grid
from .config import FlowConfig
from .integrate import FlowAbort, FlowState, advance
from .rhs import diffusion_scale_kernel, fill_ghosts

TARGET_SAMPLES = 400
BLEND_NODES = 3


@dataclass
class Sample:
    t: float
    u: np.ndarray


@dataclass
class RunResult:
    config: FlowConfig
    samples: list[Sample]
    records: list[DiagnosticsRecord]
    reason: str
    state: FlowState
    abort: FlowAbort | None = None
    sample_every: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.reason == "converged"

    @property
    def final(self) -> DiagnosticsRecord:
        return self.records[-1]


def blend_boundary_slope(u: np.ndarray, grid: AxisymmetricGrid, slope: float) -> np.ndarray:
    """Add a quadratic boundary layer on the last nodes so the one-sided rim slope equals `slope`.

    The correction c (beta - beta_{M-3})^2 vanishes with its derivative at
    beta_{M-3}, so the interior is untouched, and its one-sided three-point
    difference at the rim is exact.
    """
    h, M = grid.dbeta, grid.M
    discrete = (3.0 * u[M] - 4.0 * u[M - 1] + u[M - 2]) / (2.0 * h)
    defect = slope - discrete
    start = M - BLEND_NODES
    s = grid.beta[start:] - grid.beta[start]
    out = np.array(u, dtype=float)
    out[start:] += defect * s**2 / (2.0 * (grid.beta[M] - grid.beta[start]))
    return out


def initial_graph(config: FlowConfig, grid: AxisymmetricGrid | None = None) -> RadialGraph:
    """Build the t = 0 radial graph described by config.initial."""
    grid = grid or build_grid(config.n, config.M)
    init = config.initial
    kind = init["kind"]
    beta = grid.beta
    if kind == "cap":
        u = cap_profile(float(init.get("R", 1.0)), config.theta).u(beta)
    elif kind == "perturbed-cap":
        cap = cap_profile(float(init.get("R", 1.0)), config.theta)
        A, m = float(init.get("amplitude", 0.1)), int(init.get("mode", 2))
        u = blend_boundary_slope(cap.u(beta) + A * np.cos(2 * m * beta), grid, config.boundary_slope)
    else:
        tb = np.asarray(init["beta"], dtype=float)
        tu = np.asarray(init["u"], dtype=float)
        if not (np.all(np.isfinite(tb)) and np.all(np.isfinite(tu))):
            raise ConfigurationError("initial.u: table entries must be finite")
        if np.any(np.diff(tb) <= 0) or tb[0] > 1e-12 or tb[-1] < math.pi / 2 - 1e-12:
            raise ConfigurationError("initial.beta: must increase strictly and cover [0, pi/2]")
        u = blend_boundary_slope(np.interp(beta, tb, tu), grid, config.boundary_slope)
    graph = RadialGraph.from_nodes(grid, config.theta, u)
    fill_ghosts(graph, config.boundary_slope)
    return graph


def _auto_cadence(graph: RadialGraph, config: FlowConfig) -> int:
    """Steps per sample giving roughly TARGET_SAMPLES records over t_final."""
    grid = graph.grid
    dt = config.cfl * grid.dbeta**2 * diffusion_scale_kernel(graph.u_ext, np.cos(grid.beta), grid.dbeta)
    return max(1, math.ceil(config.t_final / dt / TARGET_SAMPLES))


def run(config: FlowConfig, max_samples: int | None = None) -> RunResult:
    """Step until t_final or until the umbilicity deficit drops below stop_deficit.

    A record is taken at t = 0, every `sample_every` steps and at termination.
    Convergence is only tested after the first step, so even a static start
    produces at least two records.
    """
    config.validate()
    graph = initial_graph(config)
    try:
        check_star_shaped(graph)
    except StarShapedError as exc:
        raise ConfigurationError(f"initial: profile is not star-shaped ({exc})") from exc
    state = FlowState(graph)
    every = config.sample_every or _auto_cadence(graph, config)
    samples = [Sample(0.0, graph.u.copy())]
    records = [record(graph)]
    reason, abort = "time_exhausted", None
    while True:
        try:
            advance(state, config, every, t_end=config.t_final)
        except FlowAbort as exc:
            abort = exc
            reason = f"aborted({exc.reason})"
        samples.append(Sample(graph.t, graph.u.copy()))
        records.append(record(graph))
        if abort is not None:
            break
        if records[-1].umbilicity < config.stop_deficit:
            reason = "converged"
            break
        if graph.t >= config.t_final:
            break
        if max_samples is not None and len(records) >= max_samples:
            break
    return RunResult(config, samples, records, reason, state, abort, every)
