import math

import numpy as np
import pytest

from capflow.caps import cap_matching_volume, cap_profile
from capflow.diagnostics import energy, enclosed_volume
from capflow.flow import (FlowAbort, FlowConfig, FlowState, advance, apply_boundary, fill_ghosts, initial_graph,
                          pole_symmetry, regime_threshold, rhs_coefficient_form, rhs_divergence_form, run, step)
from capflow.flow.config import calibrate_slope_sign
from capflow.flow.driver import blend_boundary_slope
from capflow.geometry import RadialGraph
from capflow.grid import ConfigurationError, build_grid, d1, d2

BOTH_FORMS = [rhs_coefficient_form, rhs_divergence_form]


def flat(theta, n=2, M=32, c=0.0):
    g = RadialGraph.from_nodes(build_grid(n, M), theta, np.full(M + 1, c))
    return fill_ghosts(g, FlowConfig(n=n, theta=theta).boundary_slope if theta != math.pi / 2 else 0.0)


def smooth(n, M, theta=1.1):
    grid = build_grid(n, M)
    g = RadialGraph.from_nodes(grid, theta, np.zeros(M + 1))
    b = grid.beta_ext
    g.u_ext[:] = 0.1 + 0.1 * np.cos(2 * b) - 0.04 * np.cos(4 * b)
    g.u_ext[0] = g.u_ext[2]
    return g


@pytest.mark.parametrize("form", BOTH_FORMS)
def test_static_hemisphere_is_exactly_zero(form):
    assert np.all(form(flat(math.pi / 2, 3)) == 0.0)


@pytest.mark.parametrize("form", BOTH_FORMS)
@pytest.mark.parametrize("c", [-0.4, 0.7])
def test_centred_hemispheres_are_static(form, c):
    assert np.max(np.abs(form(flat(math.pi / 2, 2, 32, c)))) < 1e-12


@pytest.mark.parametrize("form", BOTH_FORMS)
@pytest.mark.parametrize("n, theta", [(2, math.pi / 3), (3, 2 * math.pi / 3), (2, 1.0)])
def test_rim_value_for_flat_profile(form, n, theta):
    # u = 0 with a rim ghost for u_beta = 0 (not the capillary slope): every derivative term vanishes at the
    # rim node, leaving the zeroth-order capillary term -n cos(theta)
    g = RadialGraph.from_nodes(build_grid(n, 32), theta, np.zeros(33))
    fill_ghosts(g, 0.0)
    assert form(g)[-1] == pytest.approx(-n * math.cos(theta), abs=1e-12)


def test_two_forms_agree_to_second_order():
    errs = [np.max(np.abs(rhs_coefficient_form(smooth(3, M)) - rhs_divergence_form(smooth(3, M)))) for M in (64, 128)]
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_boundary_ghost_neumann_for_right_angle():
    g = RadialGraph.from_nodes(build_grid(2, 16), math.pi / 2, np.linspace(0, 1, 17) ** 2)
    apply_boundary(g)
    assert g.u_ext[-1] == g.u_ext[-3]


def test_boundary_slope_value():
    assert FlowConfig(theta=math.pi / 3).boundary_slope == pytest.approx(1 / math.sqrt(3))
    assert calibrate_slope_sign(math.pi / 3) == 1.0
    assert calibrate_slope_sign(2.5) == 1.0


def test_boundary_central_difference_equals_slope():
    g = RadialGraph.from_nodes(build_grid(2, 16), 1.0, np.sin(np.linspace(0, 1, 17)))
    fill_ghosts(g)
    assert d1(g.u_ext, g.grid)[-1] == pytest.approx(math.cos(1.0) / math.sin(1.0), rel=1e-12)


@pytest.mark.parametrize("theta", [math.pi / 3, 2 * math.pi / 3])
def test_cap_meets_discrete_condition_to_second_order(theta):
    res = []
    for M in (64, 128):
        g = cap_profile(1.0, theta).graph(build_grid(2, M))
        res.append(abs(g.profile().boundary_slope - math.cos(theta) / math.sin(theta)))
    assert res[0] / res[1] > 3.5


def test_pole_symmetry():
    grid = build_grid(2, 16)
    g = RadialGraph.from_nodes(grid, 1.0, np.cos(grid.beta))
    pole_symmetry(g)
    apply_boundary(g)
    assert g.u_ext[0] == math.cos(grid.dbeta)
    assert d1(g.u_ext, grid)[0] == 0.0


@pytest.mark.parametrize("n", [2, 3])
def test_pole_laplacian_limit(n):
    errs = []
    for M in (32, 64):
        grid = build_grid(n, M)
        g = pole_symmetry(RadialGraph.from_nodes(grid, 1.0, np.cos(grid.beta)))
        apply_boundary(g)
        errs.append(abs(n * d2(g.u_ext, grid)[0] + n))
    assert errs[0] < 1e-3 and errs[0] / errs[1] > 3.5


def test_step_keeps_flat_hemisphere():
    cfg = FlowConfig(theta=math.pi / 2, M=32)
    state = FlowState(initial_graph(FlowConfig(theta=math.pi / 2, M=32, initial={"kind": "cap", "R": 1.0})))
    new = step(state, cfg)
    assert np.all(new.graph.u == 0.0)
    assert new.step_count == 1 and new.graph.t > 0


def test_step_does_not_mutate_input():
    cfg = FlowConfig(theta=math.pi / 3, M=32, initial={"kind": "perturbed-cap", "R": 1.0, "amplitude": 0.1, "mode": 2})
    state = FlowState(initial_graph(cfg))
    before = state.graph.u_ext.copy()
    step(state, cfg)
    assert np.array_equal(state.graph.u_ext, before) and state.step_count == 0


def test_cap_is_a_fixed_point_to_second_order():
    drift = []
    for M in (32, 64):
        cfg = FlowConfig(theta=math.pi / 3, M=M, initial={"kind": "cap", "R": 1.0})
        g = initial_graph(cfg)
        u0 = g.u.copy()
        advance(FlowState(g), cfg, 10**7, t_end=1.0)
        drift.append(np.max(np.abs(g.u - u0)))
    assert drift[0] < 1e-2
    assert drift[0] / drift[1] > 3.5


def test_one_step_decreases_energy():
    cfg = FlowConfig(theta=math.pi / 3, M=64, initial={"kind": "perturbed-cap", "R": 1.0, "amplitude": 0.1, "mode": 2})
    state = FlowState(initial_graph(cfg))
    e0 = energy(state.graph)
    assert energy(step(state, cfg).graph) <= e0 + 1e-8 * abs(e0)


def test_nonfinite_state_aborts_with_node():
    cfg = FlowConfig(theta=math.pi / 2, M=16)
    g = initial_graph(cfg)
    g.u_ext[6] = np.inf
    with pytest.raises(FlowAbort) as info:
        advance(FlowState(g), cfg, 5)
    assert info.value.node is not None and info.value.t is not None


def test_blend_makes_discrete_rim_slope_exact():
    grid = build_grid(2, 32)
    u = 0.2 * np.cos(grid.beta) ** 2
    out = blend_boundary_slope(u, grid, 0.4)
    h, M = grid.dbeta, grid.M
    assert (3 * out[M] - 4 * out[M - 1] + out[M - 2]) / (2 * h) == pytest.approx(0.4, rel=1e-10)
    assert np.array_equal(out[: M - 2], u[: M - 2])


def test_table_initial_data():
    beta = np.linspace(0, math.pi / 2, 9)
    cfg = FlowConfig(M=32, theta=math.pi / 2, initial={"kind": "table", "beta": beta.tolist(), "u": (0.1 * np.cos(2 * beta)).tolist()})
    g = initial_graph(cfg)
    assert g.u[0] == pytest.approx(0.1)
    with pytest.raises(ConfigurationError):
        initial_graph(FlowConfig(M=32, initial={"kind": "table", "beta": [0.0, 1.0], "u": [0.0, 0.0]}))


def test_cap_run_converges_immediately():
    cfg = FlowConfig(theta=math.pi / 3, M=64, initial={"kind": "cap", "R": 1.0})
    result = run(cfg)
    assert result.reason == "converged"
    assert 2 <= len(result.records) <= 4
    u0 = cap_profile(1.0, math.pi / 3).u(build_grid(2, 64).beta)
    assert np.max(np.abs(result.state.graph.u - u0)) < 1e-3


def test_perturbed_cap_converges_to_volume_matched_cap():
    cfg = FlowConfig(theta=math.pi / 2, M=64, initial={"kind": "perturbed-cap", "R": 1.0, "amplitude": 0.1, "mode": 2})
    result = run(cfg)
    assert result.reason == "converged"
    v0 = result.records[0].volume
    cap = cap_matching_volume(v0, math.pi / 2, 2)
    assert enclosed_volume(cap.profile(build_grid(2, 64))) == pytest.approx(v0, rel=1e-3)
    assert result.final.volume == pytest.approx(v0, rel=1e-3)
    assert np.max(np.abs(result.state.graph.u - cap.u(build_grid(2, 64).beta))) < 1e-2


@pytest.mark.parametrize("theta", [0.0, math.pi, -0.1, 4.0])
def test_config_rejects_degenerate_angles(theta):
    with pytest.raises(ConfigurationError, match="theta"):
        FlowConfig(theta=theta)


@pytest.mark.parametrize("field, value", [("cfl", 0.0), ("cfl", 0.6), ("t_final", -1.0), ("M", 4), ("n", 1),
                                          ("stop_deficit", -1.0), ("sample_every", -2)])
def test_config_errors_name_the_field(field, value):
    with pytest.raises(ConfigurationError, match=field):
        FlowConfig(**{field: value})


def test_config_initial_validation():
    with pytest.raises(ConfigurationError, match="initial.amplitude"):
        FlowConfig(initial={"kind": "perturbed-cap", "R": 1.0, "amplitude": 0.5, "mode": 2})
    with pytest.raises(ConfigurationError, match="initial.kind"):
        FlowConfig(initial={"kind": "sphere"})


def test_config_round_trip_and_unknown_field():
    cfg = FlowConfig(n=3, theta=1.2, M=48)
    assert FlowConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigurationError, match="colour"):
        FlowConfig.from_dict({"colour": "red"})


def test_regime_threshold():
    assert regime_threshold(2) == pytest.approx(7 / 9)
    assert FlowConfig(n=2, theta=math.pi / 2).in_gradient_regime
    for n in (2, 3, 5, 10):
        assert FlowConfig(n=n, theta=math.pi / 2).in_gradient_regime
    assert not FlowConfig(n=2, theta=math.acos(0.8)).in_gradient_regime
