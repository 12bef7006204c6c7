import math

import numpy as np
import pytest

from capflow.caps import cap_profile
from capflow.conformal import half_to_ball, meridian_point, pushforward
from capflow.geometry import (PoleError, RadialGraph, StarShapedError, ball_curvatures, check_star_shaped,
                              geometry_fields, half_space_curvatures, support_and_speed_terms)
from capflow.grid import build_grid


def graph_from(fn, n=2, M=64, theta=math.pi / 2):
    """Graph with ghosts from the analytic (even) extension of fn."""
    grid = build_grid(n, M)
    g = RadialGraph.from_nodes(grid, theta, fn(grid.beta))
    g.u_ext[:] = fn(grid.beta_ext)
    g.u_ext[0] = g.u_ext[2]
    return g


def wavy(b):
    return 0.1 + 0.08 * np.cos(2 * b) - 0.05 * np.cos(4 * b)


@pytest.mark.parametrize("n", [2, 3])
def test_flat_hemisphere_half_space(n):
    H, kb, kt = half_space_curvatures(graph_from(lambda b: 0 * b, n))
    assert np.allclose(H, n) and np.allclose(kb, 1) and np.allclose(kt, 1)


def test_scaled_hemisphere():
    c = 0.3
    H, kb, kt = half_space_curvatures(graph_from(lambda b: c + 0 * b, 3))
    assert np.allclose(H, 3 * math.exp(-c))
    assert np.allclose(kb, math.exp(-c)) and np.allclose(kt, math.exp(-c))


@pytest.mark.parametrize("theta", [math.pi / 3, 2 * math.pi / 3])
def test_cap_half_space_curvature_is_inverse_radius(theta):
    errs = []
    for M in (64, 128):
        cap = cap_profile(1.4, theta)
        _, kb, kt = half_space_curvatures(cap.graph(build_grid(2, M)))
        errs.append(max(np.abs(kb - 1 / 1.4).max(), np.abs(kt - 1 / 1.4).max()))
    assert errs[0] < 1e-3
    assert errs[0] / errs[1] > 3.5


def test_pole_requires_mirror_ghost():
    g = graph_from(wavy)
    g.u_ext[0] += 1e-3
    with pytest.raises(PoleError):
        g.derivatives()


def test_flat_disk_in_ball():
    H, kb, kt = ball_curvatures(graph_from(lambda b: 0 * b, 3))
    assert np.allclose(H, 0, atol=1e-14) and np.allclose(kb, 0, atol=1e-14) and np.allclose(kt, 0, atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_trace_identities(n):
    f = geometry_fields(graph_from(wavy, n))
    assert np.max(np.abs(f.H_ball - f.kappa_beta - (n - 1) * f.kappa_tan)) <= 1e-12
    assert np.max(np.abs(f.H_half - f.kappa_beta_half - (n - 1) * f.kappa_tan_half)) <= 1e-12


@pytest.mark.parametrize("R, theta", [(0.6, math.pi / 3), (1.0, 2 * math.pi / 3), (2.0, math.pi / 3)])
def test_cap_ball_curvature_constant(R, theta):
    cap = cap_profile(R, theta)
    f = geometry_fields(cap.graph(build_grid(2, 128)))
    assert np.max(np.abs(f.H_ball - cap.ball_mean_curvature(2))) < 1e-3
    assert np.max(np.abs(f.kappa_beta - f.kappa_tan)) < 1e-3


def test_support_terms_flat():
    xa, nua, Xanu = support_and_speed_terms(graph_from(lambda b: 0 * b))
    assert np.allclose(xa, 0.0)
    assert np.all(Xanu >= 0.5) and np.all(Xanu > 0)
    # the outward (upper) normal of the equatorial disk is E_{n+1}, so <nu, -E_{n+1}> = -1
    assert nua[-1] == pytest.approx(-1.0)


def ball_normals(g):
    """Ball unit normals from a finite-difference pushforward of the half-space normal."""
    beta = g.grid.beta
    ub, _ = g.derivatives()
    rho, v = g.rho, np.sqrt(1 + ub**2)
    Y = meridian_point(rho, beta, 3)
    e_rho = meridian_point(np.ones_like(rho), beta, 3)
    e_beta = np.stack([np.cos(beta), 0 * beta, -np.sin(beta)], axis=-1)
    image = pushforward(half_to_ball, Y, (e_rho - ub[:, None] * e_beta) / v[:, None])
    return image / np.linalg.norm(image, axis=-1, keepdims=True)


@pytest.mark.parametrize("fn", [wavy, cap_profile(0.8, math.pi / 3).u])
def test_nu_dot_a_matches_pushed_normal(fn):
    g = graph_from(fn)
    _, nua, _ = support_and_speed_terms(g)
    a = np.array([0.0, 0.0, -1.0])
    assert np.max(np.abs(ball_normals(g) @ a - nua)) < 1e-4


def test_x_dot_a_matches_mapped_points():
    g = graph_from(wavy)
    xa, _, _ = support_and_speed_terms(g)
    x = half_to_ball(meridian_point(g.rho, g.grid.beta, 3))
    assert np.allclose(xa, -x[:, -1], atol=1e-12)


def mapped_curve_curvature(fn, M):
    """kappa_beta by differencing ball images of profile points along the meridian."""
    grid = build_grid(2, M)
    b = grid.beta_ext
    X = half_to_ball(meridian_point(np.exp(fn(b)), b, 3))
    x, z = X[:, 0], X[:, 2]
    h = grid.dbeta
    x1, z1 = (x[2:] - x[:-2]) / (2 * h), (z[2:] - z[:-2]) / (2 * h)
    x2, z2 = (x[2:] - 2 * x[1:-1] + x[:-2]) / h**2, (z[2:] - 2 * z[1:-1] + z[:-2]) / h**2
    return (x1 * z2 - z1 * x2) / (x1**2 + z1**2) ** 1.5


@pytest.mark.parametrize("fn", [wavy, cap_profile(0.8, math.pi / 3).u])
def test_kappa_beta_matches_mapped_positions(fn):
    errs = []
    for M in (64, 128):
        g = graph_from(fn, 2, M)
        kb = ball_curvatures(g)[1]
        # the meridian is traversed away from the axis; its signed curvature has the opposite orientation
        errs.append(np.max(np.abs(kb - -mapped_curve_curvature(fn, M))[1:]))
    assert errs[0] < 1e-2
    assert errs[0] / errs[1] > 3.5


def test_star_shaped_monitor():
    g = graph_from(wavy)
    check_star_shaped(g)
    g.u_ext[5] = np.nan
    with pytest.raises(StarShapedError) as info:
        check_star_shaped(g)
    assert info.value.node == 4
