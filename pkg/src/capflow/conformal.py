"""Conformal map between the unit ball and the upper half-space.

Points are arrays whose last axis holds the n+1 Cartesian coordinates; the
final coordinate is the symmetry axis.  The distinguished direction is
a = -E_{n+1} throughout.
"""
from __future__ import annotations

import numpy as np

SINGULAR_TOL = 1e-14


class SingularPointError(ValueError):
    """The north pole of the ball has no image in the half-space."""


def _ball_denominator(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    den = np.sum(x[..., :-1] ** 2, axis=-1) + (x[..., -1] - 1.0) ** 2
    if np.any(np.sqrt(den) < SINGULAR_TOL):
        raise SingularPointError("point coincides with the north pole (0, ..., 0, 1)")
    return den


def ball_to_half(x: np.ndarray) -> np.ndarray:
    """(x, x_{n+1}) -> (2x + (1 - |x~|^2) e_{n+1}) / (|x|^2 + (x_{n+1} - 1)^2)."""
    x = np.asarray(x, dtype=float)
    den = _ball_denominator(x)
    y = 2.0 * x
    y[..., -1] = 1.0 - np.sum(x * x, axis=-1)
    return y / den[..., None]


def half_to_ball(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    den = np.sum(y[..., :-1] ** 2, axis=-1) + (y[..., -1] + 1.0) ** 2
    x = 2.0 * y
    x[..., -1] = np.sum(y * y, axis=-1) - 1.0
    return x / den[..., None]


def conformal_factor(x: np.ndarray) -> np.ndarray:
    """Pullback factor of the flat half-space metric onto the ball."""
    return 4.0 / _ball_denominator(x) ** 2


def w_scalar(rho, beta):
    """w = log 2 - log(rho^2 + 2 rho cos(beta) + 1); e^{2w} scales the flat metric to the ball one."""
    rho = np.asarray(rho, dtype=float)
    return np.log(2.0) - np.log(rho**2 + 2.0 * rho * np.cos(beta) + 1.0)


def axis_vector(dim: int) -> np.ndarray:
    e = np.zeros(dim)
    e[-1] = 1.0
    return e


def X_a_field(x: np.ndarray) -> np.ndarray:
    """Conformal Killing field <x,a> x - (|x|^2 + 1) a / 2 with a = -E_{n+1}."""
    x = np.asarray(x, dtype=float)
    a = -axis_vector(x.shape[-1])
    xa = x @ a
    return xa[..., None] * x - 0.5 * (np.sum(x * x, axis=-1) + 1.0)[..., None] * a


def pushforward(fmap, x: np.ndarray, vec: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Directional derivative Df(x)[vec] by central differences."""
    x = np.asarray(x, dtype=float)
    vec = np.asarray(vec, dtype=float)
    return (fmap(x + h * vec) - fmap(x - h * vec)) / (2.0 * h)


def meridian_point(rho, beta, dim: int) -> np.ndarray:
    """Half-space point with polar coordinates (rho, beta) in the (y_1, y_{n+1}) plane."""
    rho = np.asarray(rho, dtype=float)
    beta = np.broadcast_to(np.asarray(beta, dtype=float), rho.shape)
    y = np.zeros(rho.shape + (dim,))
    y[..., 0] = rho * np.sin(beta)
    y[..., -1] = rho * np.cos(beta)
    return y
