"""Uniform node-centred grid on the polar angle of the upper hemisphere.

Axisymmetric functions on S^n_+ are sampled at beta_j = j * dbeta, j = 0..M,
with one ghost slot beyond each end.  Extended arrays therefore have length
M + 3 and index ``k = j + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi, sin

import numpy as np


class ConfigurationError(ValueError):
    """Raised for invalid discretisation or flow parameters."""


class GhostError(ValueError):
    """Raised when a stencil needs a ghost slot that was never populated."""


def contact_cos(theta: float) -> float:
    """cos(theta) computed as sin(pi/2 - theta): exactly 0 for theta = pi/2 in floating point."""
    return sin(pi / 2 - theta)


def contact_cot(theta: float) -> float:
    return contact_cos(theta) / sin(theta)


def sphere_measure(k: int) -> float:
    """Total measure of the unit k-sphere S^k."""
    return 2.0 * pi ** ((k + 1) / 2.0) / gamma((k + 1) / 2.0)


@dataclass(frozen=True)
class AxisymmetricGrid:
    n: int
    M: int
    beta: np.ndarray = field(repr=False)
    dbeta: float
    quad_weights: np.ndarray = field(repr=False)
    omega: float  # |S^{n-1}|

    @property
    def beta_ext(self) -> np.ndarray:
        """Angles including the two ghost slots."""
        return np.concatenate(([-self.dbeta], self.beta, [self.beta[-1] + self.dbeta]))

    def empty_ext(self) -> np.ndarray:
        out = np.full(self.M + 3, np.nan)
        return out


GREGORY_END = (3 / 8, 7 / 6, 23 / 24)


def gregory_weights(M: int, h: float) -> np.ndarray:
    """Trapezoid weights with Gregory end corrections (fourth order on smooth integrands)."""
    w = np.full(M + 1, h)
    for k, c in enumerate(GREGORY_END):
        w[k] = w[M - k] = c * h
    return w


def build_grid(n: int, M: int) -> AxisymmetricGrid:
    if int(n) != n or n < 2:
        raise ConfigurationError(f"n must be an integer >= 2, got {n!r}")
    if int(M) != M or M < 8:
        raise ConfigurationError(f"M must be an integer >= 8, got {M!r}")
    n, M = int(n), int(M)
    dbeta = (pi / 2) / M
    beta = np.arange(M + 1) * dbeta
    beta[-1] = pi / 2
    weights = gregory_weights(M, dbeta) * np.sin(beta) ** (n - 1)
    weights.setflags(write=False)
    beta.setflags(write=False)
    return AxisymmetricGrid(n=n, M=M, beta=beta, dbeta=dbeta,
                            quad_weights=weights, omega=sphere_measure(n - 1))


def _check_ext(values: np.ndarray, grid: AxisymmetricGrid) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.M + 3,):
        raise ValueError(f"expected {grid.M + 3} values (nodes plus two ghosts), got {values.shape}")
    if not (np.isfinite(values[0]) and np.isfinite(values[-1])):
        raise GhostError("ghost slots are unpopulated; apply pole symmetry and the boundary condition first")
    return values


def d1(values: np.ndarray, grid: AxisymmetricGrid) -> np.ndarray:
    """Central first derivative at nodes 0..M from an extended array."""
    f = _check_ext(values, grid)
    return (f[2:] - f[:-2]) / (2.0 * grid.dbeta)


def d2(values: np.ndarray, grid: AxisymmetricGrid) -> np.ndarray:
    """Central second derivative at nodes 0..M from an extended array."""
    f = _check_ext(values, grid)
    return (f[2:] - 2.0 * f[1:-1] + f[:-2]) / grid.dbeta**2


def integrate_hemisphere(values: np.ndarray, grid: AxisymmetricGrid) -> float:
    """Approximate the integral of an axisymmetric function over S^n_+."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.M + 1,):
        raise ValueError(f"expected {grid.M + 1} nodal values, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite integrand")
    return float(grid.omega * np.dot(grid.quad_weights, values))
