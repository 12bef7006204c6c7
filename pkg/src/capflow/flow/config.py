"""Run configuration for the capillary flow."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

from ..grid import ConfigurationError, contact_cos, contact_cot

INITIAL_KINDS = ("cap", "perturbed-cap", "table")


def regime_threshold(n: int) -> float:
    """Upper bound on |cos(theta)| under which gradient bounds are known: (3n+1)/(5n-1)."""
    return (3 * n + 1) / (5 * n - 1)


@dataclass
class FlowConfig:
    n: int = 2
    theta: float = math.pi / 2
    M: int = 64
    cfl: float = 0.2
    t_final: float = 5.0
    stop_deficit: float = 1e-6
    initial: dict[str, Any] = field(default_factory=lambda: {"kind": "cap", "R": 1.0})
    sample_every: int = 0  # steps between diagnostics; 0 picks ~400 samples over t_final

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"n: must be an integer >= 2, got {self.n!r}")
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 8:
            raise ConfigurationError(f"M: must be an integer >= 8, got {self.M!r}")
        self.n, self.M = int(self.n), int(self.M)
        if not (0.0 < self.theta < math.pi) or abs(math.cos(self.theta)) >= 1.0:
            raise ConfigurationError(f"theta: must lie in the open interval (0, pi), got {self.theta!r}")
        if not (0.0 < self.cfl <= 0.5):
            raise ConfigurationError(f"cfl: must lie in (0, 0.5], got {self.cfl!r}")
        if not (self.t_final > 0.0):
            raise ConfigurationError(f"t_final: must be positive, got {self.t_final!r}")
        if not (self.stop_deficit >= 0.0):
            raise ConfigurationError(f"stop_deficit: must be non-negative, got {self.stop_deficit!r}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 0:
            raise ConfigurationError(f"sample_every: must be a non-negative integer, got {self.sample_every!r}")
        self._validate_initial()

    def _validate_initial(self) -> None:
        init = self.initial
        if not isinstance(init, dict) or init.get("kind") not in INITIAL_KINDS:
            raise ConfigurationError(f"initial.kind: must be one of {INITIAL_KINDS}, got {init!r}")
        kind = init["kind"]
        if kind in ("cap", "perturbed-cap"):
            R = init.get("R", 1.0)
            if not (isinstance(R, (int, float)) and R > 0):
                raise ConfigurationError(f"initial.R: must be positive, got {R!r}")
        if kind == "perturbed-cap":
            A = init.get("amplitude", 0.1)
            m = init.get("mode", 2)
            if not (isinstance(A, (int, float)) and abs(A) <= 0.3):
                raise ConfigurationError(f"initial.amplitude: |A| must be <= 0.3, got {A!r}")
            if isinstance(m, bool) or not isinstance(m, int) or m < 1:
                raise ConfigurationError(f"initial.mode: must be a positive integer, got {m!r}")
        if kind == "table":
            beta, u = init.get("beta"), init.get("u")
            if not isinstance(beta, list) or not isinstance(u, list) or len(beta) != len(u) or len(u) < 2:
                raise ConfigurationError("initial.beta/initial.u: must be equal-length lists")

    @property
    def boundary_slope(self) -> float:
        """Rim value of u_beta imposed through the ghost node."""
        if not hasattr(self, "_slope"):
            sign = calibrate_slope_sign(self.theta)
            self._slope = sign * contact_cot(self.theta)
        return self._slope

    @property
    def regime_threshold(self) -> float:
        return regime_threshold(self.n)

    @property
    def in_gradient_regime(self) -> bool:
        return abs(contact_cos(self.theta)) < self.regime_threshold

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FlowConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"{sorted(unknown)[0]}: unknown configuration field")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc


def calibrate_slope_sign(theta: float) -> float:
    """Sign s with u_beta(pi/2) = s cot(theta), fixed by the analytic cap profile."""
    from ..caps import cap_profile

    cot = contact_cot(theta)
    if abs(cot) < 1e-14:
        return 1.0
    slope = cap_profile(1.0, theta).u_beta(math.pi / 2)
    return 1.0 if abs(slope - cot) <= abs(slope + cot) else -1.0
