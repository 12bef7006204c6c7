import math

import pytest

from capflow.flow import FlowConfig, run

ANGLES = (math.pi / 3, math.pi / 2, 2 * math.pi / 3)
PERTURBED = {"kind": "perturbed-cap", "R": 1.0, "amplitude": 0.1, "mode": 2}


def perturbed_config(theta, M, **kw):
    return FlowConfig(n=kw.pop("n", 2), theta=theta, M=M, t_final=kw.pop("t_final", 5.0),
                      initial=dict(PERTURBED), **kw)


@pytest.fixture(scope="session")
def perturbed_runs():
    """Perturbed-cap runs (A=0.1, m=2, n=2, t_final=5) keyed by (theta, M), M in {128, 256}."""
    return {(theta, M): run(perturbed_config(theta, M)) for theta in ANGLES for M in (128, 256)}
