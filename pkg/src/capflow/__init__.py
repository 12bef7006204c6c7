"""Volume-preserving capillary mean-curvature-type flow in the unit ball."""

__version__ = "0.1.0"
