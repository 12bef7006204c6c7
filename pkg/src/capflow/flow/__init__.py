from .config import FlowConfig, regime_threshold
from .rhs import (apply_boundary, fill_ghosts, pole_symmetry, rhs_coefficient_form,
                  rhs_divergence_form)
from .integrate import FlowAbort, FlowState, advance, step
from .driver import RunResult, Sample, initial_graph, run

__all__ = [
    "FlowAbort", "FlowConfig", "FlowState", "RunResult", "Sample", "advance", "initial_graph", "run", "apply_boundary", "fill_ghosts", "pole_symmetry",
    "regime_threshold", "rhs_coefficient_form", "rhs_divergence_form", "step",
]
