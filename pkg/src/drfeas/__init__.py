"""Douglas-Rachford projection methods for continuous and combinatorial feasibility."""

from pathlib import Path

from .core import (
    AmbiguousProjection,
    ConstraintSet,
    IterationTrace,
    StopReason,
    StopRule,
    averaged_dr_step,
    cyclic_dr_step,
    displacement_estimate,
    dr3_step,
    dr_step,
    fejer_check,
    reflect,
    run,
)
from .solver import SolveReport, SolverConfig, Variant

__version__ = "0.1.0"

DATA_DIR = Path(__file__).parent / "data"
