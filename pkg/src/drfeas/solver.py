"""Configuration and report records shared by the puzzle solvers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DEFAULT_PROJ_SCHEDULE = frozenset({400, 800, 1600, 3200, 6400})


class Variant(str, enum.Enum):
    DR = "dr"
    DR_PROJ = "dr-proj"


@dataclass
class SolverConfig:
    """Budget and randomness for one solve.

    ``restarts`` counts re-initializations after the first attempt, so up to
    ``restarts + 1`` attempts of ``max_iter`` iterations each are made.
    """

    max_iter: int = 10_000
    restarts: int = 0
    variant: Variant = Variant.DR
    seed: int = 0
    proj_schedule: frozenset = DEFAULT_PROJ_SCHEDULE
    record_trace: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")
        self.variant = Variant(self.variant)
        self.proj_schedule = frozenset(self.proj_schedule)

    def rng(self, attempt: int) -> np.random.Generator:
        """Independent stream for each attempt, derived from the seed."""
        return np.random.default_rng([self.seed, attempt])


@dataclass
class SolveReport:
    solved: bool
    iterations: int
    restarts: int
    seconds: float
    total_iterations: int = 0
    solution: Optional[np.ndarray] = None
    # per-iteration shadows of the final attempt, kept only with record_trace
    shadows: list = field(default_factory=list, repr=False)

    def csv_row(self, name: str, timing: bool = True) -> str:
        secs = f"{self.seconds:.3f}" if timing else ""
        return f"{name},{int(self.solved)},{self.restarts},{self.iterations},{secs}"


CSV_HEADER = "instance,solved,restarts,iterations,seconds"
