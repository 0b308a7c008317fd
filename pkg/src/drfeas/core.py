"""Douglas-Rachford operator algebra and the iteration driver.

Points are plain 1-D ``numpy`` float arrays.  A constraint set is any object
with a ``project(x)`` method returning a nearest point (see
:class:`ConstraintSet`); every scheme here is built from that one primitive
and the reflection ``2 P(x) - x``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "AmbiguousProjection",
    "ConstraintSet",
    "StopReason",
    "StopRule",
    "IterationTrace",
    "as_point",
    "reflect",
    "dr_step",
    "dr3_step",
    "cyclic_dr_step",
    "averaged_dr_step",
    "run",
    "displacement_estimate",
    "fejer_check",
]

DIVERGENCE_NORM = 1e12


class AmbiguousProjection(ValueError):
    """Raised when a projection is set-valued and no selection rule applies."""

    def __init__(self, msg="ambiguous projection"):
        super().__init__(msg)


class ConstraintSet:
    """Base class for projector oracles.

    Subclasses implement :meth:`project`.  ``is_convex`` is metadata only;
    nothing in the iteration logic branches on it.
    """

    is_convex = False
    dim: Optional[int] = None

    def project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = 1e-10) -> bool:
        x = as_point(x)
        return bool(np.linalg.norm(self.project(x) - x) <= tol)

    def __call__(self, x):
        return self.project(x)


def as_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    return x


def _check_dim(S, x):
    d = getattr(S, "dim", None)
    if d is not None and x.shape[0] != d:
        raise ValueError(f"dimension mismatch: point has {x.shape[0]}, set has {d}")


def reflect(S: ConstraintSet, x) -> np.ndarray:
    """Reflection ``2 P_S(x) - x``."""
    x = as_point(x)
    _check_dim(S, x)
    return 2.0 * S.project(x) - x


def dr_step(A: ConstraintSet, B: ConstraintSet, x) -> np.ndarray:
    """One application of ``T_{A,B} = (I + R_B R_A) / 2``."""
    x = as_point(x)
    return 0.5 * (x + reflect(B, reflect(A, x)))


def dr3_step(A: ConstraintSet, B: ConstraintSet, C: ConstraintSet, x) -> np.ndarray:
    """The naive three-set operator ``(I + R_C R_B R_A) / 2``.

    Kept to reproduce its failure mode: fixed points of this map need not
    shadow onto the intersection.
    """
    x = as_point(x)
    return 0.5 * (x + reflect(C, reflect(B, reflect(A, x))))


def _require_pairs(sets):
    if len(sets) < 2:
        raise ValueError("need at least two sets")


def cyclic_dr_step(sets: Sequence[ConstraintSet], x) -> np.ndarray:
    """Cyclic composition ``T_{C_N,C_1} ... T_{C_2,C_3} T_{C_1,C_2}``."""
    _require_pairs(sets)
    x = as_point(x)
    N = len(sets)
    for i in range(N):
        x = dr_step(sets[i], sets[(i + 1) % N], x)
    return x


def averaged_dr_step(sets: Sequence[ConstraintSet], x) -> np.ndarray:
    """Mean of the N cyclically paired two-set operators evaluated at ``x``."""
    _require_pairs(sets)
    x = as_point(x)
    N = len(sets)
    total = np.zeros_like(x)
    for i in range(N):
        total += dr_step(sets[i], sets[(i + 1) % N], x)
    return total / N


class StopReason(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    CYCLE_DETECTED = "cycle_detected"


@dataclass
class StopRule:
    """Stopping parameters for :func:`run`.

    ``predicate(trace, x_next)`` may end the run early (recorded as
    converged).  ``cycle_period`` > 0 enables detection of exact returns to
    one of the last ``cycle_period`` iterates other than the previous one.
    """

    max_iter: int = 10_000
    tol: float = 1e-12
    predicate: Optional[Callable[["IterationTrace", np.ndarray], bool]] = None
    cycle_period: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass
class IterationTrace:
    """Record of a run.

    ``iterates[0]`` is the starting point, so after ``iterations`` steps
    there are ``iterations + 1`` iterates and shadows and ``iterations``
    step norms.
    """

    iterates: list = field(default_factory=list)
    shadows: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    iterations: int = 0
    stop_reason: StopReason = StopReason.MAX_ITER
    diverged: bool = False

    @property
    def last(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def shadow(self) -> np.ndarray:
        return self.shadows[-1]


def _safe_shadow(S, x):
    if S is None:
        return x.copy()
    try:
        return S.project(x)
    except AmbiguousProjection:
        return np.full_like(x, np.nan)


def run(
    step: Callable[[np.ndarray], np.ndarray],
    x0,
    rule: Optional[StopRule] = None,
    shadow_set: Optional[ConstraintSet] = None,
) -> IterationTrace:
    """Iterate ``x_{n+1} = step(x_n)`` and record iterates and shadows.

    Stops when the custom predicate fires, when the step norm drops to
    ``rule.tol`` or below, when a cycle is detected, or after
    ``rule.max_iter`` steps.  A non-finite iterate or one with norm above
    1e12 ends the run with ``stop_reason = max_iter`` and ``diverged=True``.
    """
    rule = rule or StopRule()
    x = as_point(x0).copy()
    trace = IterationTrace(iterates=[x], shadows=[_safe_shadow(shadow_set, x)])
    for n in range(rule.max_iter):
        x_next = as_point(step(x))
        if not np.all(np.isfinite(x_next)) or np.linalg.norm(x_next) > DIVERGENCE_NORM:
            trace.stop_reason = StopReason.MAX_ITER
            trace.diverged = True
            break
        step_norm = float(np.linalg.norm(x_next - x))
        trace.iterates.append(x_next)
        trace.shadows.append(_safe_shadow(shadow_set, x_next))
        trace.step_norms.append(step_norm)
        trace.iterations = n + 1
        x = x_next
        if rule.predicate is not None and rule.predicate(trace, x_next):
            trace.stop_reason = StopReason.CONVERGED
            break
        if step_norm <= rule.tol:
            trace.stop_reason = StopReason.CONVERGED
            break
        if rule.cycle_period > 0:
            back = trace.iterates[-rule.cycle_period - 1 : -2]
            if any(np.linalg.norm(x_next - y) <= max(rule.tol, 1e-12) for y in back):
                trace.stop_reason = StopReason.CYCLE_DETECTED
                break
    else:
        trace.stop_reason = StopReason.MAX_ITER
    return trace


def displacement_estimate(trace: IterationTrace, n: int) -> float:
    """``||x_n|| / n``, which tends to the gap ``d(A, B)`` for convex pairs."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > trace.iterations:
        raise ValueError(f"trace has only {trace.iterations} iterations")
    return float(np.linalg.norm(trace.iterates[n]) / n)


def fejer_check(trace: IterationTrace, c, slack: float = 1e-12) -> bool:
    """True iff distances from the iterates to ``c`` never increase (up to ``slack``)."""
    c = as_point(c)
    if trace.iterates and trace.iterates[0].shape != c.shape:
        raise ValueError("dimension mismatch")
    d = [np.linalg.norm(x - c) for x in trace.iterates]
    return all(b <= a + slack for a, b in zip(d, d[1:]))
