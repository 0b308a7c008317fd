"""Sudoku as a feasibility problem.

Two models are provided.  The zero-one model encodes a grid as an
``n x n x n`` cube ``B[i, j, k] = 1`` iff cell ``(i, j)`` holds digit
``k + 1`` and asks for a cube in five sets: row fibers ``B[i, :, k]``,
column fibers ``B[:, j, k]``, box fibers and cell fibers ``B[i, j, :]`` must
each be a standard basis vector, and the givens must be 1.  The integer
model works on the ``n x n`` grid directly, with rows, columns and boxes
constrained to be permutations of ``1..n``.  Both are solved by DR between
the product of the constraint sets and the diagonal.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .sets import project_basis_along, project_permutations_along
from .solver import SolveReport, SolverConfig, Variant

__all__ = [
    "GridParseError",
    "PuzzleGrid",
    "SudokuCube",
    "parse_grid",
    "load_grid",
    "format_grid",
    "encode_binary",
    "decode_binary",
    "project_c1",
    "project_c2",
    "project_c3",
    "project_c4",
    "project_c5",
    "in_binary_sets",
    "solve_binary",
    "solve_integer",
    "verify",
    "distance_trace",
    "SolverConfig",
    "SolveReport",
    "Variant",
]


class GridParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# grids


@dataclass
class PuzzleGrid:
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError("grid must be square")
        n = cells.shape[0]
        box = math.isqrt(n)
        if box * box != n:
            raise ValueError(f"side {n} is not a perfect square")
        if np.any(cells < 0) or np.any(cells > n):
            raise ValueError(f"cell values must lie in 0..{n}")
        self.cells = cells.astype(int)
        dup = _first_duplicate(self.cells)
        if dup is not None:
            raise ValueError(f"inconsistent givens: {dup}")

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    @property
    def box(self) -> int:
        return math.isqrt(self.n)

    @property
    def givens(self) -> int:
        return int(np.count_nonzero(self.cells))

    def is_complete(self) -> bool:
        return self.givens == self.n * self.n


def _units(n):
    box = math.isqrt(n)
    for i in range(n):
        yield f"row {i + 1}", (np.full(n, i), np.arange(n))
    for j in range(n):
        yield f"column {j + 1}", (np.arange(n), np.full(n, j))
    for b in range(n):
        r0, c0 = box * (b // box), box * (b % box)
        rr, cc = np.meshgrid(np.arange(r0, r0 + box), np.arange(c0, c0 + box), indexing="ij")
        yield f"box {b + 1}", (rr.ravel(), cc.ravel())


def _first_duplicate(cells):
    for name, idx in _units(cells.shape[0]):
        vals = cells[idx]
        vals = vals[vals > 0]
        if vals.size != np.unique(vals).size:
            return f"repeated digit in {name}"
    return None


def parse_grid(text: str) -> PuzzleGrid:
    """Parse either an 81-character line or ``n`` lines of ``n`` integers.

    In the single-line form '0' and '.' are blanks.  Errors name the
    offending line.
    """
    lines = [ln.strip() for ln in text.strip().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GridParseError("empty puzzle")
    if len(lines) == 1 and len(lines[0]) == 81 and " " not in lines[0]:
        s = lines[0]
        bad = [c for c in s if c not in "0123456789."]
        if bad:
            raise GridParseError(f"line 1: unexpected character {bad[0]!r}")
        cells = np.array([0 if c == "." else int(c) for c in s]).reshape(9, 9)
    else:
        rows = []
        for no, ln in enumerate(lines, 1):
            try:
                rows.append([int(tok) for tok in ln.replace(",", " ").split()])
            except ValueError:
                raise GridParseError(f"line {no}: non-integer entry in {ln!r}") from None
        n = len(rows)
        for no, r in enumerate(rows, 1):
            if len(r) != n:
                raise GridParseError(f"line {no}: expected {n} entries, found {len(r)}")
        cells = np.array(rows)
    try:
        return PuzzleGrid(cells)
    except ValueError as e:
        raise GridParseError(str(e)) from None


def load_grid(path) -> PuzzleGrid:
    return parse_grid(Path(path).read_text())


def format_grid(cells) -> str:
    cells = np.asarray(cells)
    n = cells.shape[0]
    if n == 9:
        return "\n".join("".join(str(v) if v else "." for v in row) for row in cells)
    w = len(str(n))
    return "\n".join(" ".join(f"{v:>{w}d}" for v in row) for row in cells)


def verify(grid, puzzle=None) -> bool:
    """Independent check that ``grid`` is a completed Sudoku honoring ``puzzle``."""
    cells = np.asarray(grid.cells if isinstance(grid, PuzzleGrid) else grid)
    if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
        return False
    n = cells.shape[0]
    if math.isqrt(n) ** 2 != n:
        return False
    target = list(range(1, n + 1))
    for _, idx in _units(n):
        if sorted(cells[idx].tolist()) != target:
            return False
    if puzzle is not None:
        given = np.asarray(puzzle.cells if isinstance(puzzle, PuzzleGrid) else puzzle)
        mask = given > 0
        if given.shape != cells.shape or np.any(cells[mask] != given[mask]):
            return False
    return True


# ---------------------------------------------------------------------------
# zero-one model


@dataclass
class SudokuCube:
    values: np.ndarray
    mask: np.ndarray  # True at given triples (i, j, digit-1)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def encode_binary(g: PuzzleGrid) -> SudokuCube:
    n = g.n
    i, j = np.nonzero(g.cells)
    mask = np.zeros((n, n, n), dtype=bool)
    mask[i, j, g.cells[i, j] - 1] = True
    return SudokuCube(values=mask.astype(float), mask=mask)


def decode_binary(B) -> np.ndarray:
    """Digit grid from a cube; each cell takes the digit of its largest entry."""
    B = B.values if isinstance(B, SudokuCube) else np.asarray(B)
    return np.argmax(B, axis=2) + 1


def _to_boxes(B):
    # (n, n, n) -> (box-row, box-col, digit, box*box), box fiber vectorized by columns
    n = B.shape[0]
    b = math.isqrt(n)
    T = B.reshape(b, b, b, b, n)  # (bi, r, bj, c, k)
    return T.transpose(0, 2, 4, 3, 1).reshape(b, b, n, n)


def _from_boxes(F):
    b = F.shape[0]
    n = b * b
    T = F.reshape(b, b, n, b, b)  # (bi, bj, k, c, r)
    return T.transpose(0, 4, 1, 3, 2).reshape(n, n, n)


def project_c1(B):
    """Row fibers ``B[i, :, k]`` to basis vectors."""
    return project_basis_along(B, axis=1)


def project_c2(B):
    """Column fibers ``B[:, j, k]`` to basis vectors."""
    return project_basis_along(B, axis=0)


def project_c3(B):
    """Vectorized box fibers to basis vectors."""
    return _from_boxes(project_basis_along(_to_boxes(np.asarray(B, dtype=float)), axis=-1))


def project_c4(B, mask):
    """Set the given entries to 1; leave everything else."""
    out = np.array(B, dtype=float, copy=True)
    out[mask] = 1.0
    return out


def project_c5(B):
    """Cell fibers ``B[i, j, :]`` to basis vectors."""
    return project_basis_along(B, axis=2)


def _fibers_ok(B, axis):
    return bool(np.all(B.sum(axis=axis) == 1))


def in_binary_sets(B, mask) -> bool:
    """Exact membership of a cube in all five zero-one sets."""
    B = np.asarray(B)
    if not np.all((B == 0) | (B == 1)):
        return False
    if not np.all(B[mask] == 1):
        return False
    return (
        _fibers_ok(B, 0)
        and _fibers_ok(B, 1)
        and _fibers_ok(B, 2)
        and _fibers_ok(_to_boxes(B), -1)
    )


def _round(P):
    # nearest integer, halves rounded up
    return np.floor(P + 0.5)


def _binary_step(X, mask):
    p = X.mean(axis=0)
    r = 2.0 * p - X
    q = np.empty_like(X)
    q[0] = project_c1(r[0])
    q[1] = project_c2(r[1])
    q[2] = project_c3(r[2])
    q[3] = project_c4(r[3], mask)
    q[4] = project_c5(r[4])
    return X + q - p


def _integer_sets(n):
    values = np.arange(1, n + 1, dtype=float)

    def rows(A):
        return project_permutations_along(A, values, axis=1)

    def cols(A):
        return project_permutations_along(A, values, axis=0)

    def boxes(A):
        b = math.isqrt(n)
        T = A.reshape(b, b, b, b).transpose(0, 2, 3, 1).reshape(b, b, n)
        P = project_permutations_along(T, values, axis=-1)
        return P.reshape(b, b, b, b).transpose(0, 3, 1, 2).reshape(n, n)

    return rows, cols, boxes


def _integer_step(X, g_cells, sets):
    rows, cols, boxes = sets
    p = X.mean(axis=0)
    r = 2.0 * p - X
    q = np.empty_like(X)
    q[0] = rows(r[0])
    q[1] = cols(r[1])
    q[2] = boxes(r[2])
    given = g_cells > 0
    q[3] = np.where(given, g_cells, r[3])
    return X + q - p


def _drive(x_init, step, accept, cfg: SolverConfig, shadow_record):
    """Shared DR loop over product-space iterates; returns (solved, n, shadow, trace)."""
    X = x_init
    trace = []
    P = X.mean(axis=0)
    if cfg.record_trace:
        trace.append(shadow_record(P))
    if accept(P):
        return True, 0, P, trace
    for n in range(cfg.max_iter):
        X = step(X)
        if cfg.variant is Variant.DR_PROJ and n in cfg.proj_schedule:
            X = np.broadcast_to(X.mean(axis=0), X.shape).copy()
        P = X.mean(axis=0)
        if cfg.record_trace:
            trace.append(shadow_record(P))
        if accept(P):
            return True, n + 1, P, trace
    return False, cfg.max_iter, P, trace


def solve_binary(g: PuzzleGrid, cfg: Optional[SolverConfig] = None, y0=None) -> SolveReport:
    """Product-space DR on the zero-one model.

    Each attempt starts from ``(y, y, y, y, y)`` with ``y`` uniform on
    ``[0, 1]^(n x n x n)`` (or ``y0`` for the first attempt) and iterates
    ``T_{D,C}``; it stops as soon as the entrywise rounding of the diagonal
    shadow lies in all five sets.  The ``dr-proj`` variant additionally
    replaces the iterate by its diagonal projection at the scheduled
    iteration indices.
    """
    cfg = cfg or SolverConfig()
    if not isinstance(g, PuzzleGrid):
        g = PuzzleGrid(g)
    t0 = time.perf_counter()
    n = g.n
    if g.is_complete():
        return SolveReport(True, 0, 0, time.perf_counter() - t0, 0, g.cells.copy())
    cube = encode_binary(g)
    mask = cube.mask

    def accept(P):
        return in_binary_sets(_round(P), mask)

    total = 0
    for attempt in range(cfg.restarts + 1):
        if attempt == 0 and y0 is not None:
            y = np.asarray(y0, dtype=float).reshape(n, n, n)
        else:
            y = cfg.rng(attempt).random((n, n, n))
        X = np.broadcast_to(y, (5, n, n, n)).copy()
        solved, it, P, trace = _drive(
            X, lambda X: _binary_step(X, mask), accept, cfg, lambda P: P.copy()
        )
        total += it
        if solved:
            sol = decode_binary(_round(P))
            return SolveReport(True, it, attempt, time.perf_counter() - t0, total, sol, trace)
    return SolveReport(False, it, cfg.restarts, time.perf_counter() - t0, total, None, trace)


def solve_integer(g: PuzzleGrid, cfg: Optional[SolverConfig] = None) -> SolveReport:
    """Product-space DR on the integer model (rows/columns/boxes as permutations).

    Starts from ``(y, y, y, y)`` with ``y`` uniform on ``[1, n]`` per cell.
    This model is known to work on 4x4 boards and to be largely ineffective
    on 9x9 ones.
    """
    cfg = cfg or SolverConfig()
    if not isinstance(g, PuzzleGrid):
        g = PuzzleGrid(g)
    t0 = time.perf_counter()
    n = g.n
    if g.is_complete():
        return SolveReport(True, 0, 0, time.perf_counter() - t0, 0, g.cells.copy())
    sets = _integer_sets(n)
    cells = g.cells.astype(float)

    def accept(P):
        R = _round(P)
        if np.any(R < 1) or np.any(R > n):
            return False
        return verify(R.astype(int), g)

    total = 0
    for attempt in range(cfg.restarts + 1):
        y = 1.0 + (n - 1) * cfg.rng(attempt).random((n, n))
        X = np.broadcast_to(y, (4, n, n)).copy()
        solved, it, P, trace = _drive(
            X, lambda X: _integer_step(X, cells, sets), accept, cfg, lambda P: P.copy()
        )
        total += it
        if solved:
            sol = _round(P).astype(int)
            return SolveReport(True, it, attempt, time.perf_counter() - t0, total, sol, trace)
    return SolveReport(False, it, cfg.restarts, time.perf_counter() - t0, total, None, trace)


def distance_trace(report: SolveReport, known_solution) -> np.ndarray:
    """``||P_D x_n - x*|| / m`` per recorded iteration, ``m`` the largest distance.

    ``known_solution`` may be a digit grid (compared in the cube encoding)
    or a cube.  An all-zero trace is returned unchanged.
    """
    if not report.shadows:
        raise ValueError("report has no recorded shadows; solve with record_trace=True")
    sol = np.asarray(known_solution.cells if isinstance(known_solution, PuzzleGrid) else known_solution)
    shape = report.shadows[0].shape
    if sol.shape != shape and sol.ndim == 2 and len(shape) == 3:
        sol = encode_binary(PuzzleGrid(sol)).values
    d = np.array([np.linalg.norm(P - sol) for P in report.shadows])
    m = d.max()
    return d / m if m > 0 else d
