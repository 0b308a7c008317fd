"""Nonograms as a two-set feasibility problem on the canvas.

A canvas is an ``m x n`` array with 1 for black and 0 for white.  The row
family ``C1`` asks every row to match its cluster sequence, the column
family ``C2`` every column.  Both projections are exact nearest-point
searches over the pre-enumerated feasible lines, so they are only practical
while each line has a modest number of placements.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .solver import SolveReport, SolverConfig

__all__ = [
    "MAX_PLACEMENTS",
    "NonogramSpec",
    "NonogramParseError",
    "LineFeasibleSet",
    "NonogramModel",
    "parse_nonogram",
    "load_nonogram",
    "format_canvas",
    "runs",
    "placement_count",
    "enumerate_line",
    "project_line",
    "solve_nonogram",
    "verify_nonogram",
]

MAX_PLACEMENTS = 1_000_000


class NonogramParseError(ValueError):
    pass


def runs(line) -> Tuple[int, ...]:
    """Lengths of the maximal runs of ones, left to right."""
    out = []
    count = 0
    for v in np.asarray(line).ravel():
        if v == 1:
            count += 1
        else:
            if v != 0:
                raise ValueError("line is not binary")
            if count:
                out.append(count)
            count = 0
    if count:
        out.append(count)
    return tuple(out)


@dataclass
class NonogramSpec:
    row_clusters: List[Tuple[int, ...]]
    col_clusters: List[Tuple[int, ...]]

    def __post_init__(self):
        self.row_clusters = [tuple(int(v) for v in s) for s in self.row_clusters]
        self.col_clusters = [tuple(int(v) for v in s) for s in self.col_clusters]
        if not self.row_clusters or not self.col_clusters:
            raise ValueError("need at least one row and one column")
        for kind, seqs, L in (("row", self.row_clusters, self.n), ("column", self.col_clusters, self.m)):
            for idx, s in enumerate(seqs, 1):
                if any(v < 1 for v in s):
                    raise ValueError(f"{kind} {idx}: cluster sizes must be positive")
                if _min_length(s) > L:
                    raise ValueError(f"{kind} {idx}: clusters {s} do not fit in {L} cells")

    @property
    def m(self) -> int:
        return len(self.row_clusters)

    @property
    def n(self) -> int:
        return len(self.col_clusters)


def _min_length(s):
    return sum(s) + max(len(s) - 1, 0)


def placement_count(L: int, s: Sequence[int]) -> int:
    """``C(f + k, k)`` placements, ``f`` the free whites and ``k`` the cluster count."""
    f = L - _min_length(s)
    if f < 0:
        return 0
    return math.comb(f + len(s), len(s))


def enumerate_line(L: int, s: Sequence[int]) -> np.ndarray:
    """All binary vectors of length ``L`` with cluster sequence ``s``.

    Rows of the result are ordered leftmost-first: the first cluster's start
    varies slowest, beginning at 0.  Each placement corresponds to choosing
    ``k`` of ``f + k`` slots, where slot ``c_i`` puts ``c_i - i`` free
    whites in front of cluster ``i``.
    """
    s = tuple(int(v) for v in s)
    k = len(s)
    f = L - _min_length(s)
    if f < 0:
        raise ValueError(f"clusters {s} do not fit in {L} cells")
    count = placement_count(L, s)
    if count > MAX_PLACEMENTS:
        raise ValueError(f"line with clusters {s} in {L} cells has {count} placements (limit {MAX_PLACEMENTS})")
    out = np.zeros((count, L), dtype=np.int8)
    offsets = np.concatenate(([0], np.cumsum(s)[:-1])) if k else np.zeros(0, dtype=int)
    for row, slots in enumerate(itertools.combinations(range(f + k), k)):
        for start, size in zip(np.asarray(slots) + offsets, s):
            out[row, start : start + size] = 1
    return out


class LineFeasibleSet:
    """Pre-enumerated feasible vectors for one line."""

    def __init__(self, L: int, s: Sequence[int]):
        self.L = int(L)
        self.s = tuple(s)
        self.vectors = enumerate_line(self.L, self.s)
        self._V = self.vectors.astype(float)
        self._sq = self._V.sum(axis=1)  # ||v||^2 for 0/1 vectors

    def __len__(self):
        return self.vectors.shape[0]

    def project(self, x) -> np.ndarray:
        return project_line(self, x)


def project_line(F: LineFeasibleSet, x) -> np.ndarray:
    """Nearest feasible vector; the earliest in enumeration order wins ties."""
    x = np.asarray(x, dtype=float)
    if x.shape != (F.L,):
        raise ValueError("length mismatch")
    if len(F) == 0:
        raise ValueError("empty feasible set")
    # ||v - x||^2 minus the constant ||x||^2
    score = F._sq - 2.0 * (F._V @ x)
    return F._V[int(np.argmin(score))].copy()


class NonogramModel:
    """Row and column feasible sets for one puzzle."""

    def __init__(self, spec: NonogramSpec):
        self.spec = spec
        self.rows = [LineFeasibleSet(spec.n, s) for s in spec.row_clusters]
        self.cols = [LineFeasibleSet(spec.m, s) for s in spec.col_clusters]

    def project_rows(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=float)
        self._check(A)
        return np.stack([project_line(F, A[i]) for i, F in enumerate(self.rows)])

    def project_cols(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=float)
        self._check(A)
        return np.stack([project_line(F, A[:, j]) for j, F in enumerate(self.cols)], axis=1)

    def _check(self, A):
        if A.shape != (self.spec.m, self.spec.n):
            raise ValueError(f"canvas shape {A.shape} does not match {self.spec.m}x{self.spec.n}")


def verify_nonogram(spec: NonogramSpec, canvas) -> bool:
    """Independent run-length check of a binary canvas."""
    A = np.asarray(canvas)
    if A.shape != (spec.m, spec.n) or not np.all((A == 0) | (A == 1)):
        return False
    return all(runs(A[i]) == s for i, s in enumerate(spec.row_clusters)) and all(
        runs(A[:, j]) == s for j, s in enumerate(spec.col_clusters)
    )


def solve_nonogram(
    spec: NonogramSpec,
    cfg: Optional[SolverConfig] = None,
    swap: bool = False,
    model: Optional[NonogramModel] = None,
) -> SolveReport:
    """Two-set DR ``T_{C1,C2}`` on the canvas from a uniform random start.

    After every iteration the row shadow ``P_{C1} x_n`` (already binary) is
    accepted if its columns also match.  ``swap=True`` runs ``T_{C2,C1}``
    and reads the column shadow instead.
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    model = model or NonogramModel(spec)
    PA, PB = model.project_rows, model.project_cols
    if swap:
        PA, PB = PB, PA

    def accept(S):
        return verify_nonogram(spec, S)

    total = 0
    for attempt in range(cfg.restarts + 1):
        x = cfg.rng(attempt).random((spec.m, spec.n))
        trace = []
        pa = PA(x)
        if cfg.record_trace:
            trace.append(pa)
        if accept(pa):
            return SolveReport(True, 0, attempt, time.perf_counter() - t0, total, pa.astype(int), trace)
        it = cfg.max_iter
        solved = False
        for n in range(cfg.max_iter):
            x = x + PB(2.0 * pa - x) - pa
            pa = PA(x)
            if cfg.record_trace:
                trace.append(pa)
            if accept(pa):
                it = n + 1
                solved = True
                break
        total += it
        if solved:
            return SolveReport(True, it, attempt, time.perf_counter() - t0, total, pa.astype(int), trace)
    return SolveReport(False, cfg.max_iter, cfg.restarts, time.perf_counter() - t0, total, None, trace)


# ---------------------------------------------------------------------------
# files


def _parse_seq(text, where):
    text = text.strip()
    if text in ("", "0", "-"):
        return ()
    try:
        seq = tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError:
        raise NonogramParseError(f"{where}: cannot read cluster sequence {text!r}") from None
    if any(v < 1 for v in seq):
        raise NonogramParseError(f"{where}: cluster sizes must be positive")
    return seq


def parse_nonogram(text: str) -> NonogramSpec:
    """Read a ``rows:`` block followed by a ``cols:`` block.

    One comma-separated sequence per line; a blank line, ``0`` or ``-``
    stands for an empty sequence.  Blank lines at the very end are ignored.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    block = None
    rows: list = []
    cols: list = []
    for no, raw in enumerate(lines, 1):
        ln = raw.strip()
        low = ln.lower().replace(" ", "")
        if low.startswith("rows:"):
            block = rows
            rest = ln.split(":", 1)[1]
            if rest.strip():
                raise NonogramParseError(f"line {no}: put sequences on the lines after 'rows:'")
            continue
        if low.startswith("cols:") or low.startswith("columns:"):
            if block is not rows:
                raise NonogramParseError(f"line {no}: 'cols:' must follow a 'rows:' block")
            block = cols
            continue
        if ln.startswith("#") and block is None:
            continue
        if block is None:
            if not ln:
                continue
            raise NonogramParseError(f"line {no}: expected 'rows:' header")
        block.append(_parse_seq(ln, f"line {no}"))
    if block is not cols:
        raise NonogramParseError("missing 'cols:' block")
    try:
        return NonogramSpec(rows, cols)
    except ValueError as e:
        raise NonogramParseError(str(e)) from None


def load_nonogram(path) -> NonogramSpec:
    return parse_nonogram(Path(path).read_text())


def format_canvas(canvas) -> str:
    A = np.asarray(canvas)
    return "\n".join("".join("#" if v else "." for v in row) for row in A)
