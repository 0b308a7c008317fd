"""Command-line front end.

Demos print CSV traces (header row first) for the small analytic examples;
``sudoku`` and ``nonogram`` solve or benchmark puzzle files.  Exit status is
0 when everything solved/converged, 1 when something did not within budget,
and 2 for usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from statistics import mean
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import nonogram as ng
from . import sudoku as sd
from .core import StopReason, StopRule, cyclic_dr_step, dr3_step, dr_step, run
from .sets import AffineSubspace, EllipseSet, FinitePointSet, HalfLine, SphereSet, sphere_line_step
from .solver import CSV_HEADER, SolverConfig

EXIT_OK, EXIT_UNSOLVED, EXIT_USAGE = 0, 1, 2

SQ3 = math.sqrt(3.0)


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(header: Sequence[str], rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])


# ---------------------------------------------------------------------------
# demos


def lines3_sets():
    A = AffineSubspace.line([0.0, 1.0])
    B = AffineSubspace.line([SQ3, 1.0])
    C = AffineSubspace.line([-SQ3, 1.0])
    return A, B, C


def demo_lines3(max_iter: int = 200, dr3_steps: int = 10):
    """Three lines through the origin at 60 degrees, started at ``(-sqrt3, -1)``.

    Returns ``(header, rows, summary)``.  The three-set operator stays put;
    the cyclic scheme walks to the origin while its first inner step agrees
    with the projection onto the third line.
    """
    A, B, C = lines3_sets()
    x0 = np.array([-SQ3, -1.0])
    rows = []
    x = x0.copy()
    for n in range(dr3_steps + 1):
        p = A.project(x)
        rows.append((n, "dr3", x[0], x[1], p[0], p[1], None))
        x = dr3_step(A, B, C, x)
    x = x0.copy()
    residuals = []
    for n in range(max_iter + 1):
        p = A.project(x)
        res = float(np.linalg.norm(dr_step(A, B, x) - C.project(x)))
        residuals.append(res)
        rows.append((n, "cyclic", x[0], x[1], p[0], p[1], res))
        if np.linalg.norm(x) <= 1e-6:
            break
        x = cyclic_dr_step([A, B, C], x)
    summary = {
        "dr3_stationary": float(np.linalg.norm(dr3_step(A, B, C, x0) - x0)),
        "cyclic_final": x,
        "cyclic_iterations": n,
        "max_map_residual": max(residuals),
    }
    header = ["iteration", "scheme", "x1", "x2", "shadow1", "shadow2", "map_residual"]
    return header, rows, summary


def demo_sphere_line(alpha: float, x0, max_iter: int = 10_000, tol: float = 1e-12):
    if alpha < 0:
        raise UsageError("alpha must be >= 0")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape[0] < 2 or np.linalg.norm(x0) == 0:
        raise UsageError("x0 needs at least two coordinates and must be nonzero")
    trace = run(lambda x: sphere_line_step(x, alpha), x0, StopRule(max_iter=max_iter, tol=tol))
    d = x0.shape[0]
    header = ["iteration"] + [f"x{k + 1}" for k in range(d)] + ["norm"]
    rows = [(n, *x, float(np.linalg.norm(x))) for n, x in enumerate(trace.iterates)]
    return header, rows, trace


def two_cycle_sets(a: float, variant: str = "halfline"):
    if variant == "halfline":
        B = HalfLine(a)
    elif variant == "singleton":
        B = FinitePointSet([[a, 0.0]])
    elif variant == "doubleton":
        B = FinitePointSet([[a, 0.0], [-1.0, 0.0]])
    else:
        raise UsageError(f"unknown set variant {variant!r}")
    return SphereSet.unit(2), B


def demo_two_cycle(a: float, variant: str = "halfline", steps: int = 10):
    if not 0 < a < 1:
        raise UsageError("a must lie in (0, 1)")
    A, B = two_cycle_sets(a, variant)
    x0 = np.array([a / 2, math.sqrt(1 - a * a) / 2])
    rows = []
    x = x0.copy()
    for n in range(steps + 1):
        rows.append((n, x[0], x[1]))
        x = dr_step(A, B, x)
    twice = dr_step(A, B, dr_step(A, B, x0))
    gap = float(np.linalg.norm(twice - x0))
    summary = {"period2_gap": gap, "period2": gap <= 1e-12, "x0": x0}
    return ["iteration", "x1", "x2"], rows, summary


DEFAULT_COMMON_POINT = (0.3, 0.4)
# (a, b, angle, boundary parameter of the common point)
DEFAULT_ELLIPSES = ((2.0, 1.0, 0.0, 0.5), (1.5, 0.8, 0.7, 2.0), (1.2, 1.0, -0.4, 4.0))


def ellipses_through(point, params) -> List[EllipseSet]:
    """Ellipses placed so the given boundary parameter lands on ``point``."""
    q = np.asarray(point, dtype=float)
    out = []
    for a, b, ang, phi in params:
        local = np.array([a * math.cos(phi), b * math.sin(phi)])
        c, s = math.cos(ang), math.sin(ang)
        rot = np.array([[c, -s], [s, c]])
        out.append(EllipseSet(a, b, center=q - rot @ local, angle=ang))
    return out


def demo_ellipses(ellipses=None, x0=(0.5, 0.5), max_iter: int = 10_000, tol: float = 1e-12):
    """Cyclic DR over three ellipses; shadows are projections onto the first."""
    if ellipses is None:
        ellipses = ellipses_through(DEFAULT_COMMON_POINT, DEFAULT_ELLIPSES)
    if len(ellipses) < 2:
        raise UsageError("need at least two ellipses")
    E = list(ellipses)
    trace = run(lambda x: cyclic_dr_step(E, x), np.asarray(x0, float), StopRule(max_iter=max_iter, tol=tol), E[0])
    rows = [(n, x[0], x[1], p[0], p[1]) for n, (x, p) in enumerate(zip(trace.iterates, trace.shadows))]
    return ["iteration", "x1", "x2", "shadow1", "shadow2"], rows, trace


# ---------------------------------------------------------------------------
# puzzles


def _config(args) -> SolverConfig:
    return SolverConfig(
        max_iter=args.max_iter,
        restarts=args.restarts,
        variant=args.variant,
        seed=args.seed,
        record_trace=bool(getattr(args, "trace", None)),
    )


def _sudoku_instances(path: Path) -> List[Tuple[str, str]]:
    """(name, text) pairs; a file of several 81-character lines yields several."""
    files = sorted(p for p in path.iterdir() if p.is_file()) if path.is_dir() else [path]
    out = []
    for f in files:
        text = f.read_text()
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) > 1 and all(len(ln) == 81 and " " not in ln for ln in lines):
            out.extend((f"{f.stem}#{k + 1}", ln) for k, ln in enumerate(lines))
        else:
            out.append((f.stem, text))
    return out


def _solve_sudoku_text(job):
    name, text, cfg, model = job
    g = sd.parse_grid(text)
    solver = sd.solve_integer if model == "integer" else sd.solve_binary
    rep = solver(g, cfg)
    if rep.solved and not sd.verify(rep.solution, g):
        raise RuntimeError(f"{name}: solver returned an invalid grid")
    return name, rep


def _solve_nonogram_text(job):
    name, text, cfg, swap = job
    spec = ng.parse_nonogram(text)
    rep = ng.solve_nonogram(spec, cfg, swap=swap)
    if rep.solved and not ng.verify_nonogram(spec, rep.solution):
        raise RuntimeError(f"{name}: solver returned an invalid canvas")
    return name, rep


def _map(fn, jobs, n_jobs):
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def _bench_summary(results) -> str:
    times = [r.seconds for _, r in results]
    solved = sum(r.solved for _, r in results)
    pct = 100.0 * solved / len(results) if results else 0.0
    return (
        f"solved {solved}/{len(results)} ({pct:.2f}%), "
        f"mean time {mean(times) if times else 0:.3f}s, max time {max(times, default=0):.3f}s"
    )


def _emit(text: str, path: Optional[str], out):
    if path:
        Path(path).write_text(text)
    else:
        out.write(text)


def _cmd_sudoku_solve(args, out, err):
    g = sd.load_grid(args.file)
    cfg = _config(args)
    rep = (sd.solve_integer if args.model == "integer" else sd.solve_binary)(g, cfg)
    if rep.solved:
        out.write(sd.format_grid(rep.solution) + "\n")
    out.write(rep.csv_row(Path(args.file).stem, timing=not args.no_timing) + "\n")
    if args.trace and rep.shadows:
        buf = io.StringIO()
        if rep.solved and args.model != "integer":
            dist = sd.distance_trace(rep, rep.solution)
            write_csv(["iteration", "distance"], enumerate(dist), buf)
        else:
            write_csv(["iteration", "shadow_norm"], ((k, float(np.linalg.norm(P))) for k, P in enumerate(rep.shadows)), buf)
        Path(args.trace).write_text(buf.getvalue())
    return EXIT_OK if rep.solved else EXIT_UNSOLVED


def _cmd_sudoku_bench(args, out, err):
    cfg = _config(args)
    inst = _sudoku_instances(Path(args.path))
    for name, text in inst:
        sd.parse_grid(text)  # fail fast on parse errors
    results = _map(_solve_sudoku_text, [(n, t, cfg, args.model) for n, t in inst], args.jobs)
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for name, rep in results:
        buf.write(rep.csv_row(name, timing=not args.no_timing) + "\n")
    _emit(buf.getvalue(), args.csv, out)
    err.write(_bench_summary(results) + "\n")
    return EXIT_OK if all(r.solved for _, r in results) else EXIT_UNSOLVED


def _cmd_nonogram_solve(args, out, err):
    spec = ng.load_nonogram(args.file)
    cfg = _config(args)
    rep = ng.solve_nonogram(spec, cfg, swap=args.swap)
    if rep.solved:
        out.write(ng.format_canvas(rep.solution) + "\n")
    out.write(rep.csv_row(Path(args.file).stem, timing=not args.no_timing) + "\n")
    if args.trace and rep.shadows:
        buf = io.StringIO()
        header = ["iteration"] + [f"p{i}_{j}" for i in range(spec.m) for j in range(spec.n)]
        write_csv(header, ((k, *S.astype(int).ravel()) for k, S in enumerate(rep.shadows)), buf)
        Path(args.trace).write_text(buf.getvalue())
    return EXIT_OK if rep.solved else EXIT_UNSOLVED


def _cmd_nonogram_bench(args, out, err):
    cfg = _config(args)
    path = Path(args.path)
    files = sorted(p for p in path.iterdir() if p.is_file()) if path.is_dir() else [path]
    jobs = []
    for f in files:
        text = f.read_text()
        try:
            ng.parse_nonogram(text)
        except ng.NonogramParseError:
            if path.is_dir():
                continue  # skip non-puzzle files such as stored solutions
            raise
        jobs.append((f.stem, text, cfg, args.swap))
    results = _map(_solve_nonogram_text, jobs, args.jobs)
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for name, rep in results:
        buf.write(rep.csv_row(name, timing=not args.no_timing) + "\n")
    _emit(buf.getvalue(), args.csv, out)
    err.write(_bench_summary(results) + "\n")
    return EXIT_OK if all(r.solved for _, r in results) else EXIT_UNSOLVED


def _parse_vec(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}") from None


def _parse_ellipse(text: str) -> EllipseSet:
    v = _parse_vec(text)
    if v.size not in (4, 5):
        raise UsageError("ellipse needs cx,cy,a,b[,angle]")
    if v[2] <= 0 or v[3] <= 0:
        raise UsageError("ellipse semi-axes must be positive")
    return EllipseSet(v[2], v[3], center=v[:2], angle=v[4] if v.size == 5 else 0.0)


def _demo_out(args, header, rows, out):
    buf = io.StringIO()
    write_csv(header, rows, buf)
    _emit(buf.getvalue(), args.trace, out)


def _cmd_demo(args, out, err):
    if args.demo == "lines3":
        header, rows, s = demo_lines3(max_iter=args.max_iter)
        _demo_out(args, header, rows, out)
        err.write(
            f"dr3 |Tx0-x0| = {s['dr3_stationary']:.3e}; cyclic reached "
            f"|x| = {np.linalg.norm(s['cyclic_final']):.3e} after {s['cyclic_iterations']} steps; "
            f"max |T_AB x - P_C x| = {s['max_map_residual']:.3e}\n"
        )
        return EXIT_OK if np.linalg.norm(s["cyclic_final"]) <= 1e-6 else EXIT_UNSOLVED
    if args.demo == "sphere-line":
        header, rows, tr = demo_sphere_line(args.alpha, _parse_vec(args.x0), max_iter=args.max_iter)
        _demo_out(args, header, rows, out)
        err.write(f"stop: {tr.stop_reason.value}{' (diverged)' if tr.diverged else ''} after {tr.iterations} steps\n")
        return EXIT_OK if tr.stop_reason is StopReason.CONVERGED else EXIT_UNSOLVED
    if args.demo == "two-cycle":
        header, rows, s = demo_two_cycle(args.a, args.set, steps=args.steps)
        _demo_out(args, header, rows, out)
        err.write(f"period-2: {s['period2']} (|T^2 x0 - x0| = {s['period2_gap']:.3e})\n")
        return EXIT_OK if s["period2"] else EXIT_UNSOLVED
    if args.demo == "ellipses":
        E = [_parse_ellipse(t) for t in args.ellipse] if args.ellipse else None
        header, rows, tr = demo_ellipses(E, _parse_vec(args.x0), max_iter=args.max_iter)
        _demo_out(args, header, rows, out)
        err.write(f"stop: {tr.stop_reason.value} after {tr.iterations} steps; shadow {tr.shadow.tolist()}\n")
        return EXIT_OK if tr.stop_reason is StopReason.CONVERGED else EXIT_UNSOLVED
    raise UsageError(f"unknown demo {args.demo!r}")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drfeas", description="Douglas-Rachford feasibility solvers")
    sub = p.add_subparsers(dest="command", required=True)

    def solver_flags(sp, default_iter=10_000):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-iter", type=_positive_int, default=default_iter)
        sp.add_argument("--restarts", type=_nonneg_int, default=0)
        sp.add_argument("--variant", choices=["dr", "dr-proj"], default="dr")
        sp.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")

    demo = sub.add_parser("demo", help="analytic examples as CSV traces")
    dsub = demo.add_subparsers(dest="demo", required=True)
    d = dsub.add_parser("lines3", help="three lines: 3-set DR vs cyclic DR")
    d.add_argument("--max-iter", type=_positive_int, default=200)
    d.add_argument("--trace")
    d = dsub.add_parser("sphere-line", help="normalized sphere/line iteration")
    d.add_argument("--alpha", type=float, default=1 / math.sqrt(2))
    d.add_argument("--x0", default="0.5,0.5")
    d.add_argument("--max-iter", type=_positive_int, default=10_000)
    d.add_argument("--trace")
    d = dsub.add_parser("two-cycle", help="circle and half-line period-2 orbit")
    d.add_argument("--a", type=float, default=0.8)
    d.add_argument("--set", choices=["halfline", "singleton", "doubleton"], default="halfline")
    d.add_argument("--steps", type=_positive_int, default=10)
    d.add_argument("--trace")
    d = dsub.add_parser("ellipses", help="cyclic DR over ellipses")
    d.add_argument("--ellipse", action="append", metavar="CX,CY,A,B[,ANGLE]")
    d.add_argument("--x0", default="0.5,0.5")
    d.add_argument("--max-iter", type=_positive_int, default=10_000)
    d.add_argument("--trace")

    su = sub.add_parser("sudoku", help="Sudoku via the zero-one (or integer) model")
    ssub = su.add_subparsers(dest="action", required=True)
    s = ssub.add_parser("solve")
    s.add_argument("file")
    solver_flags(s)
    s.add_argument("--model", choices=["binary", "integer"], default="binary")
    s.add_argument("--trace", help="write a per-iteration CSV trace here")
    s = ssub.add_parser("bench")
    s.add_argument("path", help="puzzle file or directory")
    solver_flags(s)
    s.add_argument("--model", choices=["binary", "integer"], default="binary")
    s.add_argument("--jobs", type=_positive_int, default=1)
    s.add_argument("--csv", help="write CSV here instead of stdout")

    no = sub.add_parser("nonogram", help="nonograms via row/column DR")
    nsub = no.add_subparsers(dest="action", required=True)
    s = nsub.add_parser("solve")
    s.add_argument("file")
    solver_flags(s)
    s.add_argument("--swap", action="store_true", help="reflect in the column family first")
    s.add_argument("--trace")
    s = nsub.add_parser("bench")
    s.add_argument("path")
    solver_flags(s)
    s.add_argument("--swap", action="store_true")
    s.add_argument("--jobs", type=_positive_int, default=1)
    s.add_argument("--csv")
    return p


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        if args.command == "demo":
            return _cmd_demo(args, out, err)
        if args.command == "sudoku":
            return (_cmd_sudoku_solve if args.action == "solve" else _cmd_sudoku_bench)(args, out, err)
        return (_cmd_nonogram_solve if args.action == "solve" else _cmd_nonogram_bench)(args, out, err)
    except (UsageError, sd.GridParseError, ng.NonogramParseError, OSError) as e:
        err.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
