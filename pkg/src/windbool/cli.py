"""``wind-bool`` command line: booleans, winding-field sampling, mesh audits.

Exit codes: 0 success, 1 audit found an open or non-manifold mesh,
2 parse or I/O error, 3 robustness error, 4 invalid arguments.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import io
from .boolean import BoolOp, BoolOpSpec, InsideRule, RobustnessError, boolean, bvh_evaluator
from .mesh import audit
from .winding import THREADS_ENV, build_bvh, resolve_threads, winding_number_batch

EXIT_OK, EXIT_OPEN, EXIT_IO, EXIT_ROBUSTNESS, EXIT_USAGE = 0, 1, 2, 3, 4

OPS = {
    "union": BoolOp.UNION,
    "intersect": BoolOp.INTERSECTION,
    "minus": BoolOp.DIFFERENCE_AB,
    "rminus": BoolOp.DIFFERENCE_BA,
    "xor": BoolOp.SYMMETRIC_DIFFERENCE,
}
RULES = {r.value: r for r in InsideRule}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _threads(value):
    if value == "auto":
        return value
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'auto'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer or 'auto'")
    return n


def _grid(value):
    try:
        nx, ny, nz, lo, hi = value.split(",")
        n = [int(nx), int(ny), int(nz)]
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("expected nx,ny,nz,min,max") from None
    if min(n) < 1 or not lo <= hi:
        raise argparse.ArgumentTypeError("grid counts must be positive and min <= max")
    return n, lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wind-bool", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--threads", type=_threads, default=None,
                        help=f"worker threads or 'auto' (default: ${THREADS_ENV}, else CPU count)")
    common.add_argument("--weld", action="store_true", help="merge identical STL vertices on read")
    common.add_argument("-v", "--verbose", action="store_true")

    b = sub.add_parser("bool-op", parents=[common], help="boolean of two meshes")
    b.add_argument("--op", required=True, choices=sorted(OPS))
    b.add_argument("--inside-rule", default="gt-half", choices=list(RULES))
    b.add_argument("-a", required=True, help="first operand")
    b.add_argument("-b", required=True, help="second operand")
    b.add_argument("-o", "--output", required=True)

    f = sub.add_parser("field", parents=[common], help="sample the winding number of a mesh")
    f.add_argument("-a", required=True)
    src = f.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="CSV with x,y,z columns")
    src.add_argument("--grid", type=_grid, help="nx,ny,nz,min,max over the cube [min,max]^3")
    f.add_argument("-o", "--output", help="CSV output (default: standard output)")

    a = sub.add_parser("audit", parents=[common], help="report closedness and manifoldness")
    a.add_argument("-a", required=True)
    return p


def grid_points(n, lo, hi) -> np.ndarray:
    """Lattice points with x varying slowest and z fastest."""
    axes = [np.linspace(lo, hi, k) for k in n]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)


def _log(msg):
    print(msg, file=sys.stderr)


def run_bool(args) -> int:
    t = time.perf_counter()
    a = io.read_mesh(args.a, weld=args.weld)
    b = io.read_mesh(args.b, weld=args.weld)
    t_read = time.perf_counter() - t
    spec = BoolOpSpec(OPS[args.op], RULES[args.inside_rule])
    result = boolean(a, b, spec, bvh_evaluator(args.threads))
    t = time.perf_counter()
    io.write_mesh(result.mesh, args.output)
    t_write = time.perf_counter() - t
    if args.verbose:
        s = result.pair.stats
        _log(f"input: A {a.n_faces} faces, B {b.n_faces} faces")
        _log(f"corefine: candidate_pairs={s.candidate_pairs} intersecting_pairs={s.intersecting_pairs} "
             f"coplanar_overlaps={s.coplanar_overlaps} skipped_degenerate={s.skipped_degenerate} "
             f"refined_faces_a={s.refined_faces_a} refined_faces_b={s.refined_faces_b}")
        _log(f"coplanar_pairs={len(result.pair.coplanar_pairs)}")
        for src, counts in result.action_counts().items():
            _log(f"actions {src}: " + " ".join(f"{k}={v}" for k, v in counts.items()))
        _log(_audit_text(audit(result.mesh)).replace("\n", " "))
        timings = {"read": t_read, **result.timings, "write": t_write}
        _log("timing: " + " ".join(f"{k}={v:.4f}s" for k, v in timings.items()))
    return EXIT_OK


def run_field(args) -> int:
    mesh = io.read_mesh(args.a, weld=args.weld)
    points = io.read_points(args.points) if args.points else grid_points(*args.grid)
    t = time.perf_counter()
    if mesh.n_faces:
        w = winding_number_batch(mesh, build_bvh(mesh), points, args.threads)
    else:
        w = np.zeros(len(points))
    if args.verbose:
        _log(f"field: {len(points)} points, {mesh.n_faces} faces, "
             f"threads={resolve_threads(args.threads)}, {time.perf_counter() - t:.4f}s")
    if args.output:
        io.write_field(points, w, args.output)
    else:
        sys.stdout.write(io.field_csv(points, w))
    return EXIT_OK


def _audit_text(rep) -> str:
    return "\n".join(
        f"{k}={str(v).lower() if isinstance(v, bool) else v}" for k, v in vars(rep).items()
    )


def run_audit(args) -> int:
    rep = audit(io.read_mesh(args.a, weld=args.weld))
    print(_audit_text(rep))
    return EXIT_OK if rep.is_closed and rep.is_edge_manifold else EXIT_OPEN


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        resolve_threads(args.threads)
    except (UsageError, ValueError) as e:
        _log(str(e))
        return EXIT_USAGE
    try:
        return {"bool-op": run_bool, "field": run_field, "audit": run_audit}[args.command](args)
    except io.MeshIOError as e:
        _log(f"wind-bool: error: {e}")
        return EXIT_IO
    except RobustnessError as e:
        _log(f"wind-bool: robustness error: {e}")
        return EXIT_ROBUSTNESS


if __name__ == "__main__":
    sys.exit(main())
