"""Command-line front end: instance I/O, solver dispatch, instance
generation, benchmark harness, trace/report emission.

Exit codes: 0 success, 2 input error (bad files/data), 3 config error (bad
flag combinations). Vectors on disk are plain text, one real per line;
matrices are Matrix Market coordinate files.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import geometry as geo
from . import sparse_matrix as sm
from .applications import RegressionProblem, max_ib, min_eb, regression_solve
from .errors import ConfigError, InputError
from .estimators import EstimatorKind, l_constants
from .solvers import (default_sublinear_kind, default_vr_kind,
                      solve_mirror_prox, solve_sublinear, solve_vr)

GEOMETRY = {"l1l1": "L1L1", "l2l1": "L2L1", "l2l2": "L2L2"}
METHODS = ("sublinear", "vr", "rowcol-vr", "mirror-prox")


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def read_vector(path, dim, name):
    try:
        with open(path) as f:
            vals = [line.strip() for line in f if line.strip()]
    except OSError as e:
        raise InputError(f"cannot read {name} file {path}: {e}")
    try:
        v = np.array([float(s) for s in vals], dtype=np.float64)
    except ValueError as e:
        raise InputError(f"{name} file {path}: {e}")
    if dim is not None and v.shape[0] != dim:
        raise InputError(f"{name} file {path} has {v.shape[0]} entries, need {dim}")
    return v


def read_rows(path, name):
    """Whitespace-separated reals, one row per line; rectangular."""
    try:
        with open(path) as f:
            lines = [ln.split() for ln in f if ln.strip()]
    except OSError as e:
        raise InputError(f"cannot read {name} file {path}: {e}")
    if not lines:
        raise InputError(f"{name} file {path} is empty")
    width = len(lines[0])
    out = np.empty((len(lines), width))
    for i, parts in enumerate(lines):
        if len(parts) != width:
            raise InputError(f"{name} file {path} line {i + 1}: expected "
                             f"{width} fields, got {len(parts)}")
        try:
            out[i] = [float(s) for s in parts]
        except ValueError as e:
            raise InputError(f"{name} file {path} line {i + 1}: {e}")
    return out


def load_matrix(path):
    try:
        return sm.load_matrix_market(path)
    except OSError as e:
        raise InputError(f"cannot read matrix file {path}: {e}")


def write_report(outdir, config, result, trace):
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "report.json"), "w") as f:
        json.dump({"config": config, "result": result}, f, indent=1)
        f.write("\n")
    with open(os.path.join(outdir, "trace.csv"), "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["iteration", "elapsed_ns", "gap_or_blank",
                     "coords_touched", "matvecs"])
        wr.writerow([0, 0, "", 0, 0])
        for row in trace:
            g = "" if (row.gap is None or math.isnan(row.gap)) else repr(row.gap)
            wr.writerow([row.iteration, row.elapsed_ns, g,
                         row.coords_touched, row.matvecs])
        f.flush()
        os.fsync(f.fileno())


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _pick_kind(method, setup, A, estimator):
    if method == "mirror-prox":
        if estimator not in (None, "auto"):
            raise ConfigError("--estimator does not apply to mirror-prox")
        return None
    family = {"sublinear": "SublinearCoord", "vr": "VrCoord",
              "rowcol-vr": "VrRowCol"}[method]
    if estimator in (None, "auto"):
        if method == "sublinear":
            return default_sublinear_kind(setup, A)
        return default_vr_kind(setup, A, rowcol=(method == "rowcol-vr"))
    try:
        return EstimatorKind(family, estimator)
    except ValueError as e:
        raise ConfigError(f"--estimator {estimator}: {e}")


def _run_solve(args, outdir):
    tag = GEOMETRY[args.geometry]
    A = load_matrix(args.matrix)
    setup = geo.make_setup(tag, A.n, A.m)
    b = read_vector(args.b, A.n, "b") if args.b else None
    c = read_vector(args.c, A.m, "c") if args.c else None
    alpha = None if args.alpha in (None, "auto") else float(args.alpha)
    kind = _pick_kind(args.method, setup, A, args.estimator)
    ck = args.checkpoint

    if args.method == "sublinear":
        rep = solve_sublinear(setup, A, b, c, kind=kind, eps=args.eps,
                              seed=args.seed, trace_every=ck, gap_every=ck)
    elif args.method in ("vr", "rowcol-vr"):
        rep = solve_vr(setup, A, b, c, kind=kind, eps=args.eps, seed=args.seed,
                       alpha=alpha, trace_gap=bool(ck))
    else:
        rep = solve_mirror_prox(setup, A, b, c, eps=args.eps,
                                trace_every=ck or 0)

    config = {"command": "solve", "geometry": args.geometry,
              "method": args.method, "estimator": args.estimator or "auto",
              "eps": args.eps, "alpha": args.alpha or "auto",
              "seed": args.seed, "checkpoint": ck, "matrix": args.matrix,
              "b": args.b, "c": args.c}
    result = {"gap": rep.gap, "iterations": rep.iterations,
              "wall_ns": rep.elapsed_ns, "matvecs": rep.matvecs,
              "coords_touched": rep.coords_touched,
              "x": list(rep.z.x), "y": list(rep.z.y),
              "extras": _jsonable(rep.extras)}
    write_report(outdir, config, result, rep.trace)
    return rep


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def cmd_solve(args):
    _run_solve(args, args.out)
    return 0


# ---------------------------------------------------------------------------
# app
# ---------------------------------------------------------------------------

def cmd_app(args):
    os.makedirs(args.out, exist_ok=True)
    if args.app == "regress":
        A = load_matrix(args.matrix)
        b = read_vector(args.b, A.m, "b")
        x = regression_solve(RegressionProblem(A, b, args.mu, args.eps),
                             seed=args.seed)
        resid = float(np.linalg.norm(A.matvec(x) - b))
        cert = float(np.linalg.norm(A.matvec_t(A.matvec(x) - b))) / args.mu
        config = {"command": "app", "app": "regress", "matrix": args.matrix,
                  "b": args.b, "mu": args.mu, "eps": args.eps,
                  "seed": args.seed}
        result = {"metric": resid, "metric_name": "residual_norm",
                  "error_bound": cert, "x": list(x)}
    elif args.app == "mineb":
        pts = read_rows(args.points, "points")
        center, radius = min_eb(pts, eps=args.eps, seed=args.seed)
        config = {"command": "app", "app": "mineb", "points": args.points,
                  "eps": args.eps, "seed": args.seed}
        result = {"metric": radius, "metric_name": "radius",
                  "center": list(center)}
    else:
        rows = read_rows(args.halfspaces, "halfspaces")
        if rows.shape[1] < 2:
            raise InputError("halfspace rows need at least one normal "
                             "coordinate plus an offset")
        center, radius = max_ib(rows[:, :-1], rows[:, -1], eps=args.eps,
                                r_bound=args.r_bound, seed=args.seed)
        config = {"command": "app", "app": "maxib",
                  "halfspaces": args.halfspaces, "r_bound": args.r_bound,
                  "eps": args.eps, "seed": args.seed}
        result = {"metric": radius, "metric_name": "inradius",
                  "center": list(center)}
    write_report(args.out, config, result, [])
    return 0


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def _spanning_pattern(m, n):
    """m+n-1 positions touching every row and column (a bipartite tree)."""
    pos = []
    for i in range(m):
        pos.append((i, i % n))
    for j in range(n):
        if j >= m:  # columns no row reached yet
            pos.append((j % m, j))
    # dedupe, then top up to exactly m+n-1 distinct positions
    seen = dict.fromkeys(pos)
    k = 0
    while len(seen) < m + n - 1:
        seen.setdefault((k % m, (k * 7 + 1) % n))
        k += 1
    return list(seen)


def cmd_gen(args):
    m, n, nnz = args.m, args.n, args.nnz
    if m < 1 or n < 1:
        raise ConfigError("--m and --n must be positive")
    if nnz < m + n - 1:
        raise ConfigError(f"--nnz {nnz} cannot cover every row and column "
                          f"of a {m}x{n} matrix; need at least {m + n - 1}")
    if nnz > m * n:
        raise ConfigError(f"--nnz {nnz} exceeds {m}x{n}")
    rng = np.random.default_rng(args.seed)
    pattern = _spanning_pattern(m, n)
    seen = set(pattern)
    while len(seen) < nnz:
        i = int(rng.integers(m))
        if args.dist == "rowdense":
            # concentrate fill in a handful of rows
            i = int(rng.integers(max(1, m // 8)))
        j = int(rng.integers(n))
        if (i, j) not in seen:
            seen.add((i, j))
            pattern.append((i, j))

    vals = np.empty(len(pattern))
    if args.dist == "numsparse":
        # one large entry per line from the spanning pattern, small tails
        for k, (i, j) in enumerate(pattern):
            big = k < m + n - 1
            vals[k] = (rng.choice([-1.0, 1.0]) if big
                       else rng.uniform(-1.0, 1.0) * 0.02)
    else:
        vals[:] = rng.uniform(-1.0, 1.0, size=len(pattern))
        vals[vals == 0.0] = 0.5

    os.makedirs(args.out, exist_ok=True)
    mtx = os.path.join(args.out, "matrix.mtx")
    with open(mtx, "w") as f:
        f.write("%%MatrixMarket matrix coordinate real general\n")
        f.write(f"{m} {n} {len(pattern)}\n")
        for (i, j), v in zip(pattern, vals):
            f.write(f"{i + 1} {j + 1} {float(v)!r}\n")
    A = sm.load_matrix_market(mtx)
    consts = l_constants(A)
    meta = {"m": m, "n": n, "nnz": A.nnz, "dist": args.dist, "seed": args.seed,
            "amax": A.amax, "rcs": int(A.rcs), "L11": consts["L11"],
            "L22": consts["L22"], "L21_best": consts["L21"]["best"]}
    with open(os.path.join(args.out, "meta.json"), "w") as f:
        json.dump(meta, f, indent=1)
        f.write("\n")
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def cmd_bench(args):
    methods = [s.strip() for s in args.methods.split(",") if s.strip()]
    if not methods:
        raise ConfigError("--methods list is empty")
    for meth in methods:
        if meth not in METHODS:
            raise ConfigError(f"unknown method {meth!r} in --methods")
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for meth in methods:
        sub = argparse.Namespace(geometry=args.geometry, method=meth,
                                 estimator=None, eps=args.eps, alpha=args.alpha,
                                 seed=args.seed, checkpoint=args.checkpoint,
                                 matrix=args.matrix, b=args.b, c=args.c)
        rep = _run_solve(sub, os.path.join(args.out, meth))
        rows.append((meth, rep.elapsed_ns, rep.coords_touched, rep.matvecs,
                     rep.gap))
    with open(os.path.join(args.out, "summary.csv"), "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["method", "wall_ns", "coords_touched", "matvecs",
                     "final_gap"])
        for row in rows:
            wr.writerow(row)
    bad = [r for r in rows if not (r[4] <= 1.2 * args.eps)]
    assert not bad, f"methods exceeded the gap budget: {bad}"
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="matgames",
                                description="bilinear saddle-point solvers")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a matrix game instance")
    ps.add_argument("--geometry", required=True, choices=sorted(GEOMETRY))
    ps.add_argument("--method", required=True, choices=METHODS)
    ps.add_argument("--estimator", default=None,
                    help="estimator variant, or 'auto'")
    ps.add_argument("--eps", type=float, required=True)
    ps.add_argument("--alpha", default="auto")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--checkpoint", type=int, default=0,
                    help="trace/gap evaluation period (0 = off)")
    ps.add_argument("--matrix", required=True)
    ps.add_argument("--b", default=None)
    ps.add_argument("--c", default=None)
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_solve)

    pa = sub.add_parser("app", help="run an application reduction")
    asub = pa.add_subparsers(dest="app", required=True)
    pr = asub.add_parser("regress")
    pr.add_argument("--matrix", required=True)
    pr.add_argument("--b", required=True)
    pr.add_argument("--mu", type=float, required=True)
    pr.add_argument("--eps", type=float, required=True)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--out", required=True)
    pm = asub.add_parser("mineb")
    pm.add_argument("--points", required=True)
    pm.add_argument("--eps", type=float, default=0.05)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--out", required=True)
    px = asub.add_parser("maxib")
    px.add_argument("--halfspaces", required=True)
    px.add_argument("--r-bound", type=float, default=None)
    px.add_argument("--eps", type=float, default=0.05)
    px.add_argument("--seed", type=int, default=0)
    px.add_argument("--out", required=True)
    for q in (pr, pm, px):
        q.set_defaults(func=cmd_app)

    pg = sub.add_parser("gen", help="generate a random instance")
    pg.add_argument("--m", type=int, required=True)
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--nnz", type=int, required=True)
    pg.add_argument("--dist", required=True,
                    choices=("uniform", "rowdense", "numsparse"))
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out", required=True)
    pg.set_defaults(func=cmd_gen)

    pb = sub.add_parser("bench", help="compare methods on one instance")
    pb.add_argument("--methods", required=True,
                    help="comma-separated subset of " + ",".join(METHODS))
    pb.add_argument("--geometry", required=True, choices=sorted(GEOMETRY))
    pb.add_argument("--eps", type=float, required=True)
    pb.add_argument("--alpha", default="auto")
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--checkpoint", type=int, default=0)
    pb.add_argument("--matrix", required=True)
    pb.add_argument("--b", default=None)
    pb.add_argument("--c", default=None)
    pb.add_argument("--out", required=True)
    pb.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
