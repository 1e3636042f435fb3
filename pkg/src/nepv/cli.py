"""Command-line front end.

Exit codes: 0 success (also for runs that did not converge), 2 malformed
arguments, 3 file or format errors, 4 dense problem too large, 5 solver error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

import nepv
from nepv.core import NepvError, count_solutions
from nepv.dense import solve_all
from nepv.invit import PATHS, IiConfig, hybrid_solve, ii_solve
from nepv.io import ProblemFileError, decode_vector, read_problem, write_json, write_problem
from nepv.linearize import build_mep, random_g
from nepv.opdet import MemoryBudgetExceeded
from nepv.problems import PdeSpec, gen_pde, gen_random
from nepv.resinv import RiConfig, ri_solve, ris_solve
from nepv.rng import named_rng

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_MEMORY, EXIT_SOLVER = 0, 2, 3, 4, 5


class InputError(Exception):
    """File-level problem reported with exit code 3."""


def parse_complex(text: str) -> complex:
    """``"re,im"`` or ``"re"`` to a complex number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")


def load_x0(spec: str, n: int) -> np.ndarray:
    """``random:SEED`` (standard normal, stream ``x0``) or a JSON vector file."""
    if spec.startswith("random:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad seed in {spec!r}") from None
        return named_rng(seed, "x0").standard_normal(n)
    try:
        doc = json.loads(Path(spec).read_text())
    except OSError as exc:
        raise InputError(f"cannot read x0 file {spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"x0 file {spec}: {exc}") from exc
    try:
        return decode_vector(doc, n, "x0")
    except ProblemFileError as exc:
        raise InputError(str(exc)) from exc


def _load(path: str, g_seed):
    try:
        p, g = read_problem(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except ProblemFileError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if g_seed is not None or g is None:
        g = random_g(p.n, p.m, 0 if g_seed is None else g_seed)
    return p, g


def _result_dict(r) -> dict:
    return {
        "method": r.method,
        "converged": r.converged,
        "stagnated": r.stagnated,
        "iterations": r.iterations,
        "switch_iteration": r.switch_iteration,
        "residual": r.residual,
        "lambda": r.lam,
        "mu": r.mu,
        "x": np.asarray(r.x),
    }


def write_history(path: str, result, m: int) -> None:
    header = ["iter", "residual", "lambda_re", "lambda_im"]
    for i in range(1, m + 1):
        header += [f"mu{i}_re", f"mu{i}_im"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k, res, lam, mu in result.history:
            row = [k, repr(float(res)), repr(float(np.real(lam))), repr(float(np.imag(lam)))]
            for u in mu:
                row += [repr(float(np.real(u))), repr(float(np.imag(u)))]
            w.writerow(row)


def cmd_gen(args) -> int:
    if args.kind == "random":
        p, g = gen_random(args.n, args.m, args.seed)
    else:
        p = gen_pde(PdeSpec(n=args.n, gamma=args.gamma))
        g = random_g(p.n, p.m, args.seed)
    try:
        write_problem(args.out, p, g)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from exc
    print(f"N_s = {count_solutions(p.n, p.m)}")
    return EXIT_OK


def cmd_solve_all(args) -> int:
    t0 = time.perf_counter()
    p, g = _load(args.problem, args.g_seed)
    t1 = time.perf_counter()
    sol = solve_all(p, g=g, tol_accept=args.tol)
    t2 = time.perf_counter()
    records = sorted(sol.records, key=lambda r: abs(r.lam))
    counts = {}
    for r in records:
        counts[r.classification.value] = counts.get(r.classification.value, 0) + 1
    report = {
        "solver": "solve-all",
        "version": nepv.__version__,
        "config": {"problem": args.problem, "g_seed": args.g_seed, "tol_accept": args.tol, "g": g},
        "n": p.n,
        "m": p.m,
        "bound": count_solutions(p.n, p.m),
        "gep_size": sol.deltas.N,
        "delta0_nonsingular": sol.deltas.nonsingular.value,
        "delta0_cond_estimate": sol.deltas.cond_estimate,
        "counts": counts,
        "results": [r.to_dict() for r in records],
        "timings": {"read": t1 - t0, "solve": t2 - t1},
    }
    write_json(args.out, report)
    for r in records:
        print(f"{r.lam.real:+.10g} {r.lam.imag:+.10g}i  {r.classification.value:12s} residual {r.residual:.2e}")
    print(", ".join(f"{k}: {v}" for k, v in counts.items()))
    return EXIT_OK


def cmd_iterate(args) -> int:
    t0 = time.perf_counter()
    p, g = _load(args.problem, args.g_seed)
    x0 = load_x0(args.x0, p.n)
    mep = build_mep(p, g)
    t1 = time.perf_counter()
    ii_cfg = IiConfig(sigma=args.sigma, x0=x0, max_iter=args.max_iter, tol=args.tol, path=args.path)
    ri_cfg = RiConfig(sigma=args.sigma, x0=x0, max_iter=args.max_iter, tol=args.tol)
    if args.method == "ris":
        result = ris_solve(mep, ri_cfg)
    elif args.method == "ri":
        result = ri_solve(mep, ri_cfg)
    elif args.method == "ii":
        result = ii_solve(p, mep, ii_cfg)
    else:
        result = hybrid_solve(p, mep, ii_cfg, args.k_switch, ri_cfg)
    t2 = time.perf_counter()
    if args.history:
        try:
            write_history(args.history, result, p.m)
        except OSError as exc:
            raise InputError(f"cannot write {args.history}: {exc}") from exc
    report = {
        "solver": args.method,
        "version": nepv.__version__,
        "config": {
            "problem": args.problem,
            "sigma": args.sigma,
            "x0": args.x0,
            "k_switch": args.k_switch if args.method == "hybrid" else None,
            "max_iter": args.max_iter,
            "tol": args.tol,
            "path": args.path,
            "g_seed": args.g_seed,
        },
        "results": _result_dict(result),
        "timings": {"setup": t1 - t0, "solve": t2 - t1},
    }
    write_json(args.out, report)
    lam = result.lam
    print(
        f"converged={str(result.converged).lower()} iterations={result.iterations} "
        f"lambda={lam.real:+.12g}{lam.imag:+.3g}i residual={result.residual:.3e}"
    )
    return EXIT_OK


def cmd_count(args) -> int:
    print(count_solutions(args.n, args.m))
    return EXIT_OK


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonnegative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nepv", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"nepv {nepv.__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a seeded problem file")
    gen.add_argument("kind", choices=["random", "pde"])
    gen.add_argument("--n", type=_positive, default=None, help="size (default 5 random, 100 pde)")
    gen.add_argument("--m", type=_positive, default=1, help="number of nonlinear terms (random)")
    gen.add_argument("--seed", type=_nonnegative, default=0, help="seed for data and g (default 0)")
    gen.add_argument("--gamma", type=float, default=10.0, help="Gaussian width in the pde weight")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    sa = sub.add_parser("solve-all", help="all solutions by the dense linearization")
    sa.add_argument("problem")
    sa.add_argument("--g-seed", type=_nonnegative, default=None, help="replace the file's g")
    sa.add_argument("--tol", type=float, default=nepv.core.TOL_ACCEPT, help="acceptance residual")
    sa.add_argument("--out", default=None, help="JSON report path")
    sa.set_defaults(func=cmd_solve_all)

    it = sub.add_parser("iterate", help="one solution by an iterative method")
    it.add_argument("problem")
    it.add_argument("--method", choices=["ri", "ris", "ii", "hybrid"], default="ris")
    it.add_argument("--sigma", type=parse_complex, required=True, help="shift as RE,IM")
    it.add_argument("--x0", default="random:0", help="random:SEED or a JSON vector file")
    it.add_argument("--k-switch", type=_nonnegative, default=5, help="II steps before RIS (hybrid)")
    it.add_argument("--max-iter", type=_nonnegative, default=100)
    it.add_argument("--tol", type=float, default=1e-10)
    it.add_argument("--path", choices=PATHS, default="auto", help="II linear solver")
    it.add_argument("--g-seed", type=_nonnegative, default=None, help="replace the file's g")
    it.add_argument("--history", default=None, help="CSV convergence history path")
    it.add_argument("--out", default=None, help="JSON report path")
    it.set_defaults(func=cmd_iterate)

    cnt = sub.add_parser("count", help="generic number of solutions")
    cnt.add_argument("--n", type=_positive, required=True)
    cnt.add_argument("--m", type=_positive, required=True)
    cnt.set_defaults(func=cmd_count)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "gen" and args.n is None:
        args.n = 5 if args.kind == "random" else 100
    try:
        if args.command == "gen" and args.kind == "random" and args.n < 2:
            parser.error("random problems need --n >= 2")
        if args.command == "gen" and args.kind == "pde" and args.n < 3:
            parser.error("pde problems need --n >= 3")
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MemoryBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NepvError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
