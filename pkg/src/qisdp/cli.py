"""Command line front end: ``qisdp gen|solve|bench|verify``.

Exit codes: 0 success, 1 failed verification, 2 usage or input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import logging
import os
import sys

import numpy as np

from .errors import BudgetExceeded, InfeasibleState, InstanceError, NumericalBreakdown
from .instance import GeneratorConfig, QipInstance, generate_instance, load_instance, save_instance
from .plot import line_chart_svg
from .solver import SolverConfig, solve, write_trace

log = logging.getLogger("qisdp")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

BENCH_COLUMNS = [
    "n", "p", "seed", "alg", "initial_bound", "final_bound", "iterations",
    "time_s", "reason", "fraction", "iters_to_fraction", "time_to_fraction",
]


class UsageError(Exception):
    pass


def _domain(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"domain must look like 'l,u', got {text!r}") from None
    if hi < lo + 1:
        raise argparse.ArgumentTypeError(f"domain [{lo}, {hi}] must contain at least two integers")
    return lo, hi


def _percent(text: str) -> int:
    v = int(text)
    if not 0 <= v <= 100:
        raise argparse.ArgumentTypeError(f"p must lie in [0, 100], got {v}")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iters", type=int, default=None, help="iteration cap (default 50*n*mean width)")
    p.add_argument("--sigma0", type=float, default=1.0, help="initial barrier parameter")
    p.add_argument("--sigma-min", type=float, default=1e-5, help="barrier parameter floor")
    p.add_argument("--bound-target", type=float, default=None, help="stop once the bound reaches this value")


def _solver_config(args, alg: str) -> SolverConfig:
    if args.max_iters is not None and args.max_iters < 0:
        raise UsageError("--max-iters must be nonnegative")
    try:
        return SolverConfig(
            algorithm=alg, max_iters=args.max_iters, sigma0=args.sigma0,
            sigma_min=args.sigma_min, bound_target=getattr(args, "bound_target", None),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qisdp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=_percent, required=True, help="percentage of negative eigenvalues")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--domain", type=_domain, default=(-1, 1), help="integer range 'l,u' for every variable")
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="compute a lower bound for one instance")
    s.add_argument("instance")
    s.add_argument("--alg", choices=["cd", "cd2d"], default="cd2d")
    _add_solver_flags(s)
    s.add_argument("--trace", help="write the per-iteration trace CSV here")
    s.add_argument("--plot", help="write a bound-versus-time SVG here")
    s.add_argument("--json", action="store_true", help="also print the result as JSON")

    b = sub.add_parser("bench", help="compare algorithms on generated instances")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--p", type=_int_list, default=[0, 100], help="comma-separated p values")
    b.add_argument("--seeds", type=int, default=1, help="number of seeds (0..k-1)")
    b.add_argument("--algs", default="cd,cd2d", help="comma-separated algorithms")
    b.add_argument("--domain", type=_domain, default=(-1, 1))
    b.add_argument("--fraction", type=float, default=0.99, help="fraction of total improvement to time")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", help="comparison CSV path (default stdout)")
    b.add_argument("--trace-dir", help="write one trace CSV per run here")
    b.add_argument("--plot", help="write an SVG of all bound-versus-time curves")
    _add_solver_flags(b)

    v = sub.add_parser("verify", help="run oracle checks on enumerable instances")
    v.add_argument("--instance", action="append", default=[], help="instance file (repeatable)")
    v.add_argument("--count", type=int, default=0, help="number of random instances to generate")
    v.add_argument("--n-min", type=int, default=2)
    v.add_argument("--n-max", type=int, default=8)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--alg", choices=["cd", "cd2d"], default="cd")
    v.add_argument("--max-iters", type=int, default=None)
    v.add_argument("--states", type=int, default=5, help="random dual states per instance for gradient/selection checks")
    v.add_argument("--inject-bound-offset", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


# -- subcommands ------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    inst = generate_instance(GeneratorConfig(n=args.n, p=args.p, seed=args.seed, domain=args.domain))
    save_instance(inst, args.out)
    print(f"wrote {args.out} (n={args.n}, p={args.p}, seed={args.seed})")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    cfg = _solver_config(args, args.alg)
    res = solve(inst, cfg)
    if args.trace:
        write_trace(res.trace, args.trace)
    if args.plot:
        with open(args.plot, "w", encoding="utf-8") as fh:
            fh.write(line_chart_svg({args.alg: _curve(res)}, title=os.path.basename(args.instance)))
    print(res.summary())
    if args.json:
        print(json.dumps({
            "bound": res.bound, "iterations": res.iterations, "time_s": res.elapsed_s,
            "reason": res.termination_reason, "final_sigma": res.final_sigma,
            "active_set_excess": res.active_set_excess,
        }))
    return EXIT_OK


def _curve(res):
    xs, ys, best = [0.0], [res.initial_bound], res.initial_bound
    for r in res.trace:
        best = max(best, r.bound)
        xs.append(r.elapsed_s)
        ys.append(best)
    return xs, ys


def fraction_reached(initial: float, trace, final: float, fraction: float):
    """First (iteration, elapsed) at which the bound gains ``fraction`` of ``final - initial``."""
    target = initial + fraction * (final - initial)
    if initial >= target:
        return 0, 0.0
    for r in trace:
        if r.bound >= target:
            return r.iter, r.elapsed_s
    return None, None


def _bench_cell(job):
    n, p, seed, alg, domain, cfg_kwargs, fraction, trace_dir = job
    inst = generate_instance(GeneratorConfig(n=n, p=p, seed=seed, domain=domain))
    res = solve(inst, SolverConfig(algorithm=alg, **cfg_kwargs))
    initial = res.initial_bound
    it_f, t_f = fraction_reached(initial, res.trace, res.bound, fraction)
    if trace_dir:
        write_trace(res.trace, os.path.join(trace_dir, f"trace_n{n}_p{p}_s{seed}_{alg}.csv"))
    row = {
        "n": n, "p": p, "seed": seed, "alg": alg, "initial_bound": initial, "final_bound": res.bound,
        "iterations": res.iterations, "time_s": res.elapsed_s, "reason": res.termination_reason,
        "fraction": fraction, "iters_to_fraction": it_f, "time_to_fraction": t_f,
    }
    return row, _curve(res)


def cmd_bench(args) -> int:
    algs = [a.strip() for a in args.algs.split(",") if a.strip()]
    if not algs:
        raise UsageError("--algs must name at least one algorithm")
    bad = [a for a in algs if a not in ("cd", "cd2d")]
    if bad:
        raise UsageError(f"unknown algorithm(s): {', '.join(bad)}")
    if args.n < 1 or args.seeds < 1 or not args.p:
        raise UsageError("--n and --seeds must be positive and --p non-empty")
    if not 0.0 < args.fraction <= 1.0:
        raise UsageError("--fraction must lie in (0, 1]")
    base = _solver_config(args, algs[0])
    cfg_kwargs = {"max_iters": base.max_iters, "sigma0": base.sigma0, "sigma_min": base.sigma_min,
                  "bound_target": base.bound_target}
    if args.trace_dir:
        os.makedirs(args.trace_dir, exist_ok=True)
    jobs = [(args.n, p, seed, alg, args.domain, cfg_kwargs, args.fraction, args.trace_dir)
            for p in args.p for seed in range(args.seeds) for alg in algs]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_cell, jobs))
    else:
        results = [_bench_cell(j) for j in jobs]
    results.sort(key=lambda rc: (rc[0]["p"], rc[0]["seed"], rc[0]["alg"]))

    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row, _ in results:
            w.writerow(row)
    finally:
        if args.out:
            fh.close()
    if args.plot:
        series = {f"{r['alg']} p={r['p']} s={r['seed']}": c for r, c in results}
        with open(args.plot, "w", encoding="utf-8") as out:
            out.write(line_chart_svg(series, title=f"n={args.n}"))
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import oracle
    from .model import FacetIndex, facet_matrix
    from .solver import gradient_entry, select_coordinate

    instances: list[tuple[str, QipInstance]] = [(path, load_instance(path)) for path in args.instance]
    rng = np.random.default_rng(args.seed)
    for k in range(args.count):
        n = int(rng.integers(args.n_min, args.n_max + 1))
        p = int(rng.choice([0, 50, 100]))
        instances.append((f"gen(n={n},p={p},seed={args.seed + k})",
                          generate_instance(GeneratorConfig(n=n, p=p, seed=args.seed + k))))
    if not instances:
        raise UsageError("give --instance files or --count > 0")

    failures = 0
    for name, inst in instances:
        problems = []
        try:
            opt, _ = oracle.brute_force_opt(inst)
        except BudgetExceeded as exc:
            raise UsageError(f"{name}: {exc}") from None
        res = solve(inst, SolverConfig(algorithm=args.alg, max_iters=args.max_iters))
        bound = res.bound + args.inject_bound_offset
        if bound > opt + 1e-6:
            problems.append(f"weak duality: bound {bound:.9g} > optimum {opt:.9g}")
        if not oracle.check_dual_feasible(inst, res.y, tol=0.0):
            problems.append("final dual point is not strictly feasible")

        grad_err = 0.0
        select_bad = 0
        coords = oracle.all_coords(inst.domains)
        for _ in range(args.states):
            y = oracle.random_feasible_point(inst, rng, density=float(rng.random()) * 0.5)
            sigma = float(10 ** rng.uniform(-5, 0))
            W = np.linalg.inv(oracle.dense_slack(inst, y))
            c = coords[int(rng.integers(len(coords)))]
            g = gradient_entry(W, sigma, facet_matrix(c, inst.domains))
            fd = oracle.finite_diff_gradient(inst, y, sigma, c)
            grad_err = max(grad_err, abs(fd - g) / max(1.0, abs(g)))
            a = select_coordinate(W, sigma, y, inst.domains)
            b = oracle.exhaustive_select(W, sigma, y, inst.domains)
            if (a is None) != (b is None) or (a is not None and a[0] != b[0]):
                select_bad += 1
        if grad_err > 1e-5:
            problems.append(f"gradient mismatch {grad_err:.3e}")
        if select_bad:
            problems.append(f"selection mismatch on {select_bad} state(s)")

        status = "FAIL" if problems else "ok"
        print(f"{status} {name}: bound={bound:.9g} opt={opt:.9g} iters={res.iterations} "
              f"reason={res.termination_reason} grad_err={grad_err:.2e} "
              f"active_set_excess={res.active_set_excess}")
        for msg in problems:
            print(f"    {msg}")
        failures += bool(problems)
    print(f"verified {len(instances)} instance(s), {failures} failure(s)")
    return EXIT_VERIFY if failures else EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalBreakdown, InfeasibleState) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostic", None)
        if diag:
            print(json.dumps(diag, default=str, indent=2), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
