"""Compare the numba and numpy kernel backends.

Kernel timings run both implementations in-process; the end-to-end solve
for the numpy backend runs in a subprocess with QISDP_DISABLE_NUMBA=1 so the
solver picks that path up at import time.

    python3 benchmarks/bench_backends.py [--sizes 50,100,200] [--solve-n 60]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from qisdp import _kernels
from qisdp.model import FacetIndex

SOLVE_SNIPPET = """
import json, sys
from qisdp import BACKEND, GeneratorConfig, SolverConfig, generate_instance, solve
n, iters = int(sys.argv[1]), int(sys.argv[2])
res = solve(generate_instance(GeneratorConfig(n=n, p=100, seed=0)), SolverConfig(algorithm="cd2d", max_iters=iters))
print(json.dumps({"backend": BACKEND, "bound": res.bound, "iters": res.iterations, "time_s": res.elapsed_s}))
"""


def _state(n, rng):
    a = rng.normal(size=(n + 1, n + 1))
    W = np.linalg.inv(a @ a.T + (n + 1) * np.eye(n + 1))
    W = 0.5 * (W + W.T)
    index = FacetIndex([(-1, 1)] * n)
    y = np.where(rng.random(index.m) < 0.2, -rng.random(index.m), 0.0)
    active = np.flatnonzero(y < 0).astype(np.int64)
    return W, index, y, active


def _time(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=5)) / number


def kernel_table(sizes):
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        W, index, y, active = _state(n, rng)
        args = (W, 0.1, index.lo, index.hi, index.offsets, y, active, 1e-7)
        row = {"n": n}
        for name in ("numpy", "numba"):
            sel = getattr(_kernels, f"{name}_select")
            upd = getattr(_kernels, f"{name}_rank2_update")
            if sel is None:
                continue
            sel(*args)
            Wc = W.copy()
            upd(Wc, 1, 0.0, 0.0, 0.0)
            row[f"select_{name}_us"] = 1e6 * _time(lambda: sel(*args), 200)
            row[f"update_{name}_us"] = 1e6 * _time(lambda: upd(Wc, 3, 1e-9, 0.0, 1e-9), 200)
        rows.append(row)
    return rows


def solve_table(n, iters):
    out = []
    for disable in ("0", "1"):
        env = dict(os.environ, QISDP_DISABLE_NUMBA=disable)
        r = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET, str(n), str(iters)],
                           env=env, capture_output=True, text=True, check=True)
        out.append(json.loads(r.stdout))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,100,200")
    ap.add_argument("--solve-n", type=int, default=60)
    ap.add_argument("--solve-iters", type=int, default=5000)
    args = ap.parse_args(argv)

    print(f"numba available: {_kernels.HAVE_NUMBA}")
    print("per-call kernel time [microseconds]")
    for row in kernel_table([int(s) for s in args.sizes.split(",")]):
        print("  " + "  ".join(f"{k}={v:.1f}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    print(f"end-to-end CD2D solve, n={args.solve_n}, {args.solve_iters} iterations max")
    for r in solve_table(args.solve_n, args.solve_iters):
        print(f"  backend={r['backend']:5s} bound={r['bound']:.9f} iters={r['iters']} time_s={r['time_s']:.3f}")


if __name__ == "__main__":
    main()
