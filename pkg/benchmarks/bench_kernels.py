"""Timing of the nine-point stencil kernel: compiled backend against the numpy backend.

Every timed call is also checked for bit-identical output.  A full solve is timed
per backend at the end.

    python3 benchmarks/bench_kernels.py --sizes 128 256 512 --threads 1 4
"""
import argparse
import time
import timeit

import numpy as np

from driftgeom import geometry as geo
from driftgeom.fields import zero_nl
from driftgeom.solver import solve_elliptic_2d
from driftgeom.solver.boundary import boundary_preset
from driftgeom.solver.kernels import apply_stencil, available_backends


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_kernel(n, threads, repeat, seed=0):
    rng = np.random.default_rng(seed)
    W = np.ascontiguousarray(rng.normal(size=(9, n + 1, n + 1)))
    u = np.ascontiguousarray(rng.normal(size=(n + 1, n + 1)))
    ref = apply_stencil(W, u, backend="python")
    number = max(1, 2_000_000 // (n * n))
    rows = []
    for backend in available_backends():
        for t in threads if backend == "cython" else (1,):
            out = np.empty((n - 1, n - 1))
            same = np.array_equal(apply_stencil(W, u, out, t, backend), ref)
            sec = best_of(lambda: apply_stencil(W, u, out, t, backend), repeat, number)
            rows.append((n, backend, t, sec, same))
    return rows


def bench_solve(cells):
    m, x = geo.euclidean(2), geo.constant_field([1.0, 0.0])
    rows = []
    for backend in available_backends():
        t0 = time.perf_counter()
        sol = solve_elliptic_2d(m, x, zero_nl(), [[0, 1], [0, 1]], boundary_preset("exp_x"), cells=cells,
                                backend=backend)
        rows.append((backend, time.perf_counter() - t0, sol.iterations, sum(sol.linear_iterations)))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 2, 4])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--solve-cells", type=int, default=128)
    args = ap.parse_args(argv)

    if "cython" not in available_backends():
        print("compiled backend not built; timing numpy only")
    print(f"{'cells':>6} {'backend':>8} {'threads':>7} {'us/call':>10} {'speedup':>8} identical")
    for n in args.sizes:
        rows = bench_kernel(n, args.threads, args.repeat)
        py = next(r[3] for r in rows if r[1] == "python")
        for cells, backend, t, sec, same in rows:
            print(f"{cells:>6} {backend:>8} {t:>7} {sec * 1e6:>10.1f} {py / sec:>8.2f} {same}")
    print()
    print(f"solve e^x, {args.solve_cells} cells per side")
    for backend, sec, its, lits in bench_solve(args.solve_cells):
        print(f"  {backend:>8}: {sec:.3f} s  newton {its}  krylov {lits}")


if __name__ == "__main__":
    main()
