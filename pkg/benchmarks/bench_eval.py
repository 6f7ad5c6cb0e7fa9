#!/usr/bin/env python3
"""Benchmark the batched evaluation kernels: numba loops vs numpy gufuncs.

Runs each kernel on seeded workloads of growing point counts and prints a
table of per-call times and the numba/numpy speedup.  The active backend
follows LONGRES_BACKEND; when numba is inactive the "loop" column is the
plain-Python fallback, which makes the comparison honest about what the
env flag actually buys.

Usage: python benchmarks/bench_eval.py [--points 100 1000 10000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from longresolvent._backend import BACKEND
from longresolvent import _kernels
from longresolvent.verify import gen_instance


def timeit(fn, repeat):
    fn()  # warm (and JIT-compile on the numba path)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(n_points):
    rng = np.random.default_rng(0)
    zeta = 0.85 * np.sqrt(rng.uniform(size=(n_points, 3))) * np.exp(
        2j * np.pi * rng.uniform(size=(n_points, 3)))
    z = (1.0 + zeta) / (1.0 - zeta)

    pcl = gen_instance("pencil_nonhomogeneous", seed=1, d=3, n=3, m=4)
    gr = gen_instance("gr_unitary", seed=2, d=3, n=3, m=9)
    hg = gen_instance("herglotz_realization", seed=3, d=3, n=3, m=9)
    exps = np.array([a for a in np.ndindex(3, 3, 3) if sum(a) <= 3],
                    dtype=np.int64)
    coefs = (rng.standard_normal((len(exps), 3, 3))
             + 1j * rng.standard_normal((len(exps), 3, 3)))

    A0 = pcl.coefficients[0]
    Ak = np.stack(pcl.coefficients[1:])
    w_gr = np.repeat(zeta, gr.state_dims, axis=1)
    w_hg = np.repeat(zeta, hg.state_dims, axis=1)

    return [
        ("pencil_schur", lambda: _kernels._pencil_eval_nb(
            A0.astype(complex), Ak.astype(complex), 3,
            np.ascontiguousarray(z)),
         lambda: _kernels._pencil_eval_np(A0, Ak, 3, z)),
        ("gr_transfer", lambda: _kernels._gr_transfer_nb(
            *(np.ascontiguousarray(np.asarray(M, dtype=complex))
              for M in (gr.A, gr.B, gr.C, gr.D)),
            np.ascontiguousarray(w_gr)),
         lambda: _kernels._gr_transfer_np(gr.A, gr.B, gr.C, gr.D, w_gr)),
        ("herglotz", lambda: _kernels._herglotz_eval_nb(
            np.ascontiguousarray(hg.beta), np.ascontiguousarray(hg.W),
            np.ascontiguousarray(hg.V), np.ascontiguousarray(w_hg)),
         lambda: _kernels._herglotz_eval_np(hg.beta, hg.W, hg.V, w_hg)),
        ("poly_eval", lambda: _kernels._poly_eval_nb(
            exps, np.ascontiguousarray(coefs), np.ascontiguousarray(zeta)),
         lambda: _kernels._poly_eval_np(exps, coefs, zeta)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, nargs="+",
                    default=[100, 1000, 10000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    loop_label = "numba" if BACKEND == "numba" else "pyloop"
    print(f"active backend: {BACKEND}")
    print(f"{'kernel':<14}{'points':>8}{loop_label:>12}{'numpy':>12}"
          f"{'speedup':>10}")
    for n_points in args.points:
        for name, loop_fn, np_fn in workloads(n_points):
            t_loop = timeit(loop_fn, args.repeat)
            t_np = timeit(np_fn, args.repeat)
            print(f"{name:<14}{n_points:>8}{t_loop * 1e3:>10.2f}ms"
                  f"{t_np * 1e3:>10.2f}ms{t_np / t_loop:>10.2f}x")


if __name__ == "__main__":
    main()
