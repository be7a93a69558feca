"""Compare the compiled and numpy Cauchy-sum kernels on one disc grid.

    python3 benchmarks/bench_cauchy.py [--n-r 64] [--targets 500] [--repeat 3]
"""
import argparse
import time

import numpy as np

from conedbar import kernels
from conedbar.quadrature import DiscGrid


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-r", type=int, default=64)
    p.add_argument("--targets", type=int, default=500)
    p.add_argument("--columns", type=int, default=1)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    grid = DiscGrid(1.0, args.n_r)
    nodes = grid.nodes
    values = np.stack([np.exp(-np.abs(nodes) ** 2) * nodes ** k for k in range(args.columns)], axis=1)
    targets = np.sqrt(rng.random(args.targets)) * np.exp(2j * np.pi * rng.random(args.targets))
    tv = np.zeros((args.targets, args.columns), dtype=complex)
    w = grid.weights

    print(f"nodes={nodes.size} targets={args.targets} columns={args.columns}")
    t_np, ref = best_time(lambda: kernels.cauchy_sum_numpy(nodes, w, values, targets, tv), args.repeat)
    print(f"numpy   {t_np:8.3f} s")
    if kernels._cauchy_sum_ext is None:
        print("cython  (extension not built)")
        return 0
    t_cy, out = best_time(lambda: np.asarray(kernels._cauchy_sum_ext(nodes, w, values, targets, tv, 1e-13)), args.repeat)
    diff = float(np.max(np.abs(out - ref)) / np.max(np.abs(ref)))
    print(f"cython  {t_cy:8.3f} s   speedup {t_np / t_cy:5.2f}x   max rel diff {diff:.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
