#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python/numpy fallback.

Times energy evaluation and one local-moving sweep at several problem
sizes, plus a full optimize() run with each backend swapped in.  Run:

    python3 benchmarks/bench_kernels.py [--sizes 1000 2000 4000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from confres import kernels
from confres.graph import build_knn_graph, derive_affinity
from confres.optimizer import OptimizeOptions, optimize


def make_graph(n, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([(0, 0), (12, 0), (0, 12), (12, 12)], dtype=float)
    pts = np.concatenate([
        c + rng.normal(0, 1.0, (n // 4, 2)) for c in centers])
    return derive_affinity(build_knn_graph(pts, k=10))


def kernel_args(graph):
    return (graph.indptr, graph.indices, graph.weights,
            graph.rep_mode, graph.rep_strength, graph.rep_denom,
            graph.rep_indptr, graph.rep_indices, graph.rep_weights)


def median_time(fn, repeats):
    fn()  # warm-up (compiles the numba variant on first call)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def bench_size(n, repeats):
    graph = make_graph(n)
    rng = np.random.default_rng(1)
    labels = rng.integers(0, 4, graph.n).astype(np.int64)
    order = rng.permutation(graph.n).astype(np.int64)
    constraint = np.zeros(graph.n, dtype=np.int64)
    args = kernel_args(graph)
    rows = []
    for name, compiled, fallback in (
            ("energy", kernels.energy_components, kernels.energy_components_py),
            ("sweep", kernels.sweep, kernels.sweep_py)):
        def run(fn):
            if name == "energy":
                return lambda: fn(*args[:3], labels, *args[3:])
            return lambda: fn(*args, 1.0, labels.copy(), constraint, order, 1e-12)
        t_c = median_time(run(compiled), repeats)
        t_py = median_time(run(fallback), repeats)
        rows.append((n, name, t_c, t_py))
    # full optimizer with each backend swapped in
    saved = kernels.sweep
    try:
        t_c = median_time(lambda: optimize(graph, 1.0, OptimizeOptions(seed=0)),
                          repeats)
        kernels.sweep = kernels.sweep_py
        t_py = median_time(lambda: optimize(graph, 1.0, OptimizeOptions(seed=0)),
                           repeats)
    finally:
        kernels.sweep = saved
    rows.append((n, "optimize", t_c, t_py))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[1000, 2000, 4000])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    backend = "numba" if kernels.NUMBA_ENABLED else "pure python (numba disabled)"
    print(f"compiled backend: {backend}")
    print(f"{'n':>6}  {'kernel':<10}{'compiled':>12}{'fallback':>12}{'speedup':>9}")
    for n in args.sizes:
        for n_, name, t_c, t_py in bench_size(n, args.repeats):
            print(f"{n_:>6}  {name:<10}{t_c * 1e3:>10.2f}ms"
                  f"{t_py * 1e3:>10.2f}ms{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
