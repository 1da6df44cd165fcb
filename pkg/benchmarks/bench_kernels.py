"""Compare the compiled and pure-Python clique kernels on random graphs.

Usage: python3 benchmarks/bench_kernels.py [--sizes 60 120 200] [--density 0.7]
"""

import argparse
import time

import numpy as np

from kingcode import _clique_py

try:
    from kingcode import _clique as _compiled
except ImportError:
    _compiled = None


def random_graph(n, p, rng):
    upper = np.triu(rng.random((n, n)) < p, 1)
    return upper | upper.T


def timed(fn, adj, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(adj)
        best = min(best, time.perf_counter() - start)
    return best, len(out)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[60, 120, 200])
    parser.add_argument("--density", type=float, default=0.7)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if _compiled is None:
        print("compiled kernel not built; only the Python fallback is timed")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<14}{'n':>6}{'size':>6}{'python s':>12}{'compiled s':>12}{'speedup':>9}")
    for n in args.sizes:
        adj = random_graph(n, args.density, rng)
        for name in ("greedy_clique", "max_clique"):
            t_py, size = timed(getattr(_clique_py, name), adj, args.repeat if name == "greedy_clique" else 1)
            if _compiled is None:
                print(f"{name:<14}{n:>6}{size:>6}{t_py:>12.4f}{'-':>12}{'-':>9}")
                continue
            t_c, size_c = timed(getattr(_compiled, name), adj, args.repeat if name == "greedy_clique" else 1)
            assert size_c == size
            print(f"{name:<14}{n:>6}{size:>6}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}")


if __name__ == "__main__":
    main()
