"""Time the numba kernels against their numpy fallbacks on random chordal patterns.

Usage: python3 benchmarks/bench_kernels.py [--sizes 50 100 200] [--repeat 5]
"""
import argparse
import time

import numpy as np

from csdp import _kernels
from csdp.graph import Graph, chordal_extension, mcs
from csdp.sparse import CholeskyFactor


def random_chordal(rng, n, extra=2.0):
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    edges += [(int(a), int(b)) for a, b in rng.integers(0, n, size=(int(extra * n), 2)) if a != b]
    return chordal_extension(Graph.from_edges(n, edges), "min-degree")


def cases(g, rng):
    n = g.n
    adj = g.adjacency_matrix()
    indptr = np.concatenate([[0], np.cumsum([len(a) for a in g.adjacency])])
    indices = np.fromiter((v for a in g.adjacency for v in a), np.int64)
    order = mcs(g)
    pos = order.position
    perm = np.asarray(order.perm)
    higher = tuple(tuple(sorted(int(pos[u]) for u in g.adjacency[v] if pos[u] > pos[v])) for v in perm)
    ptr, idx = CholeskyFactor(order, np.zeros((n, n)), higher).pattern_ptr()
    mask = adj.astype(bool) | np.eye(n, dtype=bool)
    B = rng.standard_normal((n, n))
    Z = np.where(mask, B @ B.T + n * np.eye(n), 0.0)[np.ix_(perm, perm)]
    L, _ = _kernels.NUMPY_KERNELS["cholesky"](Z.copy(), ptr, idx, 1e-8, 1e-12)
    return {
        "mcs": (indptr, indices, n),
        "eliminate": (adj.astype(np.bool_), np.arange(n, dtype=np.int64), True),
        "cholesky": (Z, ptr, idx, 1e-8, 1e-12),
        "projected_inverse": (L, ptr, idx),
    }


def best_time(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        fresh = tuple(a.copy() if isinstance(a, np.ndarray) else a for a in args)
        t = time.perf_counter()
        fn(*fresh)
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy kernels can be timed")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18}{'n':>6}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in args.sizes:
        for name, kargs in cases(random_chordal(rng, n), rng).items():
            jit = _kernels.JIT_KERNELS[name]
            jit(*tuple(a.copy() if isinstance(a, np.ndarray) else a for a in kargs))  # compile
            t_np = best_time(_kernels.NUMPY_KERNELS[name], kargs, args.repeat)
            t_jit = best_time(jit, kargs, args.repeat)
            print(f"{name:<18}{n:>6}{1e3 * t_np:>12.3f}{1e3 * t_jit:>12.3f}{t_np / t_jit:>10.1f}")


if __name__ == "__main__":
    main()
