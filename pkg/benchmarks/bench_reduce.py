"""Compare the compiled and pure-Python boundary reduction kernels.

    python benchmarks/bench_reduce.py [--sizes 100 500 2000] [--repeat 5]

Both kernels run on the same alpha filtrations; their pivot arrays must be
identical, otherwise the script exits non-zero.
"""
from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from phmht import _reduce_py
from phmht.complexes import PointCloud, alpha_filtration_2d

try:
    from phmht._reduce import reduce_columns as compiled
except ImportError:
    compiled = None


def _args(f):
    return f.boundary_indptr, f.boundary_indices, np.ascontiguousarray(f.dims, dtype=np.int64)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 500, 2000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if compiled is None:
        print("compiled kernel not built; only the pure-Python timing is shown")
    rng = np.random.default_rng(args.seed)
    print(f"{'points':>7} {'simplices':>10} {'build ms':>9} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in args.sizes:
        cloud = PointCloud(rng.uniform(size=(n, 2)))
        build = min(timeit.repeat(lambda: alpha_filtration_2d(cloud), number=1, repeat=args.repeat))
        f = alpha_filtration_2d(cloud)
        a = _args(f)
        t_py = min(timeit.repeat(lambda: _reduce_py.reduce_columns(*a), number=1, repeat=args.repeat))
        if compiled is not None:
            t_c = min(timeit.repeat(lambda: compiled(*a), number=1, repeat=args.repeat))
            if not np.array_equal(np.asarray(compiled(*a)), np.asarray(_reduce_py.reduce_columns(*a))):
                print(f"pivot mismatch at n={n}", file=sys.stderr)
                return 1
            c_ms, speed = f"{1e3 * t_c:10.3f}", f"{t_py / t_c:7.1f}x"
        else:
            c_ms, speed = f"{'-':>10}", f"{'-':>8}"
        print(f"{n:7d} {len(f):10d} {1e3 * build:9.2f} {1e3 * t_py:10.3f} {c_ms} {speed}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
