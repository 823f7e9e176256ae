"""Compare the compiled and numpy implementations of the hot loops.

    python3 benchmarks/bench_kernels.py [--n 1024] [--m 1024] [--d 2] [--repeat 5]

Reports the best wall time of each kernel per backend and the largest
relative disagreement between the two.
"""

import argparse
import time

import numpy as np

from cfgen import _backend, _pykernels
from cfgen.numkit import RngStream

try:
    from cfgen import _ckernels
except ImportError:
    _ckernels = None


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1024, help="generator batch size")
    p.add_argument("--m", type=int, default=1024, help="number of frequencies")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--pairs-n", type=int, default=4000, help="rows per sample for the pairwise kernel sum")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--threads", type=int, default=_backend.num_threads())
    args = p.parse_args(argv)

    s = RngStream(0)
    Y = s.split("Y").normal((args.n, args.d))
    W = 2.0 * s.split("W").normal((args.m, args.d))
    A, B = s.split("A").normal(args.m), s.split("B").normal(args.m)
    X1 = s.split("X1").normal((args.pairs_n, args.d))
    X2 = s.split("X2").normal((args.pairs_n, args.d))
    inv_bw = 1.0 / np.array([0.02, 0.5, 1.0, 5.0, 100.0])
    wts = np.full(5, 0.2)

    cases = {
        "feature_sums": lambda k: k.feature_sums(Y, W, args.threads),
        "feature_grad": lambda k: k.feature_grad(Y, W, A, B, args.threads),
        "pair_kernel_sum": lambda k: k.pair_kernel_sum(X1, X2, inv_bw, wts, False, False, args.threads),
    }
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["c"] = _ckernels
    print(f"n={args.n} m={args.m} d={args.d} pairs={args.pairs_n}^2 threads={args.threads}")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}{'max rel diff':>14}")
    for name, call in cases.items():
        times, outs = {}, {}
        for b, mod in backends.items():
            times[b], outs[b] = best_time(lambda: call(mod), args.repeat)
        row = f"{name:<16}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if "c" in backends:
            a = np.concatenate([np.ravel(x) for x in np.atleast_1d(outs["c"])])
            r = np.concatenate([np.ravel(x) for x in np.atleast_1d(outs["python"])])
            diff = np.max(np.abs(a - r) / np.maximum(np.abs(r), 1e-300))
            row += f"{times['python'] / times['c']:>9.2f}x{diff:>14.1e}"
        print(row)


if __name__ == "__main__":
    main()
