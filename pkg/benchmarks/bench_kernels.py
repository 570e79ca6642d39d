"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --repeat 5

Each kernel is called once before timing so numba compilation is excluded.
Prints one row per (kernel, m, n) with the median time of both backends and
the speedup, after checking that the two backends agree.
"""

import argparse
import statistics
import sys
from timeit import default_timer as timer

import numpy as np

from polyineq import kernels
from polyineq.forms import SymmetricForm


def median_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = timer()
        fn()
        times.append(timer() - t0)
    return statistics.median(times)


def cases(m, n, rng):
    L = SymmetricForm.random(m, n, "real", rng)
    t = L.tensor
    x = rng.standard_normal((m, n))
    x0 = x / np.linalg.norm(x, axis=1, keepdims=True)
    pts = rng.standard_normal((256, m, n))
    return {
        "contract_tail": lambda impl: impl["contract_tail"](t, n, x[1:]),
        "contract_tail_batch": lambda impl: impl["contract_tail_batch"](t, n, pts),
        "als": lambda impl: impl["als"](t, n, m, x0, 0, 2.0, 200, 1e-12)[1],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--orders", default="2,3,4")
    ap.add_argument("--dims", default="3,6")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if kernels.numba_impl is None:
        print("numba is unavailable or disabled; nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<22}{'m':>3}{'n':>4}{'numpy [s]':>13}{'numba [s]':>13}{'speedup':>9}")
    for m in (int(v) for v in args.orders.split(",")):
        for n in (int(v) for v in args.dims.split(",")):
            for name, call in cases(m, n, rng).items():
                a, b = call(kernels.numpy_impl), call(kernels.numba_impl)
                if not np.allclose(a, b, rtol=1e-10, atol=1e-12):
                    print(f"{name} m={m} n={n}: backends disagree", file=sys.stderr)
                    return 1
                t_np = median_time(lambda: call(kernels.numpy_impl), args.repeat)
                t_nb = median_time(lambda: call(kernels.numba_impl), args.repeat)
                print(f"{name:<22}{m:>3}{n:>4}{t_np:>13.2e}{t_nb:>13.2e}{t_np / t_nb:>9.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
