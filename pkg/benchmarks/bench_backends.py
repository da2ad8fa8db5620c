"""Compare the compiled and numpy kernel backends on the hot loops.

    python benchmarks/bench_backends.py [--repeat 5]

Times ``kernel_matrix`` on an oracle-size grid and ``weighted_kernel_sum``
for Gram / cross-covariance assembly with integral functionals, and checks
that both backends agree.
"""
import argparse
import time

import numpy as np

from opgp._backend import available_backends
from opgp.functionals import AtomStack, LinearFunctional, fourier_functionals


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    grid = np.linspace(-1, 1, 4001)
    fs = ([LinearFunctional.point(s) for s in (-0.6, 0.15, 0.7)]
          + [LinearFunctional.integral()] + fourier_functionals(16)
          + [LinearFunctional.deriv(0.0)])
    stack = AtomStack(fs)
    args = (0, 0.4, 1.0)
    yield "kernel_matrix 4001x4001", lambda core: core.kernel_matrix(grid, grid, *args, 0, 0)
    yield "kernel_matrix (1,1) 4001x4001", lambda core: core.kernel_matrix(grid, grid, *args, 1, 1)
    yield (f"cross-cov {stack.p} functionals x 4001",
           lambda core: core.weighted_kernel_sum(stack.xs, stack.ws, stack.owner, stack.ds,
                                                 grid, 0, stack.p, *args))
    yield (f"gram {stack.xs.size} atoms",
           lambda core: core.weighted_kernel_sum(stack.xs, stack.ws, stack.owner, stack.ds,
                                                 stack.xs, 0, stack.p, *args))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = available_backends()
    names = sorted(backends)
    print(f"{'case':<36}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}  max|diff|")
    for label, fn in cases():
        times, outs = {}, {}
        for name in names:
            times[name], outs[name] = best_of(lambda: fn(backends[name]), args.repeat)
        row = f"{label:<36}" + "".join(f"{times[n] * 1e3:>10.1f}ms" for n in names)
        if "cython" in times:
            diff = np.max(np.abs(outs["cython"] - outs["python"]))
            row += f"{times['python'] / times['cython']:>9.1f}x  {diff:.1e}"
        print(row)


if __name__ == "__main__":
    main()
