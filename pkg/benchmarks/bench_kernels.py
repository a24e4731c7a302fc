"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is called
on the same inputs through both backends; the table reports the best of
several repeats and the speedup of the compiled core.
"""

import argparse
import timeit

import numpy as np

from neumann_lens._kernels import _fallback

try:
    from neumann_lens._kernels import _core
except ImportError:
    _core = None


def cases(M: int):
    rng = np.random.default_rng(0)
    edge = rng.uniform(0.5, 2.0, M)
    mass = rng.uniform(0.5, 2.0, M + 1)
    rhs = rng.standard_normal(M + 1)
    rhs -= np.dot(mass, rhs) / mass.sum()
    w = rng.standard_normal(M + 1)
    return {
        "neumann_solve": lambda k: k.neumann_solve(edge, mass, rhs),
        "balance_residual": lambda k: k.balance_residual(w, mass, 3.0, 0.1),
        "bisect_shift": lambda k: k.bisect_shift(w, mass, 3.0, -w.max(), -w.min(), 200),
        "rk4_radial p=3": lambda k: k.rk4_radial(1.0, 4.21 / M, M, -2.3, 0.0, 3.0, 4, 1e100, 1e-12),
        "rk4_radial p=0": lambda k: k.rk4_radial(1.0, 4.21 / M, M, -0.5, 0.0, 0.0, 4, 1e100, 1e-12),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled core not built; only the fallback is timed")
    print(f"M = {args.M}")
    print(f"{'kernel':<18} {'cython [ms]':>12} {'python [ms]':>12} {'speedup':>9}")
    for name, call in cases(args.M).items():
        py = min(timeit.repeat(lambda: call(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _core is not None:
            cy = min(timeit.repeat(lambda: call(_core), number=3, repeat=args.repeat)) / 3 * 1e3
            print(f"{name:<18} {cy:12.3f} {py:12.3f} {py / cy:9.1f}")
        else:
            print(f"{name:<18} {'-':>12} {py:12.3f} {'-':>9}")


if __name__ == "__main__":
    main()
