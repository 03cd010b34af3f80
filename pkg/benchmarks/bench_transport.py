"""Compiled vs pure-Python transport kernel on random transportation problems.

    python3 benchmarks/bench_transport.py [--sizes 4,8,16,32] [--reps 200]

Both kernels solve the same instances; the script checks they agree and
prints the mean time per solve and the speedup.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from orchid.transport import _kernel_py

try:
    from orchid.transport import _kernel as _compiled
except ImportError:
    _compiled = None


def instances(size: int, reps: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(reps):
        a = rng.random(size)
        b = rng.random(size)
        a /= a.sum()
        b /= b.sum()
        cost = rng.integers(1, 4, size=(size, size))
        yield a, b, cost


def timed(solve, cases) -> tuple[float, list[float]]:
    values = []
    t0 = time.perf_counter()
    for a, b, cost in cases:
        values.append(solve(a, b, cost)[0])
    return (time.perf_counter() - t0) / len(cases), values


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="4,8,16,32")
    parser.add_argument("--reps", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _compiled is None:
        print("compiled kernel not built; only the Python kernel is timed")
    print(f"{'size':>5} {'python ms':>10} {'cython ms':>10} {'speedup':>8} {'max diff':>9}")
    for size in (int(s) for s in args.sizes.split(",")):
        cases = list(instances(size, args.reps, args.seed))
        t_py, v_py = timed(_kernel_py.solve, cases)
        if _compiled is None:
            print(f"{size:>5} {t_py * 1e3:>10.4f} {'-':>10} {'-':>8} {'-':>9}")
            continue
        t_c, v_c = timed(_compiled.solve, cases)
        diff = max(abs(x - y) for x, y in zip(v_py, v_c))
        print(f"{size:>5} {t_py * 1e3:>10.4f} {t_c * 1e3:>10.4f} {t_py / t_c:>7.1f}x {diff:>9.1e}")


if __name__ == "__main__":
    main()
