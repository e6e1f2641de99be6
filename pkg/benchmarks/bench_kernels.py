#!/usr/bin/env python3
"""Time the pointwise nonlinearity kernels: compiled extension vs pure NumPy.

Both backends are imported directly (bypassing the import-time selection) so
they can be compared in a single process.  Each kernel is timed over a range
of array sizes spanning small solver grids up to quadrature grids of large
runs.  Usage::

    python3 benchmarks/bench_kernels.py [--repeats 7] [--q 3.0] [--p 1.0]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from wavewell._kernels import backend_name
from wavewell._kernels import pure

try:
    from wavewell._kernels import _pointwise as compiled
except ImportError:
    compiled = None

SIZES = (256, 1024, 4096, 16384)


def _bench(fn, *args, repeats: int) -> float:
    """Best-of-N per-call time in microseconds."""
    calls = max(1, int(2e5 / args[0].size))
    timer = timeit.Timer(lambda: fn(*args))
    best = min(timer.repeat(repeat=repeats, number=calls))
    return best / calls * 1e6


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--q", type=float, default=3.0)
    parser.add_argument("--p", type=float, default=1.0)
    args = parser.parse_args()

    print(f"default backend at import time: {backend_name()}")
    if compiled is None:
        print("compiled extension not importable; showing pure-NumPy times only")

    kernels = {
        "log_source": lambda mod, u, v: mod.log_source(u, args.q),
        "damping": lambda mod, u, v: mod.damping(v, args.p),
        "abs_pow_log": lambda mod, u, v: mod.abs_pow_log(u, args.q),
        "rhs_pointwise": lambda mod, u, v: mod.rhs_pointwise(u, v, args.q, args.p),
    }

    header = f"{'kernel':<14} {'n':>7} {'pure (us)':>11}"
    if compiled is not None:
        header += f" {'compiled (us)':>14} {'speedup':>8}"
    print(header)
    print("-" * len(header))

    rng = np.random.default_rng(0)
    for name, call in kernels.items():
        for n in SIZES:
            u = rng.standard_normal(n)
            v = rng.standard_normal(n)
            t_pure = _bench(lambda u=u, v=v: call(pure, u, v), u, repeats=args.repeats)
            row = f"{name:<14} {n:>7} {t_pure:>11.2f}"
            if compiled is not None:
                t_comp = _bench(
                    lambda u=u, v=v: call(compiled, u, v), u, repeats=args.repeats
                )
                row += f" {t_comp:>14.2f} {t_pure / t_comp:>7.2f}x"
            print(row)


if __name__ == "__main__":
    main()
