"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--paths N] [--repeat R]

Reports paths per second for both engines and checks that both backends
produce identical paths.
"""

import argparse
import time

import numpy as np

from singdrift.config import load_catalog
from singdrift.simulate import BACKEND, simulate_timechange, simulate_walk

CASES = [("walk", simulate_walk, "skew-bm", dict(dt=1e-3)),
         ("walk", simulate_walk, "bessel-1.5", dict(dt=1e-3)),
         ("timechange", simulate_timechange, "skew-bm", dict(dt=1e-3, h=0.02)),
         ("timechange", simulate_timechange, "bessel-1.5", dict(dt=1e-3, h=0.02))]


def run(sim, s, n, backend):
    t0 = time.perf_counter()
    X = np.concatenate([b.X for b in sim(s, n, terminal_only=True, batch_size=n, backend=backend)])
    return time.perf_counter() - t0, X


def best(sim, s, n, backend, repeat):
    times, X = [], None
    for _ in range(repeat):
        sec, X = run(sim, s, n, backend)
        times.append(sec)
    return min(times), X


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if BACKEND != "compiled":
        raise SystemExit("compiled kernels are not built; run pip install -e . --no-build-isolation")
    print(f"{'engine':11s} {'scenario':11s} {'python p/s':>11s} {'compiled p/s':>13s} {'speedup':>8s}  same")
    for engine, sim, name, over in CASES:
        s = load_catalog(name).scenario.replace(seed=1, **over)
        run(sim, s, 2, "compiled")  # build and cache the tables outside the timing
        tp, xp = best(sim, s, args.paths, "python", max(1, args.repeat // 3))
        tc, xc = best(sim, s, args.paths, "compiled", args.repeat)
        same = np.array_equal(xp, xc, equal_nan=True)
        print(f"{engine:11s} {name:11s} {args.paths / tp:11.1f} {args.paths / tc:13.1f} "
              f"{tp / tc:7.1f}x  {same}")


if __name__ == "__main__":
    main()
