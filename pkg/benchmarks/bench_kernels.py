"""Benchmark the compiled pair-sum kernels against the numpy fallback.

The energy, weak action, and gradient are all O(n^2) in the node count and
dominate every solver iteration; this script times both implementations on
the two reference instances and prints the speedup.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from subspec import _corepy
from subspec.grid import BOX, GAUGE_BALL, DomainSpec, build_grid
from subspec.groups import GroupConfig
from subspec.kernel import FracParams, assemble

try:
    from subspec import _core
except ImportError:
    _core = None


def best_of(repeats, fn, *args):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_instance(label, K, p, repeats):
    rng = np.random.default_rng(0)
    u = rng.standard_normal(K.n)
    v = rng.standard_normal(K.n)
    print(f"\n{label}: n = {K.n}, p = {p}")
    header = f"  {'kernel':<12} {'numpy':>10} {'cython':>10} {'speedup':>9}"
    print(header)
    cases = [
        ("energy", (K.w, K.b, u, p)),
        ("weak_action", (K.w, K.b, u, v, p)),
        ("gradient", (K.w, K.b, u, p)),
    ]
    for name, args in cases:
        t_py = best_of(repeats, getattr(_corepy, name), *args)
        if _core is None:
            print(f"  {name:<12} {t_py * 1e3:9.3f}ms {'n/a':>10} {'n/a':>9}")
            continue
        t_cy = best_of(repeats, getattr(_core, name), *args)
        print(f"  {name:<12} {t_py * 1e3:9.3f}ms {t_cy * 1e3:9.3f}ms "
              f"{t_py / t_cy:8.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    if _core is None:
        print("compiled extension not available; showing numpy timings only")

    spec = DomainSpec(BOX, GroupConfig.abelian(1), lo=[-1.0], hi=[1.0])
    grid = build_grid(spec, 1.0 / 128.0)
    K = assemble(grid, FracParams(0.4, 2.0, 1))
    for p in (1.5, 2.0, 3.0):
        bench_instance("interval (-1,1), h=1/128", K, p, args.repeats)

    spec = DomainSpec(GAUGE_BALL, GroupConfig.heisenberg(1), radius=1.0)
    grid = build_grid(spec, 0.15)
    K = assemble(grid, FracParams(0.5, 2.0, 4))
    for p in (2.0, 3.0):
        bench_instance("Heisenberg(1) unit ball, h=0.15", K, p, args.repeats)


if __name__ == "__main__":
    main()
