"""Time the hot kernels and a full trajectory under each available backend.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""
import argparse
import json
import timeit

import numpy as np

from sbmgrowth import _kernels
from sbmgrowth.core import ModelParams, Population, SeedSpec
from sbmgrowth.dynamics import run_trajectory

PARITY = ModelParams.from_matrices([[0.75, 0.25], [0.25, 0.75]], [[1.0, 100.0], [100.0, 1.0]], 0.1)


def make_cases(rng):
    n = 200_000
    slots = np.sort(rng.integers(0, n * (n + 1) // 2, 300_000))
    i = rng.integers(0, n, 400_000)
    j = rng.integers(0, n, 400_000)
    i, j = np.minimum(i, j), np.maximum(i, j)
    w = rng.choice([1.0, 100.0], 400_000)
    weights = rng.exponential(size=n)
    prob, alias = _kernels.backend_module("python").alias_build(weights)
    idx = rng.integers(0, n, 500_000)
    coin = rng.random(500_000)
    ep = rng.uniform(0.05, 0.9, 18)
    er = rng.uniform(0, 2, 18)
    eb = rng.uniform(0, 2, 18)
    return {
        "triangle_decode": lambda k: k.triangle_decode(slots),
        "weighted_degrees": lambda k: k.weighted_degrees(n, i, j, w),
        "alias_build": lambda k: k.alias_build(weights),
        "alias_draw": lambda k: k.alias_draw(prob, alias, idx, coin),
        "enumerate_ratio (2^18)": lambda k: k.enumerate_ratio(ep, er, eb),
    }


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--t-max", type=int, default=60, help="rounds in the end-to-end trajectory")
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    backends = _kernels.available_backends()
    cases = make_cases(np.random.default_rng(0))
    results = {}
    before = _kernels.BACKEND
    try:
        for name in backends:
            mod = _kernels.backend_module(name)
            for label, fn in cases.items():
                results.setdefault(label, {})[name] = best_of(lambda: fn(mod), args.repeat)
            _kernels.use_backend(name)
            label = f"trajectory ({args.t_max} rounds)"
            results.setdefault(label, {})[name] = best_of(
                lambda: run_trajectory(Population(5, 65), PARITY, args.t_max, SeedSpec(0)), args.repeat
            )
    finally:
        _kernels.use_backend(before)

    header = f"{'kernel':28s}" + "".join(f"{b:>12s}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label, row in results.items():
        line = f"{label:28s}" + "".join(f"{row[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) == 2:
            line += f"{row['python'] / row['cython']:9.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
