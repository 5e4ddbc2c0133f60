"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from bel import kernels


def boundary_columns(n: int, density: float, seed: int = 0) -> list[list[int]]:
    rng = np.random.default_rng(seed)
    return [sorted(int(i) for i in np.flatnonzero(rng.random(j) < density)) for j in range(n)]


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


CASES = [
    ("reduce n=600 p=0.02", "reduce_columns", lambda: (boundary_columns(600, 0.02),)),
    ("reduce n=1500 p=0.01", "reduce_columns", lambda: (boundary_columns(1500, 0.01),)),
    ("census full shift s=18", "lyndon_census", lambda: ([[1, 1], [1, 1]], [1.0, 1.0], 18.0)),
    ("census golden s=26", "lyndon_census", lambda: ([[1, 1], [1, 0]], [1.0, 1.0], 26.0)),
    ("census 3-state roof s=12", "lyndon_census",
     lambda: ([[0, 1, 1], [1, 0, 1], [1, 1, 1]], [0.5, 1.0, 1.5], 12.0)),
]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    bs = kernels.backends()
    if "cython" not in bs:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
    names = sorted(bs)
    print("case\t" + "\t".join(f"{n} [s]" for n in names) + ("\tspeedup" if len(names) > 1 else ""))
    for label, fname, make in CASES:
        inputs = make()
        ref = None
        times = {}
        for n in names:
            fn = getattr(bs[n], fname)
            out = fn(*inputs)
            if ref is None:
                ref = out
            elif out != ref:
                raise SystemExit(f"{label}: backends disagree")
            times[n] = best_of(lambda: fn(*inputs), args.repeat)
        row = [label] + [f"{times[n]:.4f}" for n in names]
        if "cython" in times:
            row.append(f"{times['python'] / times['cython']:.1f}x")
        print("\t".join(row))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
