"""Compare the compiled core against the NumPy fallback on the two hot loops.

    python benchmarks/bench_core.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from treegibbs import _pycore
from treegibbs.grid import build_rule, dense_grid
from treegibbs.kernels import build_family
from treegibbs.kernels.catalog import _k3_factors

try:
    from treegibbs import _core
except ImportError:
    _core = None


def scan_case():
    left_fn, right_fn = _k3_factors()
    grid = dense_grid()
    return np.ascontiguousarray(left_fn(grid)), np.ascontiguousarray(right_fn(grid))


def iterate_case(nodes):
    kern = build_family("k_ge4_family", build_rule(nodes), k=4)
    return kern.weighted, kern.zero_weighted, np.linspace(0.5, 1.5, nodes)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _pycore)] + ([("compiled", _core)] if _core is not None else [])
    left, right = scan_case()
    cases = [("dense scan 1001x1001", lambda m: m.lowrank_extremes(left, right))]
    for n in (200, 800):
        kw, zw, f0 = iterate_case(n)
        cases.append((f"iterate N={n}", lambda m, kw=kw, zw=zw, f0=f0:
                      m.iterate_composed(kw, zw, f0, 4, 1.0, 1e-12, 200, 1e100)))
    print(f"{'case':24s}" + "".join(f"{name:>14s}" for name, _ in backends) + "   speedup")
    for label, fn in cases:
        times = []
        for _, mod in backends:
            fn(mod)
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)))
        line = f"{label:24s}" + "".join(f"{t * 1e3:12.2f}ms" for t in times)
        if len(times) == 2:
            line += f"   {times[0] / times[1]:6.2f}x"
        print(line)
        if len(backends) == 2:
            a, b = fn(_pycore), fn(_core)
            # last entry of the iteration tuple is the final step size, itself a rounding-level quantity
            n = 4 if len(a) == 6 and isinstance(a[0], np.ndarray) else len(a)
            same = all(np.allclose(x, y, rtol=1e-12, atol=0) if x is not None else y is None
                       for x, y in zip(a[:n], b[:n]))
            print(f"{'':24s}results agree: {same}")


if __name__ == "__main__":
    main()
