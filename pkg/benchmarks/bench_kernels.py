"""Time the compiled and numpy kernels on identical inputs.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from steertrust import kernels
from steertrust.operators import build_basis, random_density_matrix
from steertrust.trust import sample_actual


def _inputs(seed=0):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((20000, 5))
    h /= np.linalg.norm(h, axis=1, keepdims=True)
    targets = rng.uniform(1e-4, 0.1, size=h.shape[0])

    d, samples = 5, 200
    basis = build_basis(d)
    rhos = np.array([random_density_matrix(d, rng).matrix for _ in range(samples)])
    taus = np.array([sample_actual(basis, 0.01, rng) for _ in range(samples)])

    F = rng.standard_normal((10, 3, 4, 4)) + 1j * rng.standard_normal((10, 3, 4, 4))
    F = (F + np.swapaxes(F, -1, -2).conj()) / 2
    return {
        "calibrate_angles": (h, targets),
        "fact1_statistics": (rhos, basis.elements, taus),
        "strategy_values": (F,),
    }


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    impls = kernels.implementations()
    if "compiled" not in impls:
        print("compiled extension not built; timing the numpy fallback only")
    inputs = _inputs()
    names = list(impls)
    print(f"{'kernel':<18}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for kernel, kargs in inputs.items():
        t = {n: best_of(getattr(impls[n], kernel), kargs, args.repeat) for n in names}
        row = f"{kernel:<18}" + "".join(f"{t[n] * 1e3:>10.2f}ms" for n in names)
        if "compiled" in t:
            row += f"{t['python'] / t['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
