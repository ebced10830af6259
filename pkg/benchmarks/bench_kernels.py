"""Time each hot kernel on the compiled and pure-Python backends.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from homeledger import kernels
from homeledger.ledger import canonical_split, genesis_block
from homeledger.localization import Workspace, grid_shape


def cases():
    g = genesis_block()
    prefix, suffix = canonical_split(1, 1, g.hash, g.payload)
    samples = np.random.default_rng(0).normal(-45.0, 2.5, 100_000)
    nx, ny = grid_shape(Workspace(), 0.01)
    ax, ay = np.array([0.0, 4.0, 0.0, 4.0]), np.array([0.0, 0.0, 3.0, 3.0])
    dist = np.hypot(ax - 1.3, ay - 2.2)
    return {
        "mine_nonce (difficulty 4)": lambda k: k.mine_nonce(prefix, suffix, 4, 16**6),
        "kalman_series (100k samples)": lambda k: k.kalman_series(samples, 1.0, 0.0, 0.0, 0.01, 1.0, 4.0, samples[0], 4.0),
        "grid_argmin (4x3 m at 0.01 m)": lambda k: k.grid_argmin(ax, ay, dist, nx, ny, 0.01),
    }


def same(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def best_of(fn, impl, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(impl)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled core not built; only the python backend is available")
    names = sorted(impls)
    print(f"{'kernel':32s}" + "".join(f"{n:>12s}" for n in names) + ("   speedup" if len(names) == 2 else ""))
    for label, fn in cases().items():
        results = {n: fn(impls[n]) for n in names}
        first, *rest = results.values()
        assert all(same(first, r) for r in rest), f"backends disagree on {label}"
        t = {n: best_of(fn, impls[n], args.repeat) for n in names}
        line = f"{label:32s}" + "".join(f"{t[n] * 1e3:10.2f}ms" for n in names)
        if len(names) == 2:
            line += f"   {t['python'] / t['cython']:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
