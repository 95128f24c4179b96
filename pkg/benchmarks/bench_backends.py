"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_backends.py [--repeat N]
"""
import argparse
import importlib.util
import time

import numpy as np

from e8frodo import _backend
from e8frodo.failure_analysis import chi_prime
from e8frodo.noise import build_chi
from e8frodo.params import get_paramset


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    a = rng.random(20000)
    b = rng.random(20000)
    num = rng.integers(-4 << 13, (4 << 13) + 1, size=(200_000, 8))
    chi = build_chi(2.8)
    r = rng.integers(0, 1 << 17, 1_000_000, dtype=np.uint32)
    thr = chi.thresholds()
    p = get_paramset("modified-sec-640")
    chi_p = build_chi(p.sigma)
    return {
        "convolve_up 2e4 x 2e4": lambda k, name: k.convolve_up(a, b),
        "suffix_sums_up 1e6": lambda k, name: k.suffix_sums_up(np.tile(a, 50)),
        "cvp_e8_batch 2e5 blocks": lambda k, name: k.cvp_e8_batch(num, 1 << 13),
        "sample_chi_batch 1e6": lambda k, name: k.sample_chi_batch(r, thr),
        "chi_prime modified-sec-640": lambda k, name: chi_prime(chi_p, p.n, backend=name),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = ["python"]
    if importlib.util.find_spec("e8frodo._core") is not None:
        names.append("cython")
    print(f"{'kernel':<30}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in cases().items():
        t = [best_of(lambda: fn(_backend.get(n), n), args.repeat) for n in names]
        row = f"{label:<30}" + "".join(f"{x * 1e3:>10.1f}ms" for x in t)
        if len(t) == 2:
            row += f"{t[0] / t[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
