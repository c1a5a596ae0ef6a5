"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot kernels (single-qudit operator application and Bell-pair
projection) on growing registers, then an end-to-end exhaustive RIC branch
enumeration in a subprocess per path (the active path is fixed at import
time by QRIC_NO_NUMBA).

    python benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from qric import kernels


def timeit(fn, *args, repeats=30):
    fn(*args)  # warm up / compile
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def rand_amps(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def bench_kernels():
    if not kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'case':<24}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for d, n in [(2, 12), (2, 16), (2, 20), (3, 8), (3, 12), (5, 6)]:
        amps = rand_amps(d**n, rng)
        op = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        stride = d ** (n // 2)
        t_nb = timeit(kernels.apply_single, amps, op, d, stride)
        t_np = timeit(kernels.apply_single_numpy, amps, op, d, stride)
        print(f"{f'apply d={d} n={n}':<24}{t_nb*1e3:>10.3f}ms{t_np*1e3:>10.3f}ms"
              f"{t_np/t_nb:>9.2f}x")
    for d, n in [(2, 12), (2, 16), (2, 20), (3, 8), (3, 12)]:
        amps = rand_amps(d**n, rng)
        pair = rand_amps(d * d, rng)
        s1 = d ** (n - 1)
        s2 = d ** (n - 3)
        t_nb = timeit(kernels.project_pair, amps, pair, d, s1, s2, d ** (n - 2))
        t_np = timeit(kernels.project_pair_numpy, amps, pair, d, s1, s2, d ** (n - 2))
        print(f"{f'project d={d} n={n}':<24}{t_nb*1e3:>10.3f}ms{t_np*1e3:>10.3f}ms"
              f"{t_np/t_nb:>9.2f}x")


RIC_SNIPPET = """
import time
import numpy as np
from qric import clone_state, preset_spec, run_ric, random_qudit

rng = np.random.default_rng(1)
inp = random_qudit(3, rng)
clone = clone_state(inp.amps, 3, 2)
spec = preset_spec("bell-product", 3, 2)
run_ric(clone, spec, mode="all-branches")  # warm up / compile
t0 = time.perf_counter()
for _ in range(3):
    run_ric(clone, spec, mode="all-branches")
print((time.perf_counter() - t0) / 3)
"""


def bench_end_to_end():
    print()
    print("end-to-end: exhaustive 729-branch RIC, d=3 N=2 (bell-product channel)")
    for label, env_val in (("numba", ""), ("numpy", "1")):
        env = dict(os.environ)
        env["QRIC_NO_NUMBA"] = env_val
        out = subprocess.run(
            [sys.executable, "-c", RIC_SNIPPET], env=env, capture_output=True, text=True
        )
        if out.returncode != 0:
            print(f"  {label}: failed\n{out.stderr}")
            continue
        print(f"  {label}: {float(out.stdout.strip())*1e3:.1f} ms/run")


if __name__ == "__main__":
    bench_kernels()
    bench_end_to_end()
