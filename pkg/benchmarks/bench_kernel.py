"""Time the compiled event loop against the pure-Python one on the same calls.

    python3 benchmarks/bench_kernel.py [--duration 20000] [--repeat 5]
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from ohca.allocators import allocate_uniform
from ohca.sim import _pykernel, kernel
from ohca.sim.simulator import ScenarioConfig, generate_calls


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration", type=float, default=20_000.0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    sc = ScenarioConfig(M=4, total_channels=40, fixed_fraction=Fraction(3, 4),
                        arrival_rate_per_cell=(1.2, 1.2, 0.3, 0.3), mean_holding_time=10.0,
                        sim_duration=args.duration, seed=1)
    t, c, h = generate_calls(sc)
    cap = np.asarray(allocate_uniform(4, 30).counts, dtype=np.int64)
    run = lambda mod: mod.simulate_calls(t, c, h, cap, 10, sc.sim_duration)  # noqa: E731

    py_out, py_s = best_of(lambda: run(_pykernel), args.repeat)
    print(f"calls={len(t)}")
    print(f"python  {py_s * 1e3:9.2f} ms")
    if kernel._ckernel is None:
        print("cython  unavailable (extension not built)")
        return
    cy_out, cy_s = best_of(lambda: run(kernel._ckernel), args.repeat)
    same = all(np.array_equal(a, b) for a, b in zip(py_out[:5], cy_out[:5])) and py_out[5:] == cy_out[5:]
    print(f"cython  {cy_s * 1e3:9.2f} ms")
    print(f"speedup {py_s / cy_s:9.1f}x  identical={same}")


if __name__ == "__main__":
    main()
