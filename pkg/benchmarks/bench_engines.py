#!/usr/bin/env python3
"""Benchmark the compiled event-loop kernel against the pure-Python engine.

Both engines produce bit-identical traces (asserted here as a side check);
the only difference is wall-clock time. Typical result: the kernel runs the
450-day baseline scenario in tens of milliseconds, 30-50x faster than the
Python engine.

Usage: python benchmarks/bench_engines.py [--scenario NAME] [--seed N]
       [--repeats K]
"""

import argparse
import time

import numpy as np

from hashalloc import sim


def time_engine(config, engine: str, repeats: int) -> tuple[float, sim.SimTrace]:
    best = float("inf")
    trace = None
    for _ in range(repeats):
        start = time.perf_counter()
        trace = sim.run(config, engine=engine)
        best = min(best, time.perf_counter() - start)
    return best, trace


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", default="baseline_eps1e-3",
                        choices=sorted(sim.BUILTIN_SCENARIOS))
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    config = sim.builtin_scenario(args.scenario, seed=args.seed)
    engines = ["python"]
    if sim.compiled_available():
        engines.append("compiled")
    else:
        print("compiled kernel not built; timing the python engine only")

    results = {}
    for engine in engines:
        best, trace = time_engine(config, engine, args.repeats)
        results[engine] = (best, trace)
        print(f"{engine:>8}: {best * 1e3:8.1f} ms  "
              f"({len(trace) / best / 1e6:6.2f} M events/s, {len(trace)} events)")

    if len(results) == 2:
        py_time, py_trace = results["python"]
        cx_time, cx_trace = results["compiled"]
        identical = all(
            np.array_equal(getattr(py_trace, name), getattr(cx_trace, name))
            for name in ("time_s", "chain", "height", "expected_hashes",
                         "dt_s", "w_a", "w_e_a", "price_ratio", "pi_a", "pi_b"))
        print(f"speedup: {py_time / cx_time:.1f}x, traces bit-identical: {identical}")
        if not identical:
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
