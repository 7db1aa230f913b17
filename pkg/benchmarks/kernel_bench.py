#!/usr/bin/env python3
"""Compare the numba-jitted span kernel against the pure-Python/numpy fallback.

The workload is the full-resolution 3-day kitchen replay (259200 grounded
steps) plus a long synthetic stream. Selection normally follows the
AIRLOG_NUMBA env flag; here both evaluators are driven explicitly.

Usage: python3 benchmarks/kernel_bench.py [--horizons 800] [--gap 30]
"""

import argparse
import io
import time

from airlog import run
from airlog.fixtures import kitchen_kb, kitchen_stream_text, synthetic_stream
from airlog.kernels import get_span_evaluator
from airlog.observation import read_samples


def time_run(kb, samples, granularity, use_numba, repeats=3):
    best = float("inf")
    steps = None
    for _ in range(repeats):
        started = time.perf_counter()
        _, metrics = run(kb, samples, granularity=granularity, use_numba=use_numba)
        best = min(best, time.perf_counter() - started)
        steps = metrics[-1].step
    return best, steps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizons", type=int, default=800)
    parser.add_argument("--gap", type=int, default=30)
    args = parser.parse_args()

    kb = kitchen_kb()
    fixture = read_samples(io.StringIO(kitchen_stream_text(3)))
    synthetic = read_samples(io.StringIO(synthetic_stream(args.horizons, args.gap)))

    get_span_evaluator(True)  # trigger jit compilation outside the timings
    run(kb, fixture, granularity=60)

    print(f"{'workload':<28} {'steps':>8} {'numba':>10} {'python':>10} {'speedup':>8}")
    for name, samples, granularity in (
        ("kitchen 3-day @60s", fixture, 60),
        ("kitchen 3-day @1s", fixture, 1),
        (f"synthetic {args.horizons}x{args.gap}s", synthetic, 1),
    ):
        jit_time, steps = time_run(kb, samples, granularity, use_numba=True)
        py_time, _ = time_run(kb, samples, granularity, use_numba=False, repeats=1)
        print(
            f"{name:<28} {steps:>8} {jit_time * 1e3:>8.1f}ms {py_time * 1e3:>8.1f}ms"
            f" {py_time / jit_time:>7.1f}x"
        )


if __name__ == "__main__":
    main()
